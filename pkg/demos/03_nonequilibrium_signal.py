"""Signals appear as soon as the hidden variables leave equilibrium."""
import math

from pilotnonlocal import (
    DiscDistribution,
    Exact,
    Grid,
    MonteCarlo,
    circle_model_run,
    equilibrium_distribution,
    half_square,
    linear_tilt,
    signal,
)

shift = (0.0, 0.0, math.pi / 2)
for name, dist in [("equilibrium", equilibrium_distribution()), ("half-square(right)", half_square("right")),
                   ("linear tilt c=1", linear_tilt(1.0))]:
    mc = signal("A", *shift, dist=dist, method=MonteCarlo(10**6, 42))
    ex = signal("A", *shift, dist=dist, method=Exact())
    print(f"{name:20s} P(+) {ex.p_before:.4f} -> {ex.p_after:.4f}  signal exact {ex.signal:+.5f}  "
          f"mc {mc.signal:+.5f} +- {mc.stderr:.5f}")

# Disc toy model: each transition wedge has mass gamma/(2 pi) in equilibrium,
# so the +1:-1 ratio is untouched; an upper half-disc ensemble sees it move.
for dist in (DiscDistribution("uniform"), DiscDistribution("upper-half")):
    rep = circle_model_run(math.pi / 6, dist, Grid(1000))
    print(f"disc {dist.kind:10s} ratio {rep.ratio_before:.3f} -> {rep.ratio_after:.3f}  "
          f"nu(+,-)={rep.nu_plus_minus.value:.4f} nu(-,+)={rep.nu_minus_plus.value:.4f}")
