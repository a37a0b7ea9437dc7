"""Equal couplings: the outcome map and how much of it a distant shift changes.

Run with ``python3 demos/01_symmetric_case.py``.
"""
import math

import numpy as np

from pilotnonlocal import (
    Exact,
    Grid,
    HiddenVariable,
    MeasurementSettings,
    delta_sweep,
    evolve_exact,
    outcome_partition,
    shift_at_B,
    singlet_amplitudes,
)

# Aligned settings: only the +- and -+ branches carry weight, and the square
# of initial pointer positions is cut along the diagonal r_B = r_A.
aligned = singlet_amplitudes(MeasurementSettings(0.0, 0.0))
for lam in (HiddenVariable(0.3, -0.1), HiddenVariable(-0.2, 0.25)):
    tr = evolve_exact(lam, aligned)
    print(f"lambda=({lam.r_A0:+.2f}, {lam.r_B0:+.2f}) -> {tr.outcome}, breakpoints at t={np.round(tr.t, 3)}")

# Turning theta_B by a quarter turn splits the square into four quadrants.
quarter = singlet_amplitudes(MeasurementSettings(0.0, math.pi / 2))
for cell in outcome_partition(quarter):
    print(f"  cell sigma=({cell.sigma_A:+d},{cell.sigma_B:+d}) area={cell.area:.4f}")

rep = shift_at_B(0.0, 0.0, math.pi / 2, method=Exact())
print(f"\nalpha(0,0,pi/2) = {rep.alpha.alpha:.6f}, beta~(0,0,pi/2) = {rep.beta_tilde.alpha:.6f}")
print(f"bound (1): lhs {rep.bound1.lhs:.6f} rhs {rep.bound1.rhs:.6f}")

# The lower bound (1 - cos delta)/4 is met with equality at every delta.
sweep = delta_sweep(np.radians(np.arange(0, 181, 30)), method=Grid(1000))
print("\n delta   alpha    beta~    rhs")
for row in sweep.rows():
    print(f"{math.degrees(row['delta_rad']):5.0f}  {row['alpha']:.5f}  {row['beta_tilde']:.5f}  {row['bound_rhs']:.5f}")
