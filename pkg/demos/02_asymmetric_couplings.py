"""Unequal coupling strengths move the nonlocality from one wing to the other."""
import math

from pilotnonlocal import CouplingProfile, Exact, ExperimentConfig, shift_at_B

for a_A, a_B in [(1, 1), (2, 1), (10, 1), (100, 1), (1, 100)]:
    cfg = ExperimentConfig(CouplingProfile(a_A, a_B))
    rep = shift_at_B(0.0, 0.0, math.pi / 2, config=cfg, method=Exact())
    print(f"a_A:a_B = {a_A:>3}:{a_B:<3}  alpha={rep.alpha.alpha:.4f}  beta~={rep.beta_tilde.alpha:.4f}  "
          f"alpha+beta~={rep.bound1.lhs:.4f} (bound {rep.bound1.rhs:.4f})")

# The faster pointer finishes first: with a_A >> a_B the outcome at A is
# settled before B's setting matters, so alpha -> 0 while beta~ -> 1/2.
