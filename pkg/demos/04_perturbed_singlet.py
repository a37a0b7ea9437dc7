"""alpha(0,0,pi) for slightly perturbed singlets.

The exact transition area gives 1/2 - d^2/(1+d) with d = |a_+-|^2 - |a_-+|^2,
so the curvature at epsilon = 0 is -1, not -5/4.
"""
import math

import numpy as np

from pilotnonlocal import Exact, entanglement_sweep

eps = np.array([0.0, 0.01, 0.02, 0.03, 0.04, 0.05])
sw = entanglement_sweep(eps, [math.pi / 2, math.pi], method=Exact())
print(" eps     alpha(pi/2)  alpha(pi)   1/2 - (5/4)eps^2")
for e, row in zip(eps, sw.alpha):
    print(f"{e:.2f}   {row[0]:.6f}     {row[1]:.6f}    {0.5 - 1.25 * e * e:.6f}")

fit = entanglement_sweep(eps[1:], [math.pi], method=Exact())
print(f"\nfit alpha = c0 + c2 eps^2 over 0.01..0.05: c0={fit.fit_intercept:.5f} c2={fit.fit_quadratic:.4f}")
print(f"full quadratic fit coefficients (eps^2, eps, 1): {np.round(fit.fit_poly, 4)}")
