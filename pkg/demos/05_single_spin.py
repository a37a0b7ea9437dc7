"""One spin, one pointer: trajectories never cross, so a pi turn changes nothing for |x+>."""
import math

import numpy as np

from pilotnonlocal import single_spin_outcome, single_spin_position

r0 = np.linspace(-0.45, 0.45, 7)
for state, theta in [("z+", 0.0), ("z+", math.pi), ("x+", 0.0), ("x+", math.pi)]:
    print(f"|{state}> theta={theta:.2f}: outcomes {single_spin_outcome(r0, state, theta)}")

t = np.linspace(0, 1.5, 4)
paths = single_spin_position(r0[:, None], t[None, :], "x+", 0.0)
print("\npositions (rows: r0, columns: t = 0, 0.5, 1, 1.5)")
print(np.round(paths, 3))
