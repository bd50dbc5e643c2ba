"""Where along the path the motion is least adiabatic.

The ratio |v <i|dV/dd|j>| / (E_j - E_i)^2 peaks on the flanks of the merge
point and grows linearly with v.
"""
import numpy as np

from wavesplit import Grid, TrapParams, scan_adiabaticity, worst_ratio

trap = TrapParams()
grid = Grid.for_separation(trap, 12.0)
rep = scan_adiabaticity(trap, 0.15, np.linspace(-12, 12, 121), 6, grid)
print(f"v = 0.15: worst ratio {rep.worst_ratio:.4f} at d = {rep.worst_d:+.2f} for pair {rep.worst_pair}")
for v in (0.05, 0.1, 0.2, 0.3):
    print(f"v = {v:4.2f}: worst ratio {worst_ratio(trap, v, -12, 12):.4f}")
