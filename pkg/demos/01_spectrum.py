"""Adiabatic spectrum of the double trap as the separation d sweeps through zero.

The ground doublet E0e/E0o is degenerate while the traps are far apart and
opens into the gap between the single-trap ground and first excited levels
when they merge at d = 0.
"""
import numpy as np

from wavesplit import Grid, TrapParams, adiabatic_spectrum, critical_separation

trap = TrapParams()
grid = Grid.for_separation(trap, 12.0)
d_values = np.linspace(-12, 12, 25)
table = adiabatic_spectrum(trap, d_values, 4, grid)

print(f"minima merge at |d| = {critical_separation(trap):.4f}")
print(f"{'d':>6} {'E0e':>10} {'E0o':>10} {'E1e':>10} {'E0o-E0e':>10}")
e0, o0, e1 = table.energy(0, "e"), table.energy(0, "o"), table.energy(1, "e")
for d, a, b, c in zip(d_values, e0, o0, e1):
    print(f"{d:6.1f} {a:10.5f} {b:10.5f} {c:10.5f} {b - a:10.2e}")
