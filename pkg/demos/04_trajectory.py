"""Centre of mass of the atom against the trap centres.

While the traps overlap the wavepacket sloshes about the midpoint; afterwards
<z> settles on the population-weighted mean of the two trap positions.
"""
from wavesplit import SplitProtocol, com_trajectory

tr = com_trajectory(SplitProtocol(v=0.3, n_grid=500), observe_every=500)
print(f"{'t':>7} {'d':>7} {'<z>':>8} {'midpoint':>9} {'atom trap':>10}")
for i in range(0, len(tr.t), max(1, len(tr.t) // 30)):
    print(f"{tr.t[i]:7.2f} {tr.d[i]:7.2f} {tr.mean_z[i]:8.3f} {tr.midpoint[i]:9.3f} {tr.atom_trap[i]:10.3f}")
print(f"turning points while |d| < 2: {tr.central_extrema()}")
