"""Two-level prediction for the splitting outcome.

The dynamical phase accumulated between the two lowest levels is
theta = area / (2 v), so theta * v is a constant of the trap geometry and the
probability to stay in the original trap is sin^2(theta).
"""
import numpy as np

from wavesplit import TrapParams, predicted_populations, splitting_phase, velocity_for_phase

trap = TrapParams()
print(f"{'v':>6} {'theta':>9} {'theta*v':>9} {'p_stay':>7}")
for v in np.linspace(0.05, 0.3, 11):
    r = splitting_phase(trap, v)
    p_transfer, p_stay = predicted_populations(r.theta_c)
    print(f"{v:6.3f} {r.theta_c:9.4f} {r.theta_c * v:9.6f} {p_stay:7.4f}")

v_half = velocity_for_phase(trap, 2.5 * np.pi / 2)
print(f"velocity for an even split near theta = 5 pi/4: {v_half:.5f}")
