"""One full splitting run compared with the two-level prediction.

The atom starts in the left trap; the traps pass through each other and the
final populations are read off by projecting onto the two trap ground states.
"""
import warnings

from wavesplit import SplitProtocol, run_split

sp = SplitProtocol(v=0.3, n_grid=500)
with warnings.catch_warnings():
    warnings.simplefilter("ignore")
    r = run_split(sp)

print(f"v = {sp.v}, duration = {sp.schedule.duration():.1f}")
print(f"p_stay = {r.p_stay:.5f}  (two-level: {r.p_stay_predicted:.5f})")
print(f"p_transfer = {r.p_transfer:.5f}, p_lost = {r.p_lost:.2e}")
print(f"theta from the run = {r.theta_tdse:.4f}, predicted = {r.theta_predicted:.4f}")
print(f"worst adiabaticity ratio = {r.max_adiabaticity_ratio:.3f}")
