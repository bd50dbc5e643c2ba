"""Natural units expressed for rubidium-87 in a 10 kHz trap."""
from wavesplit import UnitsConvention, to_si

u = UnitsConvention.rubidium87()
print(f"length unit   {to_si(1.0, 'length', u) * 1e6:.4f} um")
print(f"time unit     {to_si(1.0, 'time', u) * 1e3:.5f} ms")
print(f"v = 0.15      {to_si(0.15, 'velocity', u) * 1e3:.3f} mm/s")
print(f"energy unit   {to_si(1.0, 'energy', u):.3e} J")
