"""
THz-like channel estimation
===========================

Estimating a 1585-tap channel with nine dominant paths from a BPSK
training sequence, for several training lengths.
"""

from thzamp.experiments import BenchmarkSpec, channel_benchmark
from thzamp.signals import PRESETS, tail_energy_fraction, thz_like_channel

preset = PRESETS["32-band-first"]

# %%
# The synthetic channel has k strong taps plus a weak Gaussian floor that
# carries 1% of the energy, so it is only approximately sparse.
ch = thz_like_channel(preset, seed=0)
print(f"n={ch.n}, dominant taps at {ch.support.tolist()}, "
      f"tail energy {tail_energy_fraction(ch):.3f}")

# %%
# Each realization draws a fresh training sequence and fresh noise at
# 20 dB SNR. The AMP variants use the oracle threshold.
spec = BenchmarkSpec(preset, (200, 800), realizations=3)
rows = channel_benchmark(spec)
print("   m  " + "  ".join(f"{a:>7}" for a in spec.algorithms))
for m in spec.m_values:
    print(f"{m:4d}  " + "  ".join(f"{r.mse_db:7.2f}" for r in rows if r.m == m))

# %%
# The sparse methods approach the oracle least-squares error, which sits on
# the floor set by the non-sparse tail. Plain least squares is far worse
# while m < n.
