"""
Quickstart: encode one frame over GF(16), send it through the EPR4 channel
and decode it with iterative max-log-MAP <-> mu-EMS.

Run with ``python demos/01_quickstart.py``.
"""

import numpy as np

from nbisi import Encoder, GaloisField, get_channel, random_regular_code
from nbisi.channel import build_sectionalized_trellis, modulate, snr_to_sigma, transmit
from nbisi.decode import TruncationRule
from nbisi.joint import ScheduleConfig, decode_frame
from nbisi.metrics import QuantizerConfig

gf = GaloisField(4)
H = random_regular_code(128, 3, 12, gf, seed=1)
enc = Encoder(H)
print(f"code: N = {H.N} symbols over GF({gf.q}), K = {enc.k}, rate {enc.k / H.N:.3f}")

channel = get_channel("epr4")
trellis = build_sectionalized_trellis(channel, gf.m)
print(f"EPR4 taps {channel.taps}: {trellis.num_states} states, "
      f"{trellis.num_branches} branches per symbol section")

rng = np.random.default_rng(7)
u = rng.integers(0, gf.q, enc.k)
v = enc.encode(u)
sigma = snr_to_sigma(0.0, enc.k / H.N)
y = transmit(modulate(v, gf), channel, sigma, rng)

schedule = ScheduleConfig("max-log-map", "mu-ems", rule_branch=TruncationRule.mu(-20), scale=0.6)
r = decode_frame(y, H, trellis, QuantizerConfig(9, 180.0), schedule)

print(f"Eb/N0 0 dB (sigma {sigma:.3f}): converged {r.converged} after {r.iterations} "
      f"iteration(s), {r.sweeps} decoder sweep(s)")
print(f"symbol errors: {int(np.count_nonzero(r.vhat != v))} of {H.N}")
print(f"detector integer ops {r.counts[0, :2].sum()}, decoder configurations {r.counts[1, 6]}")
