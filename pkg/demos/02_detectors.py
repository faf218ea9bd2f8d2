"""
The three symbol detectors side by side on a short dicode frame.

Integer Viterbi and max-log-MAP work on quantized possibility values;
BCJR works on real likelihoods. With no prior information all three give
the same hard decisions at high SNR and drift apart as noise grows.
"""

import numpy as np

from nbisi import GaloisField, get_channel
from nbisi.channel import build_sectionalized_trellis, modulate, transmit
from nbisi.detect import BranchMetricSet, bcjr, max_log_map, viterbi
from nbisi.metrics import QuantizerConfig, channel_possibilities

gf = GaloisField(2)
channel = get_channel("dicode")
trellis = build_sectionalized_trellis(channel, gf.m)
print(trellis.dump())

rng = np.random.default_rng(3)
v = rng.integers(0, gf.q, 12)
qc = QuantizerConfig(9, 80.0)
for sigma in (0.2, 0.6, 1.0):
    y = transmit(modulate(v, gf), channel, sigma, rng)
    metrics = BranchMetricSet.from_channel(channel_possibilities(y, trellis, qc), gf.q)
    v_vit, best = viterbi(trellis, metrics)
    v_mlm = max_log_map(trellis, metrics).argmax(axis=1)
    v_bcjr = bcjr(trellis, y, sigma)[0].argmax(axis=1)
    print(f"\nsigma {sigma}: sent     {v}")
    for name, vh in (("viterbi", v_vit), ("max-log", v_mlm), ("bcjr", v_bcjr)):
        print(f"  {name:8s} {vh}  errors {int(np.count_nonzero(vh != v))}")
