"""
How the truncation rules shrink an EMS check node.

One degree-6 check over GF(16) is fed random possibility vectors. Each
rule keeps a different subset of every incoming vector; the configuration
count (slot 6 of the decoder row) shows the cost, and the output shows how
far the result moves from the full-field answer.
"""

import numpy as np

from nbisi import _ops
from nbisi.decode import TruncationRule, cnode_ems

rng = np.random.default_rng(11)
msgs = rng.integers(0, 400, (6, 16))
msgs -= msgs.min(axis=1, keepdims=True)

full = TruncationRule.full()
rules = {
    "full field": (full, full),
    "M = 4 (branches)": (full, TruncationRule.M(4)),
    "M = 2 (branches)": (full, TruncationRule.M(2)),
    "T = 100 (branches)": (full, TruncationRule.T(100)),
    "T = 300 (branches)": (full, TruncationRule.T(300)),
    "D = 150 (branches)": (full, TruncationRule.D(150)),
    "mu, c = 0": (full, TruncationRule.mu(0)),
    "mu, c = -40": (full, TruncationRule.mu(-40)),
    "mu, c = -150": (full, TruncationRule.mu(-150)),
}
ref = None
for name, (rs, rb) in rules.items():
    counts = np.zeros((2, _ops.N_SLOTS), dtype=np.int64)
    out = cnode_ems(msgs, rs, rb, scale=1, counts=counts)
    if ref is None:
        ref = out
    moved = int(np.abs(out - ref).max())
    print(f"{name:20s} configurations {counts[_ops.DECODER, _ops.CONFIGS]:6d}   "
          f"max deviation from full field {moved}")
