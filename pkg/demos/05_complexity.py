"""
Operation counts of the EMS family against the BCJR <-> QSPA benchmark.

Every schedule decodes the same 200 frames; the harness reports per-frame
operation counts by category and the ratio of total operations to the
benchmark. mu-EMS also reports the mean number of check-node
configurations per decoder sweep.
"""

from dataclasses import replace
from pathlib import Path

from nbisi.bench.config import load_config
from nbisi.bench.counters import complexity_ratio
from nbisi.bench.harness import run_experiment

base_cfg = load_config(Path(__file__).with_name("configs") / "epr4_mu_ems.cfg")
base_cfg = replace(base_cfg, ebn0_db=(0.0,), max_frames=200, max_frame_errors=10**9)
variants = {
    "bcjr<->qspa": dict(decoder="qspa", rules=(), scale=1.0),
    "m-ems M=10": dict(decoder="m-ems", rules=(("M", 10),), scale=0.6),
    "t-ems 30/10": dict(decoder="t-ems", rules=(("T_b", 10), ("T_s", 30)), scale=0.6),
    "d-ems 60/45": dict(decoder="d-ems", rules=(("D_b", 45), ("D_s", 60)), scale=0.6),
    "mu-ems c=-20": dict(decoder="mu-ems", rules=(("c", -20),), scale=0.6),
}
rows = {}
for name, kw in variants.items():
    det = "bcjr" if kw["decoder"] == "qspa" else "max-log-map"
    (rows[name],) = run_experiment(replace(base_cfg, detector=det, label=name, **kw))
base = rows["bcjr<->qspa"]
for name, r in rows.items():
    mean, std = r.ops.configs_per_sweep
    extra = f"  configs/sweep {mean:8.0f} +- {std:6.0f}" if mean else ""
    print(f"{name:13s} BER {r.ber:.2e}  iters {r.mean_iters:5.2f}  "
          f"ops ratio {complexity_ratio(r.ops, base.ops):6.3f}{extra}")
