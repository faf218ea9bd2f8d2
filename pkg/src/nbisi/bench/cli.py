"""Command-line interface: ``nbisi <command> ...`` (or ``python -m nbisi``)."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from ..channel import build_sectionalized_trellis, get_channel
from ..code import (Encoder, is_majority_logic_decodable, load_alist, random_regular_code,
                    save_alist)
from ..gf import GaloisField
from .config import ConfigError, load_config
from .counters import CATEGORIES, complexity_breakdown, complexity_ratio
from .harness import (FrameRunner, _simulate_point, git_revision, replace_budget,
                      run_detector_only, run_experiment)
from .output import emit_csv, emit_plotdata


def _meta(cfg, rows):
    return {
        "label": cfg.name,
        "seed": cfg.seed,
        "fingerprint": cfg.fingerprint,
        "git": git_revision(),
        "config": cfg.text,
        "points": [{
            "ebn0_db": r.ebn0_db, "frames": r.frames, "ber": r.ber, "ber_ci95": list(r.ber_ci()),
            "fer": r.fer, "mean_iters": r.mean_iters,
            "detector_ops_per_frame": dict(zip(CATEGORIES, r.ops.per_frame()[0].tolist())),
            "decoder_ops_per_frame": dict(zip(CATEGORIES, r.ops.per_frame()[1].tolist())),
            "ems_configs_per_sweep": list(r.ops.configs_per_sweep),
            "ratio": r.ratio,
        } for r in rows],
    }


def cmd_simulate(a):
    cfg = load_config(a.config, seed=a.seed)
    rows = []
    for r in run_experiment(cfg, threads=a.threads):
        rows.append(r)
        lo, hi = r.ber_ci()
        print(f"{cfg.name}  Eb/N0 {r.ebn0_db:6.2f} dB  frames {r.frames:8d}  BER {r.ber:.3e} "
              f"[{lo:.2e}, {hi:.2e}]  FER {r.fer:.3e}  iters {r.mean_iters:.2f}", flush=True)
    emit_csv(rows, a.out)
    Path(str(a.out) + ".meta.json").write_text(json.dumps(_meta(cfg, rows), indent=2))
    if a.plotdata:
        emit_plotdata(rows, a.plotdata)
    return 0


def cmd_trellis(a):
    ch = get_channel(a.channel)
    t = build_sectionalized_trellis(ch, a.field)
    print(f"channel taps {ch.taps}  memory L = {ch.order}")
    print(f"GF({t.q}) sections: {t.num_states} states, {t.num_branches} branches per section")
    if a.dump:
        print(t.dump())
    return 0


def cmd_detect(a):
    cfg = load_config(a.config)
    for eb, n, errs, ber, counts in run_detector_only(cfg, a.frames):
        print(f"{cfg.detector}  Eb/N0 {eb:6.2f} dB  frames {n}  bit errors {errs}  BER {ber:.3e}")
    return 0


def cmd_complexity(a):
    ca, cb = load_config(a.config_a), load_config(a.config_b)
    ra, rb = FrameRunner(ca), FrameRunner(cb)
    print("ebn0_db  frames  ber_a  ber_b  ratio  " + "  ".join(CATEGORIES))
    for i, eb in enumerate(ca.ebn0_db):
        row_a = _simulate_point(ca, ra, None, i, eb, 1)
        row_b = _simulate_point(replace_budget(replace(cb, seed=ca.seed), row_a.frames), rb, None,
                                i, eb, 1)
        ratio = complexity_ratio(row_a.ops, row_b.ops)
        br = complexity_breakdown(row_a.ops, row_b.ops)
        cats = "  ".join("-" if br[k] is None else f"{br[k]:.3g}" for k in CATEGORIES)
        print(f"{eb:6.2f}  {row_a.frames}  {row_a.ber:.3e}  {row_b.ber:.3e}  {ratio:.4f}  {cats}")
    return 0


def cmd_code(a):
    gf = GaloisField(a.field)
    if a.action == "gen":
        H = random_regular_code(a.n, a.col_weight, a.row_weight, gf, seed=a.seed)
        save_alist(H, a.out)
        print(f"wrote {a.out}: {H.M} x {H.N} over GF({gf.q}), rate {Encoder(H).k / H.N:.4f}")
        return 0
    if a.path is None:
        raise SystemExit(f"code {a.action} needs an alist path")
    H = load_alist(a.path, gf)
    if a.action == "check":
        ok = is_majority_logic_decodable(H)
        print(f"{a.path}: {'majority-logic decodable' if ok else 'NOT majority-logic decodable'}")
        return 0 if ok else 1
    enc = Encoder(H)
    cw, rw = np.diff(H.col_ptr), np.diff(H.row_ptr)
    print(f"N = {H.N}  M = {H.M}  rank = {enc.rank}  K = {enc.k}  rate = {enc.k / H.N:.4f}")
    print(f"field GF({gf.q})  nonzeros = {H.delta}")
    print(f"column weights {sorted(set(cw.tolist()))}  row weights {sorted(set(rw.tolist()))}")
    print(f"majority-logic decodable: {is_majority_logic_decodable(H)}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nbisi", description="Joint detection/decoding of "
                                "nonbinary LDPC codes over binary ISI channels.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="Monte Carlo BER/FER sweep")
    s.add_argument("--config", required=True)
    s.add_argument("--out", required=True, help="CSV output path")
    s.add_argument("--plotdata", help="gnuplot data output path")
    s.add_argument("--threads", type=int, default=1)
    s.add_argument("--seed", type=int, default=None, help="override the config seed")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("trellis", help="print sectionalized trellis sizes and tables")
    s.add_argument("--channel", required=True, help="catalog name or comma-separated taps")
    s.add_argument("--field", type=int, required=True, help="m, for symbols in GF(2^m)")
    s.add_argument("--dump", action="store_true")
    s.set_defaults(func=cmd_trellis)

    s = sub.add_parser("detect", help="uncoded detector-only BER")
    s.add_argument("--config", required=True)
    s.add_argument("--frames", type=int, required=True)
    s.set_defaults(func=cmd_detect)

    s = sub.add_parser("complexity", help="operation-count ratio of config A over config B")
    s.add_argument("--config-a", required=True)
    s.add_argument("--config-b", required=True)
    s.set_defaults(func=cmd_complexity)

    s = sub.add_parser("code", help="random code generation and alist inspection")
    s.add_argument("action", choices=("gen", "check", "info"))
    s.add_argument("path", nargs="?", help="alist file (check, info)")
    s.add_argument("--field", type=int, default=4, help="m, for GF(2^m)")
    s.add_argument("--n", type=int, default=128)
    s.add_argument("--col-weight", type=int, default=3)
    s.add_argument("--row-weight", type=int, default=12)
    s.add_argument("--seed", type=int, default=1)
    s.add_argument("--out", default="code.alist")
    s.set_defaults(func=cmd_code)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error:\n{exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
