import csv
import io
import json
from dataclasses import replace

import numpy as np
import pytest

from nbisi import _ops
from nbisi.bench.cli import main
from nbisi.bench.config import ConfigError, load_config, parse_config
from nbisi.bench.counters import OpCounters, complexity_breakdown, complexity_ratio, table_i
from nbisi.bench.harness import ResultRow, run_experiment
from nbisi.bench.output import HEADER, emit_csv, emit_plotdata
from nbisi.channel import CATALOG

SMALL = """
channel = dicode
field = 4
code_n = 32
code_col_weight = 3
code_row_weight = 6
d_max = 40
decoder = mu-ems
scale = 3/4
ebn0_db = 1.0, inf
max_frames = 40
max_frame_errors = 1000
block_frames = 8
max_iterations = 10
seed = 5
"""


def test_table_i_examples():
    assert table_i("viterbi", 10, 16, 1)["int_cmp"] == 320
    assert table_i("max-log-map", 10, 16, 1)["int_add"] == 1280
    assert table_i("qspa", 0, 4, 0, delta=32)["real_add"] == 1024
    g = table_i("gmlgd", 10, 4, 2, delta=30)
    assert g["int_add"] == 30 + 160 and g["field_ops"] == 480 and g["real_mul"] == 0
    with pytest.raises(ValueError):
        table_i("ems", 10, 4, 1)


def test_complexity_ratio():
    a = OpCounters()
    a.add_frame(np.arange(14).reshape(2, 7), 2, 1)
    assert complexity_ratio(a, a) == 1.0
    assert complexity_ratio({"x": 5}, {"x": 10}) == 0.5
    assert complexity_ratio(3, 6) == 0.5
    with pytest.raises(ValueError):
        complexity_ratio(a, OpCounters())
    half = OpCounters()
    half.add_frame(np.zeros((2, 7), dtype=np.int64), 1, 0)
    full = OpCounters()
    c = np.zeros((2, 7), dtype=np.int64)
    c[0, 0], c[1, 3] = 4, 8
    full.add_frame(c, 1, 0)
    br = complexity_breakdown(full, full)
    assert br["int_add"] == 1.0 and br["real_mul"] == 1.0 and br["real_div"] is None


def test_op_counters_are_additive():
    rng = np.random.default_rng(0)
    frames = [rng.integers(0, 100, (2, 7)) for _ in range(6)]
    whole, a, b = OpCounters(), OpCounters(), OpCounters()
    for i, f in enumerate(frames):
        whole.add_frame(f, i + 1, i)
        (a if i < 3 else b).add_frame(f, i + 1, i)
    a.merge(b)
    assert (a.totals == whole.totals).all() and a.iterations == whole.iterations
    assert a.configs_per_sweep == pytest.approx(whole.configs_per_sweep)
    assert np.allclose(whole.per_iteration() * whole.iterations, whole.per_frame() * 6)
    with pytest.raises(ValueError):
        whole.add_frame(-np.ones((2, 7)), 1, 1)


def test_config_parsing():
    cfg = parse_config(SMALL)
    assert cfg.channel.taps == CATALOG["dicode"].taps
    assert cfg.ebn0_db == (1.0, float("inf"))
    s = cfg.schedule
    assert s.decoder == "mu-ems" and s.rule_branch.kind == "mu" and s.scale == 0.75
    t = parse_config("decoder = t-ems\nT_s = 30\nT_b = 10\n")
    assert t.schedule.rule_state.param == 30 and t.schedule.rule_branch.param == 10
    assert t.detector == "max-log-map"
    assert parse_config("decoder = gmlgd").detector == "viterbi"
    p = parse_config("preset = example-2\ndecoder = d-ems\n")
    assert p.d_max == 180.0 and dict(p.rules) == {"D_s": 45, "D_b": 35}
    assert p.channel.taps == (1.0, 1.0, -1.0, -1.0)
    assert parse_config("channel = 1, 0.5\n").channel.taps == (1.0, 0.5)
    assert parse_config(SMALL).fingerprint == cfg.fingerprint
    assert parse_config(SMALL.replace("seed = 5", "seed = 6")).fingerprint != cfg.fingerprint


def test_config_errors_carry_line_numbers():
    text = "decoder = t-ems\nbogus = 1\nfield = x\nM = 3\np = 9\np = 8\nno equals sign\n"
    with pytest.raises(ConfigError) as exc:
        parse_config(text, "exp.cfg")
    lines = [n for n, _ in exc.value.errors]
    assert lines == [1, 2, 3, 4, 6, 7]
    assert "exp.cfg:2: unknown key 'bogus'" in str(exc.value)
    for bad in ("decoder = m-ems\nM = 2.5", "max_frames = 0", "decoder = qspa\ndetector = viterbi",
                "code = /no/such.alist", "ebn0_db = ", "baseline = me", "preset = example-9"):
        with pytest.raises(ConfigError):
            parse_config(bad)
    with pytest.raises(ConfigError):
        load_config("/no/such/file.cfg")


def test_noiseless_point_and_determinism():
    cfg = parse_config(SMALL)
    rows = list(run_experiment(cfg))
    assert rows[1].ber == 0 and rows[1].fer == 0 and rows[1].frames == 40
    again = list(run_experiment(cfg))
    assert emit_csv(rows) == emit_csv(again)
    threaded = list(run_experiment(cfg, threads=2))
    assert emit_csv(rows) == emit_csv(threaded)


def test_error_budget_stops_at_block_boundary():
    cfg = replace(parse_config(SMALL), ebn0_db=(-2.0,), max_frame_errors=3, max_frames=400)
    (row,) = run_experiment(cfg)
    assert row.frame_errors >= 3 and row.frames % cfg.block_frames == 0 and row.frames < 400
    assert row.ber == row.bit_errors / (row.frames * row.bits_per_frame)


def test_counting_does_not_change_decisions():
    cfg = parse_config(SMALL)
    from nbisi.bench.harness import FrameRunner
    r = FrameRunner(cfg)
    s = r.sigma(1.0)
    for f in range(5):
        b1, s1, a = r.frame(cfg.seed, 0, f, s)
        b2, s2, b = r.frame(cfg.seed, 0, f, s)
        assert (a.vhat == b.vhat).all() and (a.counts == b.counts).all()


def test_ber_decreases_over_two_db():
    cfg = replace(parse_config(SMALL), code_n=64, ebn0_db=(-1.0, 1.0), max_frames=300,
                  max_iterations=20)
    lo, hi = run_experiment(cfg)
    assert hi.ber < lo.ber
    # separation beyond 3-sigma counting noise
    assert hi.ber_ci(3.0)[1] < lo.ber_ci(3.0)[0]


def test_baseline_ratio_column():
    cfg = replace(parse_config(SMALL), ebn0_db=(1.0,), max_frames=16, baseline="bcjr-qspa")
    (row,) = run_experiment(cfg)
    base = replace(cfg, detector="bcjr", decoder="qspa", rules=(), scale=1.0, baseline="none",
                   max_frames=row.frames)
    (brow,) = run_experiment(base)
    assert row.ratio == pytest.approx(complexity_ratio(row.ops, brow.ops), rel=1e-12)
    assert brow.ratio is None


def _row(label, eb, ber_err):
    r = ResultRow(label, eb, 10, 100, 25, ber_err, 3, 2, ber_err)
    c = np.zeros((2, _ops.N_SLOTS), dtype=np.int64)
    c[0, 0] = 7
    for _ in range(10):
        r.ops.add_frame(c, 3, 2)
    r.ratio = 0.25
    return r


def test_csv_and_plotdata(tmp_path):
    assert emit_csv([]).strip() == ",".join(HEADER)
    row = _row("a", 1.5, 12)
    text = emit_csv([row], tmp_path / "r.csv")
    (rec,) = list(csv.DictReader(io.StringIO((tmp_path / "r.csv").read_text())))
    assert list(rec) == list(HEADER) and text == (tmp_path / "r.csv").read_text()
    assert float(rec["ebn0_db"]) == 1.5 and int(rec["frames"]) == 10
    assert int(rec["bit_errors"]) == 12 and float(rec["ber"]) == row.ber
    assert float(rec["fer"]) == row.fer and float(rec["int_add"]) == 7.0
    assert float(rec["ratio"]) == 0.25 and float(rec["mean_iters"]) == 3.0
    rows = [_row("a", 1.0, 5), _row("a", 2.0, 1), _row("b", 1.0, 4)]
    pd = emit_plotdata(rows)
    blocks = [b for b in pd.split("\n\n\n") if b.strip()]
    assert len(blocks) == 2 and blocks[0].splitlines()[0] == "# a"
    assert len(np.loadtxt(io.StringIO(blocks[0]))) == 2
    with pytest.raises(OSError):
        emit_csv([row], tmp_path / "missing" / "r.csv")


def test_cli_commands(tmp_path, capsys):
    cfg = tmp_path / "exp.cfg"
    cfg.write_text(SMALL.replace("1.0, inf", "inf"))
    out = tmp_path / "r.csv"
    assert main(["simulate", "--config", str(cfg), "--out", str(out), "--plotdata",
                 str(tmp_path / "r.dat"), "--seed", "9"]) == 0
    assert out.read_text().startswith(",".join(HEADER))
    meta = json.loads((tmp_path / "r.csv.meta.json").read_text())
    assert meta["seed"] == 9 and len(meta["fingerprint"]) == 16
    assert (tmp_path / "r.dat").read_text().startswith("#")
    assert main(["trellis", "--channel", "epr4", "--field", "2", "--dump"]) == 0
    assert "8 states" in capsys.readouterr().out
    assert main(["detect", "--config", str(cfg), "--frames", "3"]) == 0
    assert "BER 0.000e+00" in capsys.readouterr().out
    cfg_b = tmp_path / "b.cfg"
    cfg_b.write_text(SMALL.replace("decoder = mu-ems", "decoder = qspa")
                     .replace("scale = 3/4", "").replace("1.0, inf", "1.0"))
    cfg_a = tmp_path / "a.cfg"
    cfg_a.write_text(SMALL.replace("1.0, inf", "1.0").replace("max_frames = 40", "max_frames = 8"))
    assert main(["complexity", "--config-a", str(cfg_a), "--config-b", str(cfg_b)]) == 0
    assert "ratio" in capsys.readouterr().out
    alist = tmp_path / "c.alist"
    assert main(["code", "gen", "--n", "32", "--col-weight", "2", "--row-weight", "4",
                 "--out", str(alist)]) == 0
    assert main(["code", "check", str(alist)]) == 0
    assert main(["code", "info", str(alist)]) == 0
    assert "K = " in capsys.readouterr().out
    bad = tmp_path / "bad.cfg"
    bad.write_text("decoder = mu-ems\nfoo = 1\n")
    assert main(["simulate", "--config", str(bad), "--out", str(out)]) == 2
    assert "bad.cfg:2" in capsys.readouterr().err
