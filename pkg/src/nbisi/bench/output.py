"""CSV and gnuplot plot-data writers for simulation results."""

from __future__ import annotations

import csv
import io
from pathlib import Path

HEADER = ("ebn0_db", "frames", "bit_errors", "ber", "ser", "fer", "mean_iters", "int_add",
          "int_cmp", "field_ops", "real_mul", "real_add", "real_div", "ratio")


def _fmt(x) -> str:
    if x is None:
        return "nan"
    if isinstance(x, float):
        return repr(x)
    return str(x)


def csv_rows(rows):
    """Header plus one list of strings per result row."""
    out = [list(HEADER)]
    for r in rows:
        ops = r.ops.category_means()
        out.append([_fmt(v) for v in (
            float(r.ebn0_db), r.frames, r.bit_errors, r.ber, r.ser, r.fer, r.mean_iters,
            ops["int_add"], ops["int_cmp"], ops["field_ops"], ops["real_mul"], ops["real_add"],
            ops["real_div"], None if r.ratio is None else float(r.ratio))])
    return out


def _write(path, text):
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def emit_csv(rows, path=None) -> str:
    """Write rows as CSV (op counts are per-frame means); returns the text."""
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(csv_rows(rows))
    text = buf.getvalue()
    if path is not None:
        _write(path, text)
    return text


def emit_plotdata(rows, path=None) -> str:
    """Two-column ``ebn0_db ber`` blocks, one per series label, separated by two blank lines.

    Each block starts with a ``# label`` comment so gnuplot's ``index`` and
    ``columnheader`` conventions both work.
    """
    series = {}
    for r in rows:
        series.setdefault(r.label, []).append(r)
    blocks = []
    for label, rs in series.items():
        lines = [f"# {label}"] + [f"{float(r.ebn0_db)!r} {r.ber!r}" for r in rs]
        blocks.append("\n".join(lines))
    text = "\n\n\n".join(blocks) + ("\n" if blocks else "")
    if path is not None:
        _write(path, text)
    return text
