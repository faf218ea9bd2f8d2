"""
Experiment configuration: a line-based ``key = value`` format with ``#``
comments and comma-separated lists.

Example::

    preset    = example-2        # EPR4 setup, fills in channel/p/d_max/decoder params
    decoder   = mu-ems
    code      = random           # or a path to an alist file
    code_n    = 128
    ebn0_db   = 3.0, 3.5, 4.0
    seed      = 7

Unknown keys, malformed values and inconsistent combinations are all
collected and raised together in one :class:`ConfigError`, each message
prefixed with the line it came from.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, fields, replace
from dataclasses import field as dc_field
from pathlib import Path

from ..channel import IsiChannel, get_channel
from ..decode import TruncationRule
from ..joint import DECODERS, DETECTORS, ScheduleConfig
from ..metrics import QuantizerConfig, default_d_max

# decoder -> (branch key, state key, rule constructor)
_RULE_KEYS = {
    "m-ems": ("M", "M_s", TruncationRule.M),
    "t-ems": ("T_b", "T_s", TruncationRule.T),
    "d-ems": ("D_b", "D_s", TruncationRule.D),
    "mu-ems": ("c", "c_s", TruncationRule.mu),
}
RULE_PARAMS = ("M", "M_s", "T_b", "T_s", "D_b", "D_s", "c", "c_s")

# Stand-in codes: random 4-cycle-free regular matrices of roughly the size and
# rate of the algebraic codes of each example. An alist file replaces them.
PRESETS = {
    "example-1": dict(
        channel="dicode", field=5, p=9, d_max=80.0, max_iterations=50,
        code_n=960, code_col_weight=3, code_row_weight=15,
        params={"mu-ems": dict(c=1, scale=0.4), "d-ems": dict(D_s=50, D_b=40, scale=0.3),
                "t-ems": dict(T_s=20, T_b=10, scale=0.4), "m-ems": dict(M=16, scale=0.4)}),
    "example-2": dict(
        channel="epr4", field=4, p=9, d_max=180.0, max_iterations=50,
        code_n=224, code_col_weight=3, code_row_weight=14,
        params={"mu-ems": dict(c=0, scale=0.75), "d-ems": dict(D_s=45, D_b=35, scale=0.6),
                "t-ems": dict(T_s=30, T_b=10, scale=0.6), "m-ems": dict(M=10, scale=0.6)}),
    "example-3": dict(
        channel="proakis-b", field=4, p=9, d_max=60.0, max_iterations=50,
        code_n=224, code_col_weight=3, code_row_weight=14,
        params={"mu-ems": dict(c=0, scale=0.75), "d-ems": dict(D_s=45, D_b=35, scale=0.6),
                "t-ems": dict(T_s=10, T_b=5, scale=0.6), "m-ems": dict(M=10, scale=0.7)}),
}


class ConfigError(ValueError):
    """One or more configuration problems, each tagged with a line number (0 = file level)."""

    def __init__(self, errors, source="<config>"):
        self.errors = list(errors)
        self.source = source
        lines = [f"{source}:{n}: {msg}" if n else f"{source}: {msg}" for n, msg in self.errors]
        super().__init__("\n".join(lines))


@dataclass(frozen=True)
class ExperimentConfig:
    """One simulated series (code, channel, quantizer, schedule) over an Eb/N0 sweep."""

    label: str = ""
    code: str = "random"
    field: int = 4
    code_n: int = 128
    code_col_weight: int = 3
    code_row_weight: int = 12
    code_seed: int = 1
    channel: IsiChannel = dc_field(default_factory=lambda: get_channel("epr4"))
    p: int = 9
    d_max: float | None = None
    detector: str = "max-log-map"
    decoder: str = "mu-ems"
    mode: str = "iterative"
    max_iterations: int = 50
    inner_iterations: int | None = None
    rules: tuple = ()
    scale: float | str = 1.0
    msg_cap: int | None = None
    ebn0_db: tuple = (3.0,)
    max_frames: int = 1_000_000
    max_frame_errors: int = 100
    block_frames: int = 64
    seed: int = 0
    baseline: str = "none"
    text: str = ""

    @property
    def quantizer(self) -> QuantizerConfig:
        d = default_d_max(self.channel, self.field) if self.d_max is None else self.d_max
        return QuantizerConfig(self.p, d)

    @property
    def schedule(self) -> ScheduleConfig:
        rd = dict(self.rules)
        kw = {}
        if self.decoder in _RULE_KEYS:
            kb, ks, make = _RULE_KEYS[self.decoder]
            if kb in rd:
                kw["rule_branch"] = make(rd[kb])
            if ks in rd:
                kw["rule_state"] = make(rd[ks])
        return ScheduleConfig(self.detector, self.decoder, self.mode, self.max_iterations,
                              self.inner_iterations, scale=self.scale, msg_cap=self.msg_cap, **kw)

    @property
    def name(self) -> str:
        if self.label:
            return self.label
        arrow = "->" if self.mode == "once" else "<->"
        return f"{self.detector}{arrow}{self.decoder}"

    @property
    def fingerprint(self) -> str:
        """Short hash of every field that affects results."""
        h = hashlib.sha256()
        for f in fields(self):
            if f.name not in ("text", "label"):
                h.update(f"{f.name}={getattr(self, f.name)!r};".encode())
        return h.hexdigest()[:16]

    def with_schedule(self, detector, decoder, **kw) -> "ExperimentConfig":
        """Copy with a different detector/decoder pair (rule parameters dropped unless given)."""
        return replace(self, detector=detector, decoder=decoder, label=kw.pop("label", ""),
                       rules=kw.pop("rules", ()), scale=kw.pop("scale", 1.0), **kw)


def _to_int(s):
    v = float(s)
    if v != int(v):
        raise ValueError("expected an integer")
    return int(v)


def _to_float(s):
    return float(s)


def _opt(conv):
    return lambda s: None if s.lower() in ("none", "") else conv(s)


def _floats(s):
    out = tuple(float(t) for t in s.split(",") if t.strip())
    if not out:
        raise ValueError("expected at least one value")
    return out


def _scale(s):
    s = s.strip()
    if "/" in s:
        a, b = s.split("/")
        return f"{int(a)}/{int(b)}"
    return float(s)


_PARSERS = {
    "label": str, "code": str, "field": _to_int, "code_n": _to_int,
    "code_col_weight": _to_int, "code_row_weight": _to_int, "code_seed": _to_int,
    "channel": get_channel, "p": _to_int, "d_max": _opt(_to_float),
    "detector": lambda s: s.lower(), "decoder": lambda s: s.lower(),
    "mode": lambda s: s.lower(), "max_iterations": _to_int, "inner_iterations": _opt(_to_int),
    "scale": _scale, "msg_cap": _opt(_to_int), "ebn0_db": _floats, "max_frames": _to_int,
    "max_frame_errors": _to_int, "block_frames": _to_int, "seed": _to_int,
    "baseline": lambda s: s.lower(), "preset": lambda s: s.lower(),
}
for _k in RULE_PARAMS:
    _PARSERS[_k] = _to_float
KEYS = tuple(sorted(_PARSERS))


def parse_config(text: str, source: str = "<config>", **overrides) -> ExperimentConfig:
    """Parse config text; keyword ``overrides`` (already typed) win over the file."""
    errors = []
    values, lines = {}, {}
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            errors.append((n, f"expected 'key = value', got {raw.strip()!r}"))
            continue
        key, val = (t.strip() for t in line.split("=", 1))
        if key not in _PARSERS:
            errors.append((n, f"unknown key {key!r}"))
            continue
        if key in values:
            errors.append((n, f"duplicate key {key!r} (first set on line {lines[key]})"))
            continue
        try:
            values[key] = _PARSERS[key](val)
        except (ValueError, ZeroDivisionError) as exc:
            errors.append((n, f"bad value for {key}: {val!r} ({exc})"))
            continue
        lines[key] = n
    for k, v in overrides.items():
        if v is not None:
            values[k] = v
            lines[k] = 0

    cfg = dict(values)
    preset = cfg.pop("preset", None)
    if preset is not None:
        if preset not in PRESETS:
            errors.append((lines["preset"],
                           f"unknown preset {preset!r}; choose from {sorted(PRESETS)}"))
        else:
            base = dict(PRESETS[preset])
            params = base.pop("params")
            base["channel"] = get_channel(base["channel"])
            dec = cfg.get("decoder", "mu-ems")
            base.update(params.get(dec, {}))
            for k, v in base.items():
                cfg.setdefault(k, v)
    rules = {k: cfg.pop(k) for k in RULE_PARAMS if k in cfg}

    dec = cfg.get("decoder", "mu-ems")
    det = cfg.get("detector")
    if det is None and dec in DECODERS:
        det = {"qspa": "bcjr", "gmlgd": "viterbi"}.get(dec, "max-log-map")
        cfg["detector"] = det
    if dec not in DECODERS:
        errors.append((lines.get("decoder", 0),
                       f"unknown decoder {dec!r}; choose from {DECODERS}"))
    if det not in DETECTORS:
        errors.append((lines.get("detector", 0),
                       f"unknown detector {det!r}; choose from {DETECTORS}"))
    allowed = _RULE_KEYS.get(dec, (None, None, None))[:2]
    for k in list(rules):
        if k not in allowed:
            # parameters of other decoders may come from a preset; only explicit ones are errors
            if k in lines:
                errors.append((lines[k], f"{k} does not apply to decoder {dec}"))
            rules.pop(k)
    if dec == "m-ems":
        for k in ("M", "M_s"):
            if k in rules and (rules[k] < 1 or rules[k] != int(rules[k])):
                errors.append((lines.get(k, 0), f"{k} must be a positive integer"))
    if dec in ("m-ems", "t-ems", "d-ems") and not rules:
        kb, ks, _ = _RULE_KEYS[dec]
        errors.append((lines.get("decoder", 0), f"decoder {dec} needs {kb} and/or {ks}"))
    cfg["rules"] = tuple(sorted(rules.items()))
    cfg["text"] = text

    checks = (("field", lambda v: not 1 <= v <= 8, "field must be m in 1..8"),
              ("max_frames", lambda v: v < 1, "frame budget must be positive"),
              ("max_frame_errors", lambda v: v < 1, "error budget must be positive"),
              ("block_frames", lambda v: v < 1, "block_frames must be positive"),
              ("max_iterations", lambda v: v < 1, "max_iterations must be >= 1"),
              ("p", lambda v: v < 1, "p must be >= 1"),
              ("d_max", lambda v: v is not None and not v > 0, "d_max must be positive"),
              ("ebn0_db", lambda v: any(math.isnan(x) for x in v), "Eb/N0 values must be numbers"))
    for key, bad, msg in checks:
        if key in cfg and bad(cfg[key]):
            errors.append((lines.get(key, 0), msg))
    if cfg.get("baseline", "none") not in ("none", "bcjr-qspa"):
        errors.append((lines.get("baseline", 0), "baseline must be 'none' or 'bcjr-qspa'"))
    if cfg.get("code", "random") != "random" and not Path(cfg["code"]).exists():
        errors.append((lines.get("code", 0), f"alist file {cfg['code']!r} not found"))

    out = None
    if not errors:
        try:
            out = ExperimentConfig(**cfg)
            out.schedule  # noqa: B018 -- validates the detector/decoder combination
            out.quantizer  # noqa: B018
        except ValueError as exc:
            keys = [k for k in ("decoder", "detector", "mode") if k in lines]
            errors.append((lines[keys[0]] if keys else 0, str(exc)))
    if errors:
        raise ConfigError(sorted(errors), source)
    return out


def load_config(path, **overrides) -> ExperimentConfig:
    """Read and parse a config file."""
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError([(0, f"cannot read config: {exc.strerror}")], str(p)) from None
    return parse_config(text, str(p), **overrides)
