"""
Per-frame joint detection/decoding loops.

Three loops share the same edge layout as :mod:`nbisi.decode`:

* integer max-log-MAP with an X-EMS decoder (iterative or detect-once),
* floating-point BCJR with QSPA (the benchmark),
* integer Viterbi with GMLGD votes (hard decisions only).

Each loop is a single njit kernel so a frame never bounces back to Python.
After every detection the current decisions are tested against the parity
checks before any check-node work is spent; a frame whose detector output is
already a codeword therefore exits in iteration 1 with no decoder sweeps.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from numba import njit

from . import _ops
from .code import SparseParityMatrix, is_majority_logic_decodable
from .decode import (NEG, TruncationRule, _check_to_var, _cnode_ems_frame, _cnode_qspa_frame,
                     _gmlgd_sigma, _gmlgd_vote, _syndrome, _syndrome_zero, _vnode_decide_frame,
                     _vnode_to_check, as_fraction)
from .detect import _bcjr, _max_log_map, _viterbi
from .metrics import QuantizerConfig, channel_possibilities, squared_distances

DETECTORS = ("viterbi", "max-log-map", "bcjr")
DECODERS = ("qspa", "ems", "m-ems", "t-ems", "d-ems", "mu-ems", "gmlgd")
EMS_DECODERS = ("ems", "m-ems", "t-ems", "d-ems", "mu-ems")
PMF_FLOOR = 1e-30


@dataclass(frozen=True)
class ScheduleConfig:
    """Which detector/decoder pair runs, and how the two alternate.

    ``mode`` is ``iterative`` (detector and decoder alternate up to
    ``max_iterations`` times) or ``once`` (one detection, then up to
    ``inner_iterations`` decoder sweeps). ``msg_cap`` bounds the spread
    (max - min) of every integer message crossing the detector/decoder
    boundary and of every check-to-variable message; ``None`` picks
    ``2^p - 1`` from the quantizer.

    The truncation rules must match the decoder name (``t-ems`` takes T
    rules, and so on; a rule may also be ``full``). ``mu-ems`` with no rule
    given truncates branches with offset c = 0.
    """

    detector: str = "max-log-map"
    decoder: str = "mu-ems"
    mode: str = "iterative"
    max_iterations: int = 50
    inner_iterations: int | None = None
    rule_state: TruncationRule = field(default_factory=TruncationRule)
    rule_branch: TruncationRule = field(default_factory=TruncationRule)
    scale: Fraction | float | int = 1
    msg_cap: int | None = None

    def __post_init__(self):
        det, dec, mode = self.detector.lower(), self.decoder.lower(), self.mode.lower()
        if det not in DETECTORS:
            raise ValueError(f"unknown detector {self.detector!r}; choose from {DETECTORS}")
        if dec not in DECODERS:
            raise ValueError(f"unknown decoder {self.decoder!r}; choose from {DECODERS}")
        if mode not in ("iterative", "once"):
            raise ValueError("mode must be 'iterative' or 'once'")
        if (dec == "gmlgd") != (det == "viterbi"):
            raise ValueError("gmlgd pairs only with viterbi detection (and vice versa)")
        if dec == "qspa" and det != "bcjr":
            raise ValueError("qspa runs only behind the bcjr detector")
        if dec in EMS_DECODERS and det != "max-log-map":
            raise ValueError("ems decoders run only behind the max-log-map detector")
        if mode == "once" and dec == "gmlgd":
            raise ValueError("the viterbi/gmlgd loop has no detect-once form")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.inner_iterations is not None and self.inner_iterations < 0:
            raise ValueError("inner_iterations must be >= 0")
        if self.msg_cap is not None and self.msg_cap < 1:
            raise ValueError("msg_cap must be positive")
        kinds = {"ems": None, "m-ems": "m", "t-ems": "t", "d-ems": "d", "mu-ems": "mu"}
        if dec in EMS_DECODERS:
            rules = (self.rule_state, self.rule_branch)
            want = kinds[dec]
            if any(r.kind not in ("full", want) for r in rules):
                raise ValueError(f"{dec} takes only {want or 'full'} truncation rules")
            if want is not None and all(r.kind == "full" for r in rules):
                if want != "mu":
                    raise ValueError(f"{dec} needs a {want} parameter for states or branches")
                object.__setattr__(self, "rule_branch", TruncationRule.mu(0))
        object.__setattr__(self, "detector", det)
        object.__setattr__(self, "decoder", dec)
        object.__setattr__(self, "mode", mode)
        object.__setattr__(self, "scale", as_fraction(self.scale))

    @property
    def inner(self) -> int:
        return self.max_iterations if self.inner_iterations is None else self.inner_iterations

    def cap(self, quantizer: QuantizerConfig) -> int:
        return quantizer.top if self.msg_cap is None else int(self.msg_cap)


@dataclass
class FrameResult:
    """Outcome of one frame.

    ``iterations`` counts outer detector/decoder iterations in the iterative
    schedules and decoder sweeps (at least 1) in the detect-once schedule;
    ``sweeps`` is the number of check-node passes actually performed.
    ``counts`` is the (2, 7) operation-count array of :mod:`nbisi._ops`.
    """

    vhat: np.ndarray
    converged: bool
    iterations: int
    sweeps: int
    counts: np.ndarray


# ---------------------------------------------------------------- kernels


@njit(cache=True)
def _spread_cap(M, cap):
    """Row-wise: values below (max - cap) are raised to it, then min is moved to 0."""
    for r in range(M.shape[0]):
        top = M[r, 0]
        for x in range(M.shape[1]):
            if M[r, x] > top:
                top = M[r, x]
        lo = top - cap
        for x in range(M.shape[1]):
            if M[r, x] < lo:
                M[r, x] = lo
        mn = M[r].min()
        for x in range(M.shape[1]):
            M[r, x] -= mn


@njit(cache=True)
def _soft_ems_frame(chan, next_state, row_ptr, edge_col, edge_val, col_ptr, col_edges, mul,
                    outer, inner, ks, ps, kb, pb, num, den, cap, vhat, counts, perturb):
    N, nb = chan.shape
    q = next_state.shape[1]
    delta = edge_col.size
    prior = np.zeros((N, q), dtype=np.int64)
    det = np.empty((N, q), dtype=np.int64)
    c2v = np.zeros((delta, q), dtype=np.int64)
    v2c = np.empty((delta, q), dtype=np.int64)
    c2v_chk = np.empty((delta, q), dtype=np.int64)
    fb = np.empty((N, q), dtype=np.int64)
    sweeps = 0
    for l in range(outer):
        _max_log_map(chan, prior, next_state, det, counts)
        _spread_cap(det, cap)
        _vnode_decide_frame(det, c2v, col_ptr, col_edges, vhat, fb, counts)
        if l == 0 and perturb[0] >= 0:
            vhat[perturb[0]] ^= perturb[1]
        if _syndrome_zero(vhat, row_ptr, edge_col, edge_val, mul, counts):
            return True, l + 1, sweeps
        for _ in range(inner):
            _vnode_to_check(det, c2v, col_ptr, col_edges, edge_val, mul, v2c, counts)
            _cnode_ems_frame(v2c, row_ptr, c2v_chk, ks, ps, kb, pb, num, den, counts)
            _check_to_var(c2v_chk, edge_val, mul, c2v, 0)
            _spread_cap(c2v, cap)
            sweeps += 1
            _vnode_decide_frame(det, c2v, col_ptr, col_edges, vhat, fb, counts)
            if _syndrome_zero(vhat, row_ptr, edge_col, edge_val, mul, counts):
                return True, (l + 1 if outer > 1 else max(sweeps, 1)), sweeps
        _spread_cap(fb, cap)
        prior[:, :] = fb
    return False, (outer if outer > 1 else max(sweeps, 1)), sweeps


@njit(cache=True)
def _pmf_rows(M):
    for r in range(M.shape[0]):
        s = 0.0
        for x in range(M.shape[1]):
            if M[r, x] < PMF_FLOOR:
                M[r, x] = PMF_FLOOR
            s += M[r, x]
        for x in range(M.shape[1]):
            M[r, x] /= s


@njit(cache=True)
def _qspa_vnode(ext, c2v, col_ptr, col_edges, edge_val, mul, v2c_chk, vhat, fb, send, counts):
    """Decisions, V->T pmfs and (if ``send``) permuted V->C pmfs."""
    N, q = ext.shape
    tot = np.empty(q)
    for j in range(N):
        for x in range(q):
            tot[x] = 1.0
        for t in range(col_ptr[j], col_ptr[j + 1]):
            e = col_edges[t]
            for x in range(q):
                tot[x] *= c2v[e, x]
        best = 0
        s = 0.0
        for x in range(q):
            if tot[x] * ext[j, x] > tot[best] * ext[j, best]:
                best = x
            s += tot[x]
        vhat[j] = best
        for x in range(q):
            fb[j, x] = tot[x] / s
        if send:
            for t in range(col_ptr[j], col_ptr[j + 1]):
                e = col_edges[t]
                h = edge_val[e]
                s = 0.0
                for x in range(q):
                    v = ext[j, x] * tot[x] / c2v[e, x]
                    if v < PMF_FLOOR:
                        v = PMF_FLOOR
                    v2c_chk[e, mul[h, x]] = v
                    s += v
                for x in range(q):
                    v2c_chk[e, mul[h, x]] /= s
    if send:
        delta = col_edges.size
        counts[_ops.DECODER, _ops.REAL_MUL] += 2 * q * delta
        counts[_ops.DECODER, _ops.REAL_DIV] += 2 * q * delta
        counts[_ops.DECODER, _ops.FIELD_OP] += q * delta


@njit(cache=True)
def _soft_qspa_frame(dist, next_state, inv2s2, row_ptr, edge_col, edge_val, col_ptr, col_edges,
                     mul, outer, inner, vhat, counts):
    N, nb = dist.shape
    q = next_state.shape[1]
    delta = edge_col.size
    logprior = np.full((N, q), -np.log(q))
    app = np.empty((N, q))
    ext = np.empty((N, q))
    c2v = np.ones((delta, q))
    v2c = np.empty((delta, q))
    c2v_chk = np.empty((delta, q))
    fb = np.empty((N, q))
    dummy = np.zeros((2, counts.shape[1]), dtype=np.int64)
    sweeps = 0
    for l in range(outer):
        _bcjr(dist, logprior, next_state, inv2s2, app, ext, counts)
        _pmf_rows(ext)
        _qspa_vnode(ext, c2v, col_ptr, col_edges, edge_val, mul, v2c, vhat, fb, False, counts)
        if _syndrome_zero(vhat, row_ptr, edge_col, edge_val, mul, dummy):
            return True, l + 1, sweeps
        for _ in range(inner):
            _qspa_vnode(ext, c2v, col_ptr, col_edges, edge_val, mul, v2c, vhat, fb, True, counts)
            _cnode_qspa_frame(v2c, row_ptr, c2v_chk, counts)
            for e in range(delta):
                h = edge_val[e]
                for x in range(q):
                    c2v[e, x] = c2v_chk[e, mul[h, x]]
            _pmf_rows(c2v)
            sweeps += 1
            _qspa_vnode(ext, c2v, col_ptr, col_edges, edge_val, mul, v2c, vhat, fb, False, counts)
            if _syndrome_zero(vhat, row_ptr, edge_col, edge_val, mul, dummy):
                return True, (l + 1 if outer > 1 else max(sweeps, 1)), sweeps
        _pmf_rows(fb)
        for j in range(N):
            for x in range(q):
                logprior[j, x] = np.log(fb[j, x])
    return False, (outer if outer > 1 else max(sweeps, 1)), sweeps


@njit(cache=True)
def _hard_frame(chan, next_state, row_ptr, edge_row, edge_col, edge_val, mul, inv, outer, vhat,
                counts, perturb):
    N, nb = chan.shape
    q = next_state.shape[1]
    delta = edge_col.size
    M = row_ptr.size - 1
    counters = np.zeros((N, q), dtype=np.int64)
    s = np.empty(M, dtype=np.int64)
    sigma = np.empty(delta, dtype=np.int64)
    for l in range(outer):
        _viterbi(chan, counters, next_state, vhat, counts)
        # adding the counters to the branch metrics is charged to the decoder
        counts[_ops.DECODER, _ops.INT_ADD] += N * nb
        if l == 0 and perturb[0] >= 0:
            vhat[perturb[0]] ^= perturb[1]
        _syndrome(vhat, row_ptr, edge_col, edge_val, mul, s)
        counts[_ops.DECODER, _ops.FIELD_OP] += 2 * q * delta
        done = True
        for i in range(M):
            if s[i] != 0:
                done = False
                break
        if done:
            return True, l + 1
        _gmlgd_sigma(vhat, s, edge_row, edge_col, edge_val, mul, inv, sigma)
        _gmlgd_vote(sigma, edge_col, counters)
        counts[_ops.DECODER, _ops.FIELD_OP] += 2 * q * delta
        counts[_ops.DECODER, _ops.INT_ADD] += delta
    return False, outer


# ---------------------------------------------------------------- wrappers


def _new_counts():
    return np.zeros((2, _ops.N_SLOTS), dtype=np.int64)


def _perturb(inject):
    if inject is None:
        return np.array([-1, 0], dtype=np.int64)
    j, e = inject
    return np.array([int(j), int(e)], dtype=np.int64)


def _check_frame(y, H: SparseParityMatrix, trellis):
    if H.q != trellis.q:
        raise ValueError(f"code is over GF({H.q}) but the trellis carries {trellis.q}-ary symbols")
    y = np.ascontiguousarray(y, dtype=np.float64)
    if y.size != H.N * trellis.m:
        raise ValueError(f"received length {y.size} != N*m = {H.N * trellis.m}")
    return y


def run_soft_joint(y, H: SparseParityMatrix, trellis, quantizer: QuantizerConfig,
                   schedule: ScheduleConfig, sigma: float | None = None, counts=None,
                   inject=None) -> FrameResult:
    """Max-log-MAP/X-EMS or BCJR/QSPA decoding of one received frame.

    ``sigma`` is required by the BCJR detector and ignored otherwise.
    ``inject = (j, e)`` adds ``e`` to the first decision on symbol ``j``
    (fault injection for tests).
    """
    if schedule.decoder == "gmlgd":
        raise ValueError("use run_hard_joint for the viterbi/gmlgd loop")
    y = _check_frame(y, H, trellis)
    c = _new_counts() if counts is None else counts
    vhat = np.empty(H.N, dtype=np.int64)
    gf = H.field
    if schedule.mode == "once":
        outer, inner = 1, schedule.inner
    else:
        outer, inner = schedule.max_iterations, 1
    if schedule.detector == "bcjr":
        if sigma is None or not sigma > 0:
            raise ValueError("the bcjr detector needs the noise level sigma > 0")
        if inject is not None:
            raise ValueError("fault injection is only wired into the integer loops")
        conv, it, sw = _soft_qspa_frame(
            squared_distances(y, trellis), trellis.next_state, 1.0 / (2.0 * sigma**2),
            H.row_ptr, H.edge_col, H.edge_val, H.col_ptr, H.col_edges, gf.mul_table,
            outer, inner, vhat, c)
    else:
        chan = channel_possibilities(y, trellis, quantizer)
        ks, ps = schedule.rule_state.code
        kb, pb = schedule.rule_branch.code
        f = schedule.scale
        conv, it, sw = _soft_ems_frame(
            chan, trellis.next_state, H.row_ptr, H.edge_col, H.edge_val, H.col_ptr,
            H.col_edges, gf.mul_table, outer, inner, ks, ps, kb, pb, f.numerator,
            f.denominator, schedule.cap(quantizer), vhat, c, _perturb(inject))
    return FrameResult(vhat, bool(conv), int(it), int(sw), c)


def run_once_schedule(y, H, trellis, quantizer, schedule: ScheduleConfig, inner_iters=None,
                      sigma=None, counts=None) -> FrameResult:
    """One detection pass followed by up to ``inner_iters`` decoder sweeps."""
    from dataclasses import replace

    sched = replace(schedule, mode="once",
                    inner_iterations=schedule.inner if inner_iters is None else inner_iters)
    return run_soft_joint(y, H, trellis, quantizer, sched, sigma=sigma, counts=counts)


def run_hard_joint(y, H: SparseParityMatrix, trellis, quantizer: QuantizerConfig,
                   schedule: ScheduleConfig, counts=None, inject=None,
                   check_structure=True) -> FrameResult:
    """Viterbi detection with GMLGD vote counters fed back as symbol priors."""
    if schedule.decoder != "gmlgd":
        raise ValueError("run_hard_joint needs decoder = gmlgd")
    if check_structure and not is_majority_logic_decodable(H):
        raise ValueError("GMLGD needs a majority-logic decodable parity-check matrix")
    y = _check_frame(y, H, trellis)
    c = _new_counts() if counts is None else counts
    vhat = np.empty(H.N, dtype=np.int64)
    gf = H.field
    chan = channel_possibilities(y, trellis, quantizer)
    conv, it = _hard_frame(chan, trellis.next_state, H.row_ptr, H.edge_row, H.edge_col,
                           H.edge_val, gf.mul_table, gf.inv_table, schedule.max_iterations,
                           vhat, c, _perturb(inject))
    return FrameResult(vhat, bool(conv), int(it), int(it) - 1 if conv else int(it), c)


def decode_frame(y, H, trellis, quantizer, schedule, sigma=None, counts=None) -> FrameResult:
    """Dispatch to the loop matching ``schedule``."""
    if schedule.decoder == "gmlgd":
        return run_hard_joint(y, H, trellis, quantizer, schedule, counts=counts,
                              check_structure=False)
    return run_soft_joint(y, H, trellis, quantizer, schedule, sigma=sigma, counts=counts)


__all__ = ["ScheduleConfig", "FrameResult", "run_soft_joint", "run_hard_joint",
           "run_once_schedule", "decode_frame", "NEG"]
