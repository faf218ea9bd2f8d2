"""
Decoder-side node updates on the normal graph of a nonbinary LDPC code.

Messages live on the edges of ``H`` in the row-major edge order of
:class:`~nbisi.code.SparseParityMatrix`; a frame's messages are (delta, q)
integer arrays (possibility domain) or float arrays (QSPA).

The check-node update of the X-EMS family is a forward/backward dynamic
program over the check's edges. Incoming (branch) messages are truncated by
the branch rule before use; every state vector produced by a merge is
truncated by the state rule before it is merged again. State values are
plain sums of min-normalized inputs, so they stay on the same absolute scale
as the floor value 0. A merge visits each
pair of retained values once; these visits are the "configurations" counted
in the complexity figures. Output values that no retained configuration can
reach get the floor value 0.

The small per-node functions at the bottom of the module are thin wrappers
around the same njit kernels used by the per-frame loops in :mod:`nbisi.joint`.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from numba import njit

from . import _ops

NEG = -(1 << 52)
HALF = NEG // 2

# truncation kinds (kernel encoding)
FULL, KIND_M, KIND_T, KIND_D, KIND_MU = 0, 1, 2, 3, 4
_KINDS = {"full": FULL, "m": KIND_M, "t": KIND_T, "d": KIND_D, "mu": KIND_MU}


@dataclass(frozen=True)
class TruncationRule:
    """Support-selection rule F for one message vector.

    ``kind`` is one of ``full``, ``m``, ``t``, ``d``, ``mu``; ``param`` is M,
    T, D or the offset c respectively. The largest entry is always kept.
    """

    kind: str = "full"
    param: float = 0.0

    def __post_init__(self):
        kind = self.kind.lower()
        if kind not in _KINDS:
            raise ValueError(f"unknown truncation rule {self.kind!r}")
        object.__setattr__(self, "kind", kind)
        if kind == "m" and (self.param < 1 or int(self.param) != self.param):
            raise ValueError("M must be a positive integer")

    @classmethod
    def M(cls, M):
        return cls("m", M)

    @classmethod
    def T(cls, T):
        return cls("t", T)

    @classmethod
    def D(cls, D):
        return cls("d", D)

    @classmethod
    def mu(cls, c):
        return cls("mu", c)

    @classmethod
    def full(cls):
        return cls("full", 0.0)

    @property
    def code(self):
        return _KINDS[self.kind], float(self.param)


def as_fraction(scale) -> Fraction:
    """Scaling factor as an exact fraction; floats are read as short decimals."""
    if isinstance(scale, tuple):
        f = Fraction(int(scale[0]), int(scale[1]))
    else:
        f = Fraction(str(scale)) if isinstance(scale, float) else Fraction(scale)
    if f <= 0:
        raise ValueError("scale must be positive")
    return f


def _new_counts():
    return np.zeros((2, _ops.N_SLOTS), dtype=np.int64)


# ---------------------------------------------------------------- kernels


@njit(cache=True)
def _select(vals, reach, kind, param, sel, taken, counts):
    """Write the retained field values (ascending) into ``sel``; return how many."""
    q = vals.size
    best = -1
    for y in range(q):
        if reach[y] and (best < 0 or vals[y] > vals[best]):
            best = y
    counts[_ops.DECODER, _ops.INT_CMP] += q
    n = 0
    thr = 0.0
    if kind == KIND_M:
        M = int(param)
        for y in range(q):
            taken[y] = False
        for _ in range(M):
            b = -1
            for y in range(q):
                if reach[y] and not taken[y] and (b < 0 or vals[y] > vals[b]):
                    b = y
            if b < 0:
                break
            taken[b] = True
        counts[_ops.DECODER, _ops.INT_CMP] += q * M
        for y in range(q):
            if taken[y]:
                sel[n] = y
                n += 1
        return n
    if kind == KIND_MU:
        tot = 0
        for y in range(q):
            if reach[y]:
                tot += vals[y]
        counts[_ops.DECODER, _ops.INT_ADD] += q
        # L(y) >= mean - c  <=>  q L(y) >= sum - q c
        thr = tot - q * param
    for y in range(q):
        if not reach[y]:
            continue
        if kind == FULL:
            keep = True
        elif kind == KIND_T:
            keep = vals[y] >= param
        elif kind == KIND_D:
            keep = vals[best] - vals[y] <= param
        else:
            keep = q * vals[y] >= thr
        if keep or y == best:
            sel[n] = y
            n += 1
    if kind != FULL:
        counts[_ops.DECODER, _ops.INT_CMP] += q
    return n


@njit(cache=True)
def _merge(av, asel, na, bdense, out):
    """out(y) = max over retained a, b with a + b = y of av(a) + bv(b); below HALF if none.

    Each of the na * nb retained pairs is one configuration; the caller charges them.

    ``bdense`` holds bv on its retained support and NEG elsewhere, which lets the inner
    loop run over outputs without a read-modify-write chain.
    """
    q = out.size
    for y in range(q):
        out[y] = NEG
    for i in range(na):
        a = asel[i]
        x = av[a]
        for y in range(q):
            out[y] = max(out[y], x + bdense[a ^ y])


@njit(cache=True)
def _restrict(src, sel, n, dst):
    for y in range(dst.size):
        dst[y] = NEG
    for i in range(n):
        dst[sel[i]] = src[sel[i]]


@njit(cache=True)
def _finish(raw, num, den, dst):
    """Floor unreachable values at 0, scale, renormalize to min 0."""
    lo = -NEG
    for y in range(raw.size):
        x = raw[y] if raw[y] > HALF else 0
        x = (2 * x * num + den) // (2 * den)
        dst[y] = x
        lo = min(lo, x)
    for y in range(raw.size):
        dst[y] -= lo


@njit(cache=True)
def _ems_workspace(dmax, q):
    return (np.empty((dmax, q), dtype=np.int64),   # branch supports
            np.empty((dmax, q), dtype=np.int64),   # branch messages restricted to support
            np.empty((dmax, q), dtype=np.int64),   # forward states
            np.empty((dmax, q), dtype=np.int64),   # backward states
            np.empty((dmax, q), dtype=np.int64),   # backward states restricted to support
            np.empty((dmax, q), dtype=np.int64),   # forward supports
            np.empty((dmax, q), dtype=np.int64),   # backward supports
            np.empty((3, dmax), dtype=np.int64),   # support sizes
            np.empty(q, dtype=np.int64),           # scratch output
            np.empty(q, dtype=np.bool_),           # reachability
            np.ones(q, dtype=np.bool_),            # all-true mask
            np.empty(q, dtype=np.bool_))           # M-rule scratch


@njit(cache=True)
def _cnode_ems_check(L, out, kind_s, param_s, kind_b, param_b, num, den, counts, ws):
    """X-EMS update of one check; L and out are (d, q) with L in the check domain."""
    bsel, Lr, alpha, beta, betar, asel, bs, sizes, raw, reach, all_reach, taken = ws
    d, q = L.shape
    nbr = sizes[0]
    na = sizes[1]
    nbs = sizes[2]
    n = 0
    for k in range(d):
        nbr[k] = _select(L[k], all_reach, kind_b, param_b, bsel[k], taken, counts)
        _restrict(L[k], bsel[k], nbr[k], Lr[k])

    alpha[0, :] = Lr[0]
    asel[0, : nbr[0]] = bsel[0, : nbr[0]]
    na[0] = nbr[0]
    for k in range(1, d - 1):
        _merge(alpha[k - 1], asel[k - 1], na[k - 1], Lr[k], alpha[k])
        n += na[k - 1] * nbr[k]
        if k < d - 2:
            for y in range(q):
                reach[y] = alpha[k, y] > HALF
            na[k] = _select(alpha[k], reach, kind_s, param_s, asel[k], taken, counts)

    beta[d - 1, :] = Lr[d - 1]
    betar[d - 1, :] = Lr[d - 1]
    bs[d - 1, : nbr[d - 1]] = bsel[d - 1, : nbr[d - 1]]
    nbs[d - 1] = nbr[d - 1]
    for k in range(d - 2, 0, -1):
        _merge(beta[k + 1], bs[k + 1], nbs[k + 1], Lr[k], beta[k])
        n += nbs[k + 1] * nbr[k]
        if k > 1:
            for y in range(q):
                reach[y] = beta[k, y] > HALF
            nbs[k] = _select(beta[k], reach, kind_s, param_s, bs[k], taken, counts)
            _restrict(beta[k], bs[k], nbs[k], betar[k])

    _finish(beta[1], num, den, out[0])
    _finish(alpha[d - 2], num, den, out[d - 1])
    for e in range(1, d - 1):
        _merge(alpha[e - 1], asel[e - 1], na[e - 1], betar[e + 1], raw)
        n += na[e - 1] * nbs[e + 1]
        _finish(raw, num, den, out[e])
    # one addition, one comparison and one field addition per configuration
    counts[_ops.DECODER, _ops.INT_ADD] += n
    counts[_ops.DECODER, _ops.INT_CMP] += n
    counts[_ops.DECODER, _ops.FIELD_OP] += n
    counts[_ops.DECODER, _ops.CONFIGS] += n


@njit(cache=True)
def _cnode_ems_frame(Lc, row_ptr, out, kind_s, param_s, kind_b, param_b, num, den, counts):
    dmax = 2
    for i in range(row_ptr.size - 1):
        dmax = max(dmax, row_ptr[i + 1] - row_ptr[i])
    ws = _ems_workspace(dmax, Lc.shape[1])
    for i in range(row_ptr.size - 1):
        a, b = row_ptr[i], row_ptr[i + 1]
        _cnode_ems_check(Lc[a:b], out[a:b], kind_s, param_s, kind_b, param_b, num, den, counts,
                         ws)


@njit(cache=True)
def _xor_conv(a, b, out):
    q = a.size
    for y in range(q):
        acc = 0.0
        for x in range(q):
            acc += a[x] * b[x ^ y]
        out[y] = acc


@njit(cache=True)
def _normalize(p):
    s = p.sum()
    for y in range(p.size):
        p[y] /= s


@njit(cache=True)
def _cnode_qspa_check(P, out):
    d, q = P.shape
    f = np.empty((d, q))
    g = np.empty((d, q))
    f[0] = P[0]
    for k in range(1, d - 1):
        _xor_conv(f[k - 1], P[k], f[k])
        _normalize(f[k])
    g[d - 1] = P[d - 1]
    for k in range(d - 2, 0, -1):
        _xor_conv(g[k + 1], P[k], g[k])
        _normalize(g[k])
    out[0] = g[1]
    out[d - 1] = f[d - 2]
    for e in range(1, d - 1):
        _xor_conv(f[e - 1], g[e + 1], out[e])
    for e in range(d):
        _normalize(out[e])


@njit(cache=True)
def _cnode_qspa_frame(Pc, row_ptr, out, counts):
    q = Pc.shape[1]
    for i in range(row_ptr.size - 1):
        a, b = row_ptr[i], row_ptr[i + 1]
        _cnode_qspa_check(Pc[a:b], out[a:b])
    counts[_ops.DECODER, _ops.REAL_ADD] += 2 * q * q * Pc.shape[0]


@njit(cache=True)
def _vnode_to_check(det, c2v, col_ptr, col_edges, edge_val, mul, out, counts):
    """V->H sums excluding each edge, min-normalized, then permuted y = h x."""
    N, q = det.shape
    tot = np.empty(q, dtype=np.int64)
    for j in range(N):
        for x in range(q):
            tot[x] = det[j, x]
        for t in range(col_ptr[j], col_ptr[j + 1]):
            e = col_edges[t]
            for x in range(q):
                tot[x] += c2v[e, x]
        for t in range(col_ptr[j], col_ptr[j + 1]):
            e = col_edges[t]
            h = edge_val[e]
            lo = -NEG
            for x in range(q):
                v = tot[x] - c2v[e, x]
                if v < lo:
                    lo = v
            for x in range(q):
                out[e, mul[h, x]] = tot[x] - c2v[e, x] - lo
    delta = col_edges.size
    counts[_ops.DECODER, _ops.INT_ADD] += q * delta
    counts[_ops.DECODER, _ops.FIELD_OP] += q * delta


@njit(cache=True)
def _check_to_var(c2v_chk, edge_val, mul, out, cap):
    """Inverse permutation x = h^{-1} y, with optional saturation at ``cap``."""
    delta, q = c2v_chk.shape
    for e in range(delta):
        h = edge_val[e]
        for x in range(q):
            v = c2v_chk[e, mul[h, x]]
            out[e, x] = cap if (cap > 0 and v > cap) else v


@njit(cache=True)
def _vnode_decide_frame(det, c2v, col_ptr, col_edges, vhat, feedback, counts):
    """Decisions from det + all check messages; feedback = the check sum, min 0."""
    N, q = det.shape
    tot = np.empty(q, dtype=np.int64)
    for j in range(N):
        for x in range(q):
            tot[x] = 0
        for t in range(col_ptr[j], col_ptr[j + 1]):
            e = col_edges[t]
            for x in range(q):
                tot[x] += c2v[e, x]
        best = 0
        lo = tot[0]
        for x in range(q):
            v = tot[x] + det[j, x]
            if v > tot[best] + det[j, best]:
                best = x
            if tot[x] < lo:
                lo = tot[x]
        vhat[j] = best
        for x in range(q):
            feedback[j, x] = tot[x] - lo
    counts[_ops.DECODER, _ops.INT_ADD] += q * col_edges.size


@njit(cache=True)
def _syndrome_zero(vhat, row_ptr, edge_col, edge_val, mul, counts):
    for i in range(row_ptr.size - 1):
        s = 0
        for e in range(row_ptr[i], row_ptr[i + 1]):
            s ^= mul[edge_val[e], vhat[edge_col[e]]]
        if s != 0:
            counts[_ops.DECODER, _ops.FIELD_OP] += 2 * row_ptr[i + 1]
            return False
    counts[_ops.DECODER, _ops.FIELD_OP] += 2 * edge_col.size
    return True


@njit(cache=True)
def _syndrome(vhat, row_ptr, edge_col, edge_val, mul, s):
    for i in range(row_ptr.size - 1):
        acc = 0
        for e in range(row_ptr[i], row_ptr[i + 1]):
            acc ^= mul[edge_val[e], vhat[edge_col[e]]]
        s[i] = acc


@njit(cache=True)
def _gmlgd_sigma(vhat, s, edge_row, edge_col, edge_val, mul, inv, sigma):
    for e in range(edge_row.size):
        sigma[e] = mul[inv[edge_val[e]], s[edge_row[e]]] ^ vhat[edge_col[e]]


@njit(cache=True)
def _gmlgd_vote(sigma, edge_col, counters):
    for e in range(sigma.size):
        counters[edge_col[e], sigma[e]] += 1


# ---------------------------------------------------------- node-level API


def truncate(msg, rule: TruncationRule, counts=None) -> np.ndarray:
    """Retained support F of a possibility vector, as ascending field values.

    Examples
    --------
    >>> truncate(np.array([10, 2, 0, 4]), TruncationRule.mu(1)).tolist()
    [0, 3]
    """
    msg = np.ascontiguousarray(msg, dtype=np.int64)
    sel = np.empty(msg.size, dtype=np.int64)
    kind, param = rule.code
    n = _select(msg, np.ones(msg.size, dtype=np.bool_), kind, param, sel,
                np.empty(msg.size, dtype=np.bool_), _new_counts() if counts is None else counts)
    return sel[:n].copy()


def mu_threshold(msg, c) -> float:
    """Mean of the vector minus the offset c."""
    return float(np.mean(msg)) - c


def vnode_to_hnode(det_msg, incoming, i) -> np.ndarray:
    """Detector message plus every check message except row ``i``, min 0."""
    incoming = np.asarray(incoming, dtype=np.int64).reshape(-1, np.size(det_msg))
    out = np.asarray(det_msg, dtype=np.int64) + incoming.sum(axis=0) - incoming[i]
    return out - out.min()


def permute_to_check(msg, h, field) -> np.ndarray:
    """L_Y(y) = L_X(h^{-1} y)."""
    if h == 0:
        raise ValueError("h must be nonzero")
    msg = np.asarray(msg)
    out = np.empty_like(msg)
    out[field.mul_table[h, np.arange(field.q)]] = msg
    return out


def permute_to_variable(msg, h, field) -> np.ndarray:
    """L_X(x) = L_Y(h x)."""
    if h == 0:
        raise ValueError("h must be nonzero")
    return np.asarray(msg)[field.mul_table[h, np.arange(field.q)]]


def cnode_ems(msgs, rule_state: TruncationRule = TruncationRule(),
              rule_branch: TruncationRule = TruncationRule(), scale=1, counts=None):
    """Outgoing X-EMS messages of one check (check-domain vectors, one row per edge)."""
    L = np.ascontiguousarray(msgs, dtype=np.int64)
    if L.ndim != 2 or L.shape[0] < 2:
        raise ValueError("check degree must be at least 2")
    f = as_fraction(scale)
    out = np.empty_like(L)
    ks, ps = rule_state.code
    kb, pb = rule_branch.code
    _cnode_ems_frame(L, np.array([0, L.shape[0]]), out, ks, ps, kb, pb, f.numerator,
                     f.denominator, _new_counts() if counts is None else counts)
    return out


def cnode_qspa(pmfs, counts=None) -> np.ndarray:
    """Sum-product check update over (F_q, +); rows of the result sum to 1."""
    P = np.ascontiguousarray(pmfs, dtype=np.float64)
    if P.ndim != 2 or P.shape[0] < 2:
        raise ValueError("check degree must be at least 2")
    out = np.empty_like(P)
    _cnode_qspa_frame(P, np.array([0, P.shape[0]]), out,
                      _new_counts() if counts is None else counts)
    return out


def vnode_decide(det_msg, check_msgs):
    """(total L_V, hard decision); ties go to the smallest field value."""
    total = np.asarray(det_msg, dtype=np.int64) + np.asarray(check_msgs, dtype=np.int64).reshape(
        -1, np.size(det_msg)).sum(axis=0)
    return total, int(np.argmax(total))


def vnode_to_tnode(total, det_msg) -> np.ndarray:
    out = np.asarray(total, dtype=np.int64) - np.asarray(det_msg, dtype=np.int64)
    return out - out.min()


def gmlgd_extrinsic(H, vhat, s) -> np.ndarray:
    """Votes sigma_{i->j} = h_ij^{-1} s_i + vhat_j, one per edge (row-major order)."""
    gf = H.field
    sigma = np.empty(H.delta, dtype=np.int64)
    _gmlgd_sigma(np.asarray(vhat, dtype=np.int64), np.asarray(s, dtype=np.int64), H.edge_row,
                 H.edge_col, H.edge_val, gf.mul_table, gf.inv_table, sigma)
    return sigma


def gmlgd_update(counters, H, sigma) -> np.ndarray:
    """Counters after one round of votes (returns a new array)."""
    out = np.array(counters, dtype=np.int64, copy=True)
    _gmlgd_vote(np.asarray(sigma, dtype=np.int64), H.edge_col, out)
    return out
