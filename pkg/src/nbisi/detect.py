"""
Trellis detectors over the sectionalized channel trellis.

``max_log_map`` and ``viterbi`` work purely on integer possibilities;
``bcjr`` is the floating-point benchmark using Gaussian likelihoods.
Every kernel charges its operations into a ``counts`` array laid out as in
:mod:`nbisi._ops` (per branch: max-log-MAP 4 additions / 3 comparisons,
BCJR 4 multiplications / 3 additions; Viterbi 1 comparison per branch and
1 addition per surviving state).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from . import _ops

NEG = -(1 << 52)


@dataclass
class BranchMetricSet:
    """Channel possibilities (N, 2^L q) plus the symbol priors (N, q).

    The metric of branch b = (s, v) in section j is
    ``channel[j, s*q + v] + prior[j, v]``.
    """

    channel: np.ndarray
    prior: np.ndarray

    @classmethod
    def from_channel(cls, channel, q):
        channel = np.asarray(channel, dtype=np.int64)
        return cls(channel, np.zeros((channel.shape[0], q), dtype=np.int64))

    def total(self) -> np.ndarray:
        q = self.prior.shape[1]
        S = self.channel.shape[1] // q
        return self.channel + np.tile(self.prior, (1, S))


def _new_counts():
    return np.zeros((2, _ops.N_SLOTS), dtype=np.int64)


@njit(cache=True)
def _max_log_map(chan, prior, next_state, out, counts):
    N, nb = chan.shape
    S, q = next_state.shape
    alpha = np.full((N + 1, S), NEG, dtype=np.int64)
    alpha[0, 0] = 0
    for j in range(N):
        for s in range(S):
            a = alpha[j, s]
            if a <= NEG // 2:
                continue
            for v in range(q):
                ns = next_state[s, v]
                cand = a + chan[j, s * q + v] + prior[j, v]
                if cand > alpha[j + 1, ns]:
                    alpha[j + 1, ns] = cand
    beta = np.full((N + 1, S), NEG, dtype=np.int64)
    beta[N, :] = 0
    for j in range(N - 1, -1, -1):
        for s in range(S):
            best = NEG
            for v in range(q):
                cand = beta[j + 1, next_state[s, v]] + chan[j, s * q + v] + prior[j, v]
                if cand > best:
                    best = cand
            beta[j, s] = best
    for j in range(N):
        lo = -NEG
        for v in range(q):
            best = NEG
            for s in range(S):
                cand = alpha[j, s] + chan[j, s * q + v] + beta[j + 1, next_state[s, v]]
                if cand > best:
                    best = cand
            out[j, v] = best
            if best < lo:
                lo = best
        for v in range(q):
            out[j, v] -= lo
    counts[_ops.DETECTOR, _ops.INT_ADD] += 4 * N * nb
    counts[_ops.DETECTOR, _ops.INT_CMP] += 3 * N * nb


@njit(cache=True)
def _viterbi(chan, prior, next_state, out, counts):
    N, nb = chan.shape
    S, q = next_state.shape
    metric = np.full(S, NEG, dtype=np.int64)
    metric[0] = 0
    new = np.empty(S, dtype=np.int64)
    surv = np.zeros((N, S), dtype=np.int64)
    for j in range(N):
        new[:] = NEG
        for s in range(S):
            a = metric[s]
            if a <= NEG // 2:
                continue
            for v in range(q):
                ns = next_state[s, v]
                cand = a + chan[j, s * q + v] + prior[j, v]
                if cand > new[ns]:
                    new[ns] = cand
                    surv[j, ns] = s * q + v
        metric[:] = new
    s = 0
    for t in range(1, S):
        if metric[t] > metric[s]:
            s = t
    best = metric[s]
    for j in range(N - 1, -1, -1):
        b = surv[j, s]
        out[j] = b % q
        s = b // q
    counts[_ops.DETECTOR, _ops.INT_ADD] += N * S
    counts[_ops.DETECTOR, _ops.INT_CMP] += N * nb
    return best


@njit(cache=True)
def _logaddexp(a, b):
    if a == -np.inf:
        return b
    if b == -np.inf:
        return a
    if a > b:
        return a + np.log1p(np.exp(b - a))
    return b + np.log1p(np.exp(a - b))


@njit(cache=True)
def _exp_normalize(logv, dst):
    top = logv.max()
    tot = 0.0
    for v in range(logv.size):
        dst[v] = np.exp(logv[v] - top) if logv[v] != -np.inf else 0.0
        tot += dst[v]
    for v in range(logv.size):
        dst[v] /= tot


@njit(cache=True)
def _bcjr(dist, logprior, next_state, inv2s2, app, ext, counts):
    N, nb = dist.shape
    S, q = next_state.shape
    alpha = np.full((N + 1, S), -np.inf)
    alpha[0, 0] = 0.0
    for j in range(N):
        for s in range(S):
            a = alpha[j, s]
            if a == -np.inf:
                continue
            for v in range(q):
                ns = next_state[s, v]
                g = logprior[j, v] - dist[j, s * q + v] * inv2s2
                alpha[j + 1, ns] = _logaddexp(alpha[j + 1, ns], a + g)
        top = alpha[j + 1].max()
        for s in range(S):
            alpha[j + 1, s] -= top
    beta = np.full((N + 1, S), -np.inf)
    beta[N, :] = 0.0
    for j in range(N - 1, -1, -1):
        for s in range(S):
            acc = -np.inf
            for v in range(q):
                g = logprior[j, v] - dist[j, s * q + v] * inv2s2
                acc = _logaddexp(acc, beta[j + 1, next_state[s, v]] + g)
            beta[j, s] = acc
        top = beta[j].max()
        for s in range(S):
            beta[j, s] -= top
    la = np.empty(q)
    le = np.empty(q)
    for j in range(N):
        for v in range(q):
            acc = -np.inf
            for s in range(S):
                acc = _logaddexp(acc, alpha[j, s] - dist[j, s * q + v] * inv2s2
                                 + beta[j + 1, next_state[s, v]])
            le[v] = acc
            la[v] = acc + logprior[j, v]
        _exp_normalize(la, app[j])
        _exp_normalize(le, ext[j])
    counts[_ops.DETECTOR, _ops.REAL_MUL] += 4 * N * nb
    counts[_ops.DETECTOR, _ops.REAL_ADD] += 3 * N * nb


def _check(trellis, metrics: BranchMetricSet):
    chan = np.ascontiguousarray(metrics.channel, dtype=np.int64)
    prior = np.ascontiguousarray(metrics.prior, dtype=np.int64)
    if chan.ndim != 2 or chan.shape[1] != trellis.num_branches:
        raise ValueError(f"channel metrics must have shape (N, {trellis.num_branches})")
    if prior.shape != (chan.shape[0], trellis.q):
        raise ValueError(f"priors must have shape ({chan.shape[0]}, {trellis.q})")
    return chan, prior


def max_log_map(trellis, metrics: BranchMetricSet, counts=None) -> np.ndarray:
    """Extrinsic symbol possibilities, one row per section, min-normalized to 0.

    Output(j, v) is the best path metric through a branch labelled v in
    section j with that branch's own prior left out. The forward pass starts
    in state 0; the final state is free.
    """
    chan, prior = _check(trellis, metrics)
    out = np.empty(prior.shape, dtype=np.int64)
    _max_log_map(chan, prior, trellis.next_state, out,
                 _new_counts() if counts is None else counts)
    return out


def viterbi(trellis, metrics: BranchMetricSet, counts=None):
    """Maximum-metric symbol sequence and its path metric.

    Ties go to the smaller predecessor state, then the smaller symbol; the
    final state is the smallest-index state of maximal metric.
    """
    chan, prior = _check(trellis, metrics)
    out = np.empty(chan.shape[0], dtype=np.int64)
    best = _viterbi(chan, prior, trellis.next_state, out,
                    _new_counts() if counts is None else counts)
    return out, int(best)


def bcjr(trellis, y, sigma: float, priors=None, counts=None):
    """Symbol APPs and extrinsic pmfs from the exact log-domain BCJR.

    Returns ``(app, extrinsic)``, both (N, q) arrays whose rows sum to 1.
    Extrinsic rows equal the APP divided by the prior, renormalized.
    """
    from .metrics import squared_distances

    if not sigma > 0:
        raise ValueError("BCJR needs sigma > 0")
    dist = squared_distances(y, trellis)
    N = dist.shape[0]
    if priors is None:
        logprior = np.full((N, trellis.q), -np.log(trellis.q))
    else:
        priors = np.asarray(priors, dtype=float)
        if priors.shape != (N, trellis.q):
            raise ValueError(f"priors must have shape ({N}, {trellis.q})")
        with np.errstate(divide="ignore"):
            logprior = np.log(priors)
    app = np.empty((N, trellis.q))
    ext = np.empty((N, trellis.q))
    _bcjr(dist, np.ascontiguousarray(logprior), trellis.next_state, 1.0 / (2.0 * sigma ** 2),
          app, ext, _new_counts() if counts is None else counts)
    return app, ext
