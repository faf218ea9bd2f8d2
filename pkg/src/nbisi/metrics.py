"""
Integer branch metrics: squared Euclidean distances between a received
section and each branch's noiseless output, clipped at d_max and mapped
affinely onto the p-bit range [0, 2^p - 1] (larger = more likely).

No noise variance enters the mapping.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit


@dataclass(frozen=True)
class QuantizerConfig:
    p: int = 9
    d_max: float = 80.0

    def __post_init__(self):
        if self.p < 1:
            raise ValueError("p must be >= 1")
        if not self.d_max > 0:
            raise ValueError("d_max must be positive")

    @property
    def top(self) -> int:
        return (1 << self.p) - 1


def default_d_max(channel, m: int) -> float:
    return 2.0 * m * sum(abs(f) for f in channel.taps) ** 2


def round_half_away(x):
    """Nearest integer, ties away from zero."""
    if np.ndim(x) == 0:
        return int(math.copysign(math.floor(abs(x) + 0.5), x))
    x = np.asarray(x, dtype=float)
    return (np.sign(x) * np.floor(np.abs(x) + 0.5)).astype(np.int64)


def possibility(d, cfg: QuantizerConfig):
    """p-bit possibility of a squared distance ``d`` (scalar or array)."""
    d = np.minimum(np.asarray(d, dtype=float), cfg.d_max)
    return round_half_away((cfg.d_max - d) * cfg.top / cfg.d_max)


def branch_possibilities(y_section, trellis, cfg: QuantizerConfig) -> np.ndarray:
    """Possibility of every branch of one section, indexed ``s * q + v``."""
    y_section = np.asarray(y_section, dtype=float)
    if y_section.shape != (trellis.m,):
        raise ValueError(f"section must have length m = {trellis.m}")
    d = ((trellis.branch_outputs - y_section) ** 2).sum(axis=1)
    return possibility(d, cfg)


@njit(cache=True)
def _section_metrics(y, z, d_max, top, out):
    n_sec = out.shape[0]
    nb, m = z.shape
    for j in range(n_sec):
        for b in range(nb):
            d = 0.0
            for k in range(m):
                e = y[j * m + k] - z[b, k]
                d += e * e
            if d > d_max:
                d = d_max
            out[j, b] = np.int64(np.floor((d_max - d) * top / d_max + 0.5))


def channel_possibilities(y, trellis, cfg: QuantizerConfig) -> np.ndarray:
    """Branch possibilities for a whole received frame, shape (N, 2^L * q)."""
    y = np.ascontiguousarray(y, dtype=np.float64)
    if y.size % trellis.m:
        raise ValueError("received length is not a multiple of m")
    out = np.empty((y.size // trellis.m, trellis.num_branches), dtype=np.int64)
    _section_metrics(y, np.ascontiguousarray(trellis.branch_outputs), float(cfg.d_max),
                     float(cfg.top), out)
    return out


@njit(cache=True)
def _section_distances(y, z, out):
    n_sec = out.shape[0]
    nb, m = z.shape
    for j in range(n_sec):
        for b in range(nb):
            d = 0.0
            for k in range(m):
                e = y[j * m + k] - z[b, k]
                d += e * e
            out[j, b] = d


def squared_distances(y, trellis) -> np.ndarray:
    """Unclipped ||y_j - z_b||^2 for every section and branch (BCJR input)."""
    y = np.ascontiguousarray(y, dtype=np.float64)
    out = np.empty((y.size // trellis.m, trellis.num_branches))
    _section_distances(y, np.ascontiguousarray(trellis.branch_outputs), out)
    return out
