"""
Operation counters and the closed-form per-iteration cost expressions.

Every kernel increments a ``(2, 7)`` int64 array laid out as in
:mod:`nbisi._ops` (row 0 detector, row 1 decoder). :class:`OpCounters`
aggregates those arrays over frames and reports per-frame and per-iteration
means.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .. import _ops

CATEGORIES = _ops.CATEGORIES
ALGORITHMS = ("viterbi", "max-log-map", "bcjr", "qspa", "gmlgd")


def table_i(algorithm: str, N: int, q: int, L: int, delta: int = 0) -> dict:
    """Per-iteration operation counts of a structured algorithm.

    Parameters
    ----------
    algorithm : {'viterbi', 'max-log-map', 'bcjr', 'qspa', 'gmlgd'}
    N : int
        Code length in symbols (trellis sections).
    q : int
        Field size.
    L : int
        Channel memory; the sectionalized trellis has 2^L states.
    delta : int
        Number of nonzero entries of H (decoder algorithms only).

    Returns
    -------
    dict
        Category name -> count; categories not listed are zero.
    """
    S = 2**L
    alg = algorithm.lower()
    if alg == "viterbi":
        c = {"int_add": N * S, "int_cmp": N * q * S}
    elif alg == "max-log-map":
        c = {"int_add": 4 * N * q * S, "int_cmp": 3 * N * q * S}
    elif alg == "bcjr":
        c = {"real_mul": 4 * N * q * S, "real_add": 3 * N * q * S}
    elif alg == "qspa":
        c = {"field_ops": q * delta, "real_mul": 2 * q * delta, "real_add": 2 * q * q * delta,
             "real_div": 2 * q * delta}
    elif alg == "gmlgd":
        c = {"int_add": delta + N * q * S, "field_ops": 4 * q * delta}
    else:
        raise ValueError(f"no closed-form count for {algorithm!r}; choose from {ALGORITHMS}")
    return {k: c.get(k, 0) for k in CATEGORIES}


@dataclass
class OpCounters:
    """Cumulative operation counts over a batch of frames.

    ``totals[component, slot]`` sums the per-frame kernel arrays;
    ``iterations`` and ``sweeps`` sum the per-frame iteration and
    check-node sweep counts. ``cps_sum`` / ``cps_sumsq`` / ``cps_frames``
    accumulate the per-frame mean of EMS configurations per sweep, over
    frames with at least one sweep.
    """

    totals: np.ndarray = field(default_factory=lambda: np.zeros((2, _ops.N_SLOTS), np.int64))
    frames: int = 0
    iterations: int = 0
    sweeps: int = 0
    cps_sum: float = 0.0
    cps_sumsq: float = 0.0
    cps_frames: int = 0

    def add_frame(self, counts, iterations: int, sweeps: int) -> None:
        counts = np.asarray(counts)
        if (counts < 0).any():
            raise ValueError("operation counts must be nonnegative")
        self.totals += counts
        self.frames += 1
        self.iterations += int(iterations)
        self.sweeps += int(sweeps)
        if sweeps > 0:
            cps = counts[_ops.DECODER, _ops.CONFIGS] / sweeps
            self.cps_sum += cps
            self.cps_sumsq += cps * cps
            self.cps_frames += 1

    def merge(self, other: "OpCounters") -> "OpCounters":
        self.totals += other.totals
        self.frames += other.frames
        self.iterations += other.iterations
        self.sweeps += other.sweeps
        self.cps_sum += other.cps_sum
        self.cps_sumsq += other.cps_sumsq
        self.cps_frames += other.cps_frames
        return self

    def _per(self, n) -> np.ndarray:
        return self.totals[:, : len(CATEGORIES)] / max(n, 1)

    def per_frame(self) -> np.ndarray:
        """(2, 6) mean counts per frame, rows detector/decoder."""
        return self._per(self.frames)

    def per_iteration(self) -> np.ndarray:
        """(2, 6) mean counts per outer iteration."""
        return self._per(self.iterations)

    def category_means(self) -> dict:
        """Per-frame mean of each category, detector and decoder summed."""
        return dict(zip(CATEGORIES, self.per_frame().sum(axis=0).tolist()))

    def total_per_frame(self) -> float:
        """All categories of both components summed, per frame."""
        return float(self.per_frame().sum())

    @property
    def configs_per_sweep(self) -> tuple:
        """(mean, std) over frames of EMS configurations per check-node sweep."""
        if self.cps_frames == 0:
            return 0.0, 0.0
        m = self.cps_sum / self.cps_frames
        var = max(self.cps_sumsq / self.cps_frames - m * m, 0.0)
        return m, var**0.5

    @property
    def mean_configs_per_sweep(self) -> float:
        """Batch mean of configurations per sweep (total configurations / total sweeps)."""
        return self.totals[_ops.DECODER, _ops.CONFIGS] / max(self.sweeps, 1)


def _total(x) -> float:
    if isinstance(x, OpCounters):
        return x.total_per_frame()
    if isinstance(x, dict):
        return float(sum(x.values()))
    return float(np.sum(x))


def complexity_ratio(candidate, baseline) -> float:
    """Frame-averaged total operations of ``candidate`` divided by ``baseline``.

    Both arguments may be :class:`OpCounters`, category dicts, arrays or
    plain numbers; all categories are summed.
    """
    b = _total(baseline)
    if b <= 0:
        raise ValueError("baseline operation count is zero")
    return _total(candidate) / b


def complexity_breakdown(candidate: OpCounters, baseline: OpCounters) -> dict:
    """Per-category ratio; ``None`` where the baseline spends nothing in that category."""
    a, b = candidate.category_means(), baseline.category_means()
    return {k: (a[k] / b[k] if b[k] else None) for k in CATEGORIES}
