"""
Monte Carlo BER/FER simulation.

Frames are simulated in fixed-size blocks. Frame ``f`` of sweep point ``i``
draws its message and noise from ``default_rng([seed, i, f])``, so results
do not depend on the number of workers, and two schedules run with the same
seed see identical channel realizations. A point stops after the first block
that reaches the frame-error budget or the frame budget; estimates always
divide by the frames actually simulated.
"""

from __future__ import annotations

import logging
import math
import subprocess
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .. import _ops
from ..channel import (build_sectionalized_trellis, modulate, snr_to_sigma, symbols_to_bits,
                       transmit)
from ..code import Encoder, load_alist, random_regular_code
from ..detect import BranchMetricSet, bcjr, max_log_map, viterbi
from ..gf import GaloisField
from ..joint import decode_frame
from ..metrics import channel_possibilities
from .config import ExperimentConfig
from .counters import OpCounters, complexity_ratio

log = logging.getLogger(__name__)

# BCJR needs sigma > 0; noiseless points run it with this noise level instead
SIGMA_FLOOR = 1e-3


@dataclass
class ResultRow:
    """Tallies for one Eb/N0 point of one series.

    ``bit_err_sumsq`` is the sum over frames of the squared per-frame bit
    error count, kept for confidence intervals.
    """

    label: str
    ebn0_db: float
    frames: int
    bits_per_frame: int
    symbols_per_frame: int
    bit_errors: int
    symbol_errors: int
    frame_errors: int
    bit_err_sumsq: int
    ops: OpCounters = field(default_factory=OpCounters)
    ratio: float | None = None
    seed: int = 0
    fingerprint: str = ""

    @property
    def ber(self) -> float:
        return self.bit_errors / max(self.frames * self.bits_per_frame, 1)

    @property
    def ser(self) -> float:
        return self.symbol_errors / max(self.frames * self.symbols_per_frame, 1)

    @property
    def fer(self) -> float:
        return self.frame_errors / max(self.frames, 1)

    @property
    def mean_iters(self) -> float:
        return self.ops.iterations / max(self.frames, 1)

    def ber_ci(self, z: float = 1.959964) -> tuple:
        """Normal-approximation interval for the BER from per-frame error counts."""
        n = self.frames
        if n < 2:
            return 0.0, 1.0
        mean = self.bit_errors / n
        var = max(self.bit_err_sumsq / n - mean * mean, 0.0) * n / (n - 1)
        half = z * math.sqrt(var / n)
        b = self.bits_per_frame
        return max(mean - half, 0.0) / b, (mean + half) / b

    def merge(self, other: "ResultRow") -> "ResultRow":
        self.frames += other.frames
        self.bit_errors += other.bit_errors
        self.symbol_errors += other.symbol_errors
        self.frame_errors += other.frame_errors
        self.bit_err_sumsq += other.bit_err_sumsq
        self.ops.merge(other.ops)
        return self


def git_revision() -> str:
    """Current commit of the source tree, or '' outside a git checkout."""
    try:
        out = subprocess.run(["git", "rev-parse", "--short", "HEAD"], capture_output=True,
                             text=True, cwd=Path(__file__).parent, timeout=5)
    except (OSError, subprocess.SubprocessError):
        return ""
    return out.stdout.strip() if out.returncode == 0 else ""


def build_code(cfg: ExperimentConfig):
    """Parity-check matrix described by the config."""
    gf = GaloisField(cfg.field)
    if cfg.code == "random":
        return random_regular_code(cfg.code_n, cfg.code_col_weight, cfg.code_row_weight, gf,
                                   seed=cfg.code_seed)
    return load_alist(cfg.code, gf)


class FrameRunner:
    """Everything needed to simulate frames of one configuration."""

    def __init__(self, cfg: ExperimentConfig, H=None):
        self.cfg = cfg
        self.H = build_code(cfg) if H is None else H
        self.enc = Encoder(self.H)
        if self.enc.k == 0:
            raise ValueError("code has dimension 0")
        self.gf = self.H.field
        self.trellis = build_sectionalized_trellis(cfg.channel, self.gf.m)
        self.quantizer = cfg.quantizer
        self.schedule = cfg.schedule
        self.rate = self.enc.k / self.H.N

    def sigma(self, ebn0_db: float) -> float:
        return snr_to_sigma(ebn0_db, self.rate)

    def frame(self, seed, point, f, sigma):
        """Simulate one frame; returns (bit errors, symbol errors, FrameResult)."""
        rng = np.random.default_rng([seed, point, f])
        u = rng.integers(0, self.gf.q, self.enc.k)
        v = self.enc.encode(u)
        y = transmit(modulate(v, self.gf), self.cfg.channel, sigma, rng)
        s = max(sigma, SIGMA_FLOOR)
        r = decode_frame(y, self.H, self.trellis, self.quantizer, self.schedule, sigma=s)
        uhat = self.enc.extract(r.vhat)
        sym = int((uhat != u).sum())
        bits = int((symbols_to_bits(uhat, self.gf.m) != symbols_to_bits(u, self.gf.m)).sum()) \
            if sym else 0
        return bits, sym, r

    def block(self, seed, point, ebn0_db, start, stop) -> ResultRow:
        sigma = self.sigma(ebn0_db)
        row = ResultRow(self.cfg.name, ebn0_db, 0, self.enc.k * self.gf.m, self.enc.k, 0, 0, 0, 0)
        for f in range(start, stop):
            bits, sym, r = self.frame(seed, point, f, sigma)
            row.frames += 1
            row.bit_errors += bits
            row.bit_err_sumsq += bits * bits
            row.symbol_errors += sym
            row.frame_errors += sym > 0
            row.ops.add_frame(r.counts, r.iterations, r.sweeps)
        return row


_WORKER: FrameRunner | None = None


def _init_worker(cfg):
    global _WORKER
    _WORKER = FrameRunner(cfg)


def _run_block(args):
    return _WORKER.block(*args)


def _point_blocks(cfg: ExperimentConfig):
    B = cfg.block_frames
    f = 0
    while f < cfg.max_frames:
        yield f, min(f + B, cfg.max_frames)
        f += B


def _simulate_point(cfg, runner, pool, point, ebn0_db, threads):
    row = ResultRow(cfg.name, ebn0_db, 0, runner.enc.k * runner.gf.m, runner.enc.k, 0, 0, 0, 0,
                    seed=cfg.seed, fingerprint=cfg.fingerprint)
    blocks = _point_blocks(cfg)
    while row.frame_errors < cfg.max_frame_errors:
        batch = [b for _, b in zip(range(max(threads, 1)), blocks)]
        if not batch:
            break
        args = [(cfg.seed, point, ebn0_db, a, b) for a, b in batch]
        results = pool.map(_run_block, args) if pool else [runner.block(*a) for a in args]
        for part in results:
            # blocks are consumed in order so the stopping point is independent of threads
            if row.frame_errors >= cfg.max_frame_errors:
                break
            row.merge(part)
    return row


def run_experiment(cfg: ExperimentConfig, threads: int = 1, runner: FrameRunner | None = None):
    """Simulate every Eb/N0 point of ``cfg``; yields one :class:`ResultRow` per point.

    With ``cfg.baseline = 'bcjr-qspa'`` the benchmark schedule is simulated on
    the same frames and each row carries the complexity ratio against it.
    """
    runner = runner or FrameRunner(cfg)
    base_cfg = None
    if cfg.baseline == "bcjr-qspa":
        base_cfg = cfg.with_schedule("bcjr", "qspa", mode="iterative", inner_iterations=None)
    log.info("simulating %s (fingerprint %s, git %s)", cfg.name, cfg.fingerprint,
             git_revision() or "n/a")
    pool = None
    if threads > 1:
        pool = ProcessPoolExecutor(threads, initializer=_init_worker, initargs=(cfg,))
    try:
        base_runner = FrameRunner(base_cfg, runner.H) if base_cfg else None
        for i, eb in enumerate(cfg.ebn0_db):
            row = _simulate_point(cfg, runner, pool, i, eb, threads)
            if base_runner is not None:
                # same seeds and frame count as the candidate
                base = replace_budget(base_cfg, row.frames)
                brow = _simulate_point(base, base_runner, None, i, eb, 1)
                row.ratio = complexity_ratio(row.ops, brow.ops)
            log.info("%s Eb/N0=%.2f frames=%d BER=%.3e FER=%.3e", cfg.name, eb, row.frames,
                     row.ber, row.fer)
            yield row
    finally:
        if pool is not None:
            pool.shutdown()


def replace_budget(cfg: ExperimentConfig, frames: int) -> ExperimentConfig:
    """Copy of ``cfg`` that simulates exactly ``frames`` frames per point."""
    return replace(cfg, max_frames=frames, max_frame_errors=frames + 1)


def run_detector_only(cfg: ExperimentConfig, frames: int, n_symbols: int | None = None):
    """Uncoded symbol-by-symbol detection BER at each Eb/N0 point of ``cfg``.

    Returns a list of (ebn0_db, frames, bit_errors, ber, counts per frame).
    """
    gf = GaloisField(cfg.field)
    N = n_symbols or cfg.code_n
    t = build_sectionalized_trellis(cfg.channel, gf.m)
    out = []
    for i, eb in enumerate(cfg.ebn0_db):
        sigma = snr_to_sigma(eb, 1.0)
        errs = 0
        counts = np.zeros((2, _ops.N_SLOTS), dtype=np.int64)
        for f in range(frames):
            rng = np.random.default_rng([cfg.seed, i, f])
            v = rng.integers(0, gf.q, N)
            y = transmit(modulate(v, gf), cfg.channel, sigma, rng)
            if cfg.detector == "bcjr":
                app, _ = bcjr(t, y, max(sigma, SIGMA_FLOOR), counts=counts)
                vh = app.argmax(axis=1)
            else:
                m = BranchMetricSet.from_channel(channel_possibilities(y, t, cfg.quantizer), gf.q)
                if cfg.detector == "viterbi":
                    vh, _ = viterbi(t, m, counts=counts)
                else:
                    vh = max_log_map(t, m, counts=counts).argmax(axis=1)
            errs += int((symbols_to_bits(vh, gf.m) != symbols_to_bits(v, gf.m)).sum())
        out.append((eb, frames, errs, errs / (frames * N * gf.m), counts / max(frames, 1)))
    return out
