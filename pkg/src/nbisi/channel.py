"""
Binary-input ISI channel y_t = sum_l f_l x_{t-l} + w_t, BPSK mapping of
field symbols, and the symbol-matched (sectionalized) channel trellis.

Bits before t = 0 are fixed to x = -1 (bit 0), so every frame starts in
trellis state 0. There is no termination tail.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .gf import GaloisField


@dataclass(frozen=True)
class IsiChannel:
    taps: tuple
    name: str = "custom"

    def __post_init__(self):
        taps = tuple(float(f) for f in self.taps)
        if not taps:
            raise ValueError("channel needs at least one tap")
        if taps[0] == 0.0:
            raise ValueError("leading tap f_0 must be nonzero")
        object.__setattr__(self, "taps", taps)

    @property
    def order(self) -> int:
        """Channel memory L."""
        return len(self.taps) - 1

    L = order

    @property
    def dc_gain(self) -> float:
        return float(sum(self.taps))


CATALOG = {
    "dicode": IsiChannel((1.0, -1.0), "dicode"),
    "epr4": IsiChannel((1.0, 1.0, -1.0, -1.0), "epr4"),
    "proakis-b": IsiChannel((0.407, 0.815, 0.407), "proakis-b"),
}


def get_channel(spec) -> IsiChannel:
    """Look up a catalog name or build a channel from a tap sequence / comma list."""
    if isinstance(spec, IsiChannel):
        return spec
    if isinstance(spec, str):
        key = spec.strip().lower()
        if key in CATALOG:
            return CATALOG[key]
        try:
            taps = [float(t) for t in key.replace(" ", "").split(",") if t]
        except ValueError:
            raise ValueError(f"unknown channel {spec!r}; catalog: {sorted(CATALOG)}") from None
        return IsiChannel(tuple(taps))
    return IsiChannel(tuple(spec))


def symbols_to_bits(v, m: int) -> np.ndarray:
    """Bit b of each symbol, bit 0 first."""
    v = np.asarray(v, dtype=np.int64)
    return ((v[:, None] >> np.arange(m)) & 1).reshape(-1)


def bits_to_symbols(c, m: int) -> np.ndarray:
    c = np.asarray(c, dtype=np.int64).reshape(-1, m)
    return (c << np.arange(m)).sum(axis=1)


def modulate(v, field: GaloisField) -> np.ndarray:
    """Codeword symbols -> bipolar sequence of length m*N (x = 2c - 1)."""
    return 2.0 * symbols_to_bits(v, field.m) - 1.0


def noiseless_output(x, channel: IsiChannel) -> np.ndarray:
    f = np.asarray(channel.taps)
    xp = np.concatenate([-np.ones(channel.order), np.asarray(x, dtype=float)])
    return np.convolve(xp, f, mode="valid")


def transmit(x, channel: IsiChannel, sigma: float, rng=None) -> np.ndarray:
    """Pass a bipolar sequence through the ISI channel and add N(0, sigma^2) noise."""
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    y = noiseless_output(x, channel)
    if sigma > 0:
        rng = np.random.default_rng(rng)
        y = y + sigma * rng.standard_normal(y.size)
    return y


def snr_to_sigma(ebn0_db: float, rate: float) -> float:
    """Noise std-dev for unit-energy binary input at the given Eb/N0 and code rate."""
    if rate <= 0:
        raise ValueError("rate must be positive")
    if math.isinf(ebn0_db) and ebn0_db > 0:
        return 0.0
    return math.sqrt(1.0 / (2.0 * rate * 10.0 ** (ebn0_db / 10.0)))


class SectionalizedTrellis:
    """Time-invariant trellis whose sections consume one m-bit symbol.

    A state is the last L transmitted bits, most recent bit in bit 0. Branch
    ``b = s * q + v`` leaves state ``s`` on symbol ``v`` and enters
    ``next_state[s, v]`` emitting the noiseless vector ``outputs[s, v]``.
    """

    def __init__(self, channel: IsiChannel, m: int):
        if m < 1:
            raise ValueError("bits per section must be >= 1")
        L = channel.order
        S = 1 << L
        q = 1 << m
        f = np.asarray(channel.taps)
        nxt = np.zeros((S, q), dtype=np.int64)
        out = np.zeros((S, q, m))
        for s0 in range(S):
            for v in range(q):
                s = s0
                for k in range(m):
                    c = (v >> k) & 1
                    hist = [2 * c - 1] + [2 * ((s >> (l - 1)) & 1) - 1 for l in range(1, L + 1)]
                    out[s0, v, k] = float(np.dot(f, hist))
                    s = ((s << 1) | c) & (S - 1)
                nxt[s0, v] = s
        self.channel = channel
        self.m = m
        self.q = q
        self.L = L
        self.num_states = S
        self.next_state = nxt
        self.outputs = out
        self.branch_from = np.repeat(np.arange(S), q)
        self.branch_symbol = np.tile(np.arange(q), S)
        self.branch_to = nxt.reshape(-1)
        self.branch_outputs = out.reshape(S * q, m)
        for arr in (nxt, out, self.branch_from, self.branch_symbol, self.branch_to,
                    self.branch_outputs):
            arr.setflags(write=False)

    @property
    def num_branches(self) -> int:
        return self.num_states * self.q

    def branches(self):
        """(s_j, v_j, z_j, s_{j+1}) tuples of one section."""
        return [(int(s), int(v), tuple(self.outputs[s, v]), int(self.next_state[s, v]))
                for s, v in zip(self.branch_from, self.branch_symbol)]

    def state_path(self, v) -> np.ndarray:
        """States visited by a symbol sequence starting from state 0 (length N+1)."""
        states = [0]
        for sym in v:
            states.append(int(self.next_state[states[-1], sym]))
        return np.array(states)

    def dump(self) -> str:
        lines = [f"# channel {self.channel.name} taps={list(self.channel.taps)} "
                 f"L={self.L} m={self.m} states={self.num_states} "
                 f"branches/section={self.num_branches}",
                 "# from symbol to outputs"]
        for s, v, z, t in self.branches():
            lines.append(f"{s} {v} {t} " + " ".join(f"{x:g}" for x in z))
        return "\n".join(lines)


def build_sectionalized_trellis(channel: IsiChannel, m: int) -> SectionalizedTrellis:
    return SectionalizedTrellis(channel, m)


def build_original_trellis(channel: IsiChannel) -> SectionalizedTrellis:
    """Bit-level trellis (one bit per section)."""
    return SectionalizedTrellis(channel, 1)
