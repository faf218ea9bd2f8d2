"""
Arithmetic over GF(2^m) via precomputed log/antilog and product tables.

Elements are integers in [0, q) whose bit i is the coefficient of alpha^i.
The same bit order is used by the modulator: bit 0 of a symbol is sent first.
"""

from __future__ import annotations

import numpy as np

# Minimal-weight primitive polynomials, bit i = coefficient of x^i.
DEFAULT_PRIMITIVE_POLYS = {
    1: 0b11,            # x + 1
    2: 0b111,           # x^2 + x + 1
    3: 0b1011,          # x^3 + x + 1
    4: 0b10011,         # x^4 + x + 1
    5: 0b100101,        # x^5 + x^2 + 1
    6: 0b1000011,       # x^6 + x + 1
    7: 0b10001001,      # x^7 + x^3 + 1
    8: 0b100011101,     # x^8 + x^4 + x^3 + x^2 + 1
}


class GaloisField:
    """Table-driven GF(2^m), 1 <= m <= 8.

    Parameters
    ----------
    m : int
        Extension degree.
    primitive_poly : int, optional
        Defining polynomial as a bitmask including the x^m term. Must be
        primitive; defaults to ``DEFAULT_PRIMITIVE_POLYS[m]``.

    Notes
    -----
    All tables are read-only numpy arrays so instances can be shared freely
    between workers. ``mul_table`` and ``inv_table`` are what the compiled
    kernels consume.
    """

    def __init__(self, m: int, primitive_poly: int | None = None):
        if not 1 <= m <= 8:
            raise ValueError(f"extension degree must be in [1, 8], got {m}")
        if primitive_poly is None:
            primitive_poly = DEFAULT_PRIMITIVE_POLYS[m]
        q = 1 << m
        if primitive_poly >> m != 1:
            raise ValueError(f"polynomial {primitive_poly:#b} does not have degree {m}")

        antilog = np.zeros(2 * (q - 1), dtype=np.int64)
        log = np.full(q, -1, dtype=np.int64)
        x = 1
        for i in range(q - 1):
            if log[x] != -1:
                raise ValueError(f"polynomial {primitive_poly:#b} is not primitive over GF(2)")
            antilog[i] = x
            log[x] = i
            x <<= 1
            if x & q:
                x ^= primitive_poly
        if x != 1:
            raise ValueError(f"polynomial {primitive_poly:#b} is not primitive over GF(2)")
        antilog[q - 1:] = antilog[: q - 1]

        nz = np.arange(1, q)
        mul = np.zeros((q, q), dtype=np.int64)
        mul[1:, 1:] = antilog[log[nz][:, None] + log[nz][None, :]]
        inv = np.zeros(q, dtype=np.int64)
        inv[1:] = antilog[(q - 1 - log[nz]) % (q - 1)]

        self.m = m
        self.q = q
        self.primitive_poly = primitive_poly
        self.log_table = log
        self.antilog_table = antilog
        self.mul_table = mul
        self.inv_table = inv
        for arr in (log, antilog, mul, inv):
            arr.setflags(write=False)

    def __repr__(self):
        return f"GaloisField(m={self.m}, primitive_poly={self.primitive_poly:#x})"

    def __eq__(self, other):
        return (isinstance(other, GaloisField) and other.m == self.m
                and other.primitive_poly == self.primitive_poly)

    def __hash__(self):
        return hash((self.m, self.primitive_poly))

    def _check(self, x):
        a = np.asarray(x)
        if np.any((a < 0) | (a >= self.q)):
            raise ValueError(f"element(s) out of range for GF({self.q}): {x}")

    def add(self, x, y):
        """Field addition (XOR); works elementwise on arrays."""
        self._check(x)
        self._check(y)
        return np.bitwise_xor(x, y)

    sub = add

    def neg(self, x):
        self._check(x)
        return x

    def mul(self, x, y):
        self._check(x)
        self._check(y)
        r = self.mul_table[x, y]
        return int(r) if np.ndim(r) == 0 else r

    def inv(self, x):
        self._check(x)
        if np.any(np.asarray(x) == 0):
            raise ZeroDivisionError("0 has no multiplicative inverse")
        r = self.inv_table[x]
        return int(r) if np.ndim(r) == 0 else r

    def div(self, x, y):
        return self.mul(x, self.inv(y))

    def pow_alpha(self, k: int) -> int:
        """alpha^k for any integer k."""
        return int(self.antilog_table[k % (self.q - 1)])


def field_new(m: int, primitive_poly: int | None = None) -> GaloisField:
    return GaloisField(m, primitive_poly)
