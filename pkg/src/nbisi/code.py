"""
Nonbinary LDPC codes: sparse parity-check matrices over GF(2^m), the
nonbinary alist file format, systematic encoding and syndromes.
"""

from __future__ import annotations

import logging
import os

import numpy as np
from numba import njit

from .gf import GaloisField

log = logging.getLogger(__name__)


class SparseParityMatrix:
    """Parity-check matrix H = [h_ij] over GF(q) stored as an edge list.

    Edges are kept in row-major order (sorted by row, then column); edge ``e``
    connects check ``edge_row[e]`` to symbol ``edge_col[e]`` with nonzero
    value ``edge_val[e]``. ``col_edges[col_ptr[j]:col_ptr[j+1]]`` lists the
    edges of column j in increasing row order.

    Parameters
    ----------
    n_rows, n_cols : int
    entries : iterable of (i, j, h)
        Zero-based positions and field values. Zero values are dropped;
        duplicate positions are an error.
    field : GaloisField
    """

    def __init__(self, n_rows, n_cols, entries, field: GaloisField):
        ent = {}
        for i, j, h in entries:
            i, j, h = int(i), int(j), int(h)
            if not (0 <= i < n_rows and 0 <= j < n_cols):
                raise ValueError(f"entry ({i}, {j}) outside {n_rows}x{n_cols} matrix")
            if not 0 <= h < field.q:
                raise ValueError(f"entry value {h} at ({i}, {j}) not in GF({field.q})")
            if (i, j) in ent:
                raise ValueError(f"duplicate entry at ({i}, {j})")
            if h:
                ent[(i, j)] = h
        keys = sorted(ent)
        self.M = int(n_rows)
        self.N = int(n_cols)
        self.field = field
        self.edge_row = np.array([k[0] for k in keys], dtype=np.int64)
        self.edge_col = np.array([k[1] for k in keys], dtype=np.int64)
        self.edge_val = np.array([ent[k] for k in keys], dtype=np.int64)
        self.row_ptr = np.zeros(self.M + 1, dtype=np.int64)
        np.add.at(self.row_ptr, self.edge_row + 1, 1)
        self.row_ptr = np.cumsum(self.row_ptr)
        self.col_edges = np.argsort(self.edge_col, kind="stable").astype(np.int64)
        self.col_ptr = np.zeros(self.N + 1, dtype=np.int64)
        np.add.at(self.col_ptr, self.edge_col + 1, 1)
        self.col_ptr = np.cumsum(self.col_ptr)
        for arr in (self.edge_row, self.edge_col, self.edge_val, self.row_ptr,
                    self.col_edges, self.col_ptr):
            arr.setflags(write=False)

    @classmethod
    def from_dense(cls, H, field: GaloisField):
        H = np.asarray(H)
        rows, cols = np.nonzero(H)
        return cls(H.shape[0], H.shape[1], zip(rows, cols, H[rows, cols]), field)

    @property
    def delta(self) -> int:
        """Number of nonzero entries."""
        return int(self.edge_val.size)

    @property
    def q(self) -> int:
        return self.field.q

    def row_index(self, i):
        """Sorted columns j with h_ij != 0."""
        return self.edge_col[self.row_ptr[i]:self.row_ptr[i + 1]]

    def col_index(self, j):
        """Sorted rows i with h_ij != 0."""
        return self.edge_row[self.col_edges[self.col_ptr[j]:self.col_ptr[j + 1]]]

    @property
    def row_weights(self):
        return np.diff(self.row_ptr)

    @property
    def col_weights(self):
        return np.diff(self.col_ptr)

    def to_dense(self):
        H = np.zeros((self.M, self.N), dtype=np.int64)
        H[self.edge_row, self.edge_col] = self.edge_val
        return H

    def entries(self):
        return list(zip(self.edge_row.tolist(), self.edge_col.tolist(), self.edge_val.tolist()))

    def __eq__(self, other):
        return (isinstance(other, SparseParityMatrix) and self.M == other.M
                and self.N == other.N and self.field == other.field
                and self.entries() == other.entries())

    def __repr__(self):
        return (f"SparseParityMatrix(M={self.M}, N={self.N}, q={self.q}, "
                f"delta={self.delta})")


def syndrome(H: SparseParityMatrix, v) -> np.ndarray:
    """s_i = sum_j h_ij v_j over GF(q), one entry per row."""
    v = np.asarray(v, dtype=np.int64)
    if v.shape != (H.N,):
        raise ValueError(f"expected a length-{H.N} vector, got shape {v.shape}")
    terms = H.field.mul_table[H.edge_val, v[H.edge_col]]
    s = np.zeros(H.M, dtype=np.int64)
    nonempty = np.diff(H.row_ptr) > 0
    if terms.size:
        s[nonempty] = np.bitwise_xor.reduceat(terms, H.row_ptr[:-1][nonempty])
    return s


class Encoder:
    """Systematic encoder obtained by Gaussian elimination of H over GF(q).

    Redundant rows are tolerated: the effective dimension is
    ``k = N - rank(H)``. Information symbols sit at ``info_positions``
    (the non-pivot columns of the reduced row echelon form) so the codeword
    keeps H's column order.
    """

    def __init__(self, H: SparseParityMatrix):
        gf = H.field
        mul, inv = gf.mul_table, gf.inv_table
        A = H.to_dense()
        pivots = []
        r = 0
        for col in range(H.N):
            if r == H.M:
                break
            nz = np.nonzero(A[r:, col])[0]
            if nz.size == 0:
                continue
            p = r + nz[0]
            if p != r:
                A[[r, p]] = A[[p, r]]
            A[r] = mul[inv[A[r, col]], A[r]]
            others = np.nonzero(A[:, col])[0]
            others = others[others != r]
            if others.size:
                A[others] ^= mul[A[others, col][:, None], A[r][None, :]]
            pivots.append(col)
            r += 1
        self.H = H
        self.rank = r
        self.n = H.N
        self.k = H.N - r
        self.pivot_positions = np.array(pivots, dtype=np.int64)
        free = np.ones(H.N, dtype=bool)
        free[pivots] = False
        self.info_positions = np.nonzero(free)[0].astype(np.int64)
        # v[pivot_k] = sum_f A[k, f] v[f]   (char 2: no sign flip)
        self.parity_generator = np.ascontiguousarray(A[:r][:, self.info_positions])
        if r < H.M:
            log.info("H has %d redundant rows; effective K = %d (N - M = %d)",
                     H.M - r, self.k, H.N - H.M)

    def encode(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=np.int64)
        if u.shape != (self.k,):
            raise ValueError(f"expected a length-{self.k} message, got shape {u.shape}")
        v = np.zeros(self.n, dtype=np.int64)
        v[self.info_positions] = u
        if self.rank and self.k:
            prods = self.H.field.mul_table[self.parity_generator, u[None, :]]
            v[self.pivot_positions] = np.bitwise_xor.reduce(prods, axis=1)
        return v

    def extract(self, v) -> np.ndarray:
        """Information symbols of a (decoded) codeword."""
        return np.asarray(v)[self.info_positions]


def build_encoder(H: SparseParityMatrix) -> Encoder:
    return Encoder(H)


def is_majority_logic_decodable(H: SparseParityMatrix) -> bool:
    """True iff no two rows and no two columns share more than one nonzero position."""
    S = np.zeros((H.M, H.N), dtype=np.int64)
    S[H.edge_row, H.edge_col] = 1
    rows = S @ S.T
    cols = S.T @ S
    np.fill_diagonal(rows, 0)
    np.fill_diagonal(cols, 0)
    return bool((rows <= 1).all() and (cols <= 1).all())


def random_regular_code(N, col_weight, row_weight, field: GaloisField, seed=None,
                        max_attempts=10, max_swaps=20_000_000) -> SparseParityMatrix:
    """Random (col_weight, row_weight)-regular H with no length-4 cycles.

    Starts from a random degree-exact socket assignment and removes 4-cycles
    by simulated annealing over degree-preserving swaps (two columns trade
    one check each). Each attempt is bounded by ``max_swaps`` proposals.
    Values are uniform over the nonzero field elements.
    """
    if col_weight < 1 or row_weight < 1:
        raise ValueError("weights must be positive")
    if (N * col_weight) % row_weight:
        raise ValueError(f"N*col_weight = {N * col_weight} not divisible by row_weight {row_weight}")
    M = N * col_weight // row_weight
    if col_weight > M:
        raise ValueError(f"column weight {col_weight} exceeds number of checks {M}")
    if row_weight * (col_weight - 1) > M - 1:
        # a check would need more distinct check-neighbours than exist
        raise RuntimeError(f"no 4-cycle-free ({col_weight},{row_weight}) matrix exists with M={M}")
    rng = np.random.default_rng(seed)
    for attempt in range(max_attempts):
        cols = _random_sockets(N, M, col_weight, row_weight, rng)
        if cols is None:
            continue
        if col_weight > 1:
            cost = _anneal_four_cycles(cols, M, int(rng.integers(2**31)), max_swaps)
            if cost:
                continue
        vals = rng.integers(1, field.q, size=N * col_weight)
        entries = [(i, j, vals[j * col_weight + t])
                   for j in range(N) for t, i in enumerate(sorted(cols[j]))]
        return SparseParityMatrix(M, N, entries, field)
    raise RuntimeError(f"no 4-cycle-free ({col_weight},{row_weight}) matrix with N={N} "
                       f"found in {max_attempts} attempts")


def _random_sockets(N, M, wc, wr, rng):
    cap = np.full(M, wr)
    cols = np.zeros((N, wc), dtype=np.int64)
    for j in range(N):
        allowed = cap > 0
        for t in range(wc):
            cand = np.nonzero(allowed)[0]
            if cand.size == 0:
                return None
            best = cand[cap[cand] == cap[cand].max()]
            i = int(rng.choice(best))
            cols[j, t] = i
            allowed[i] = False
            cap[i] -= 1
    return cols


@njit(cache=True)
def _anneal_four_cycles(cols, M, seed, max_swaps):
    # cost = number of (check pair, extra column) repeats; zero means girth >= 6
    np.random.seed(seed)
    N, wc = cols.shape
    pair = np.zeros((M, M), dtype=np.int64)
    for j in range(N):
        for s in range(wc):
            for t in range(wc):
                if s != t:
                    pair[cols[j, s], cols[j, t]] += 1
    cost = 0
    for a in range(M):
        for b in range(a + 1, M):
            if pair[a, b] > 1:
                cost += pair[a, b] - 1
    temp = 0.6
    for step in range(max_swaps):
        if cost == 0:
            break
        if step % 10000 == 0:
            temp = max(0.05, temp * 0.97)
        j = np.random.randint(N)
        k = np.random.randint(N)
        if j == k:
            continue
        s = np.random.randint(wc)
        t = np.random.randint(wc)
        a = cols[j, s]
        b = cols[k, t]
        clash = False
        for u in range(wc):
            if cols[j, u] == b or cols[k, u] == a:
                clash = True
        if clash:
            continue
        d = 0
        # remove a from j, b from k
        for u in range(wc):
            x = cols[j, u]
            if u != s:
                if pair[a, x] > 1:
                    d -= 1
                pair[a, x] -= 1
                pair[x, a] -= 1
            y = cols[k, u]
            if u != t:
                if pair[b, y] > 1:
                    d -= 1
                pair[b, y] -= 1
                pair[y, b] -= 1
        # insert b into j, a into k
        for u in range(wc):
            if u != s:
                x = cols[j, u]
                if pair[b, x] >= 1:
                    d += 1
                pair[b, x] += 1
                pair[x, b] += 1
            if u != t:
                y = cols[k, u]
                if pair[a, y] >= 1:
                    d += 1
                pair[a, y] += 1
                pair[y, a] += 1
        if d <= 0 or np.random.random() < np.exp(-d / temp):
            cols[j, s] = b
            cols[k, t] = a
            cost += d
        else:
            for u in range(wc):
                if u != s:
                    x = cols[j, u]
                    pair[b, x] -= 1
                    pair[x, b] -= 1
                    pair[a, x] += 1
                    pair[x, a] += 1
                if u != t:
                    y = cols[k, u]
                    pair[a, y] -= 1
                    pair[y, a] -= 1
                    pair[b, y] += 1
                    pair[y, b] += 1
    return cost


# -- nonbinary alist -------------------------------------------------------

def save_alist(H: SparseParityMatrix, path):
    cw, rw = H.col_weights, H.row_weights
    maxc = int(cw.max()) if H.N else 0
    maxr = int(rw.max()) if H.M else 0
    lines = [f"{H.N} {H.M} {H.q}", f"{maxc} {maxr}",
             " ".join(map(str, cw.tolist())), " ".join(map(str, rw.tolist()))]
    for j in range(H.N):
        es = H.col_edges[H.col_ptr[j]:H.col_ptr[j + 1]]
        pairs = [f"{H.edge_row[e] + 1} {H.edge_val[e]}" for e in es]
        pairs += ["0 0"] * (maxc - len(pairs))
        lines.append(" ".join(pairs))
    with open(path, "w", encoding="ascii") as f:
        f.write("\n".join(lines) + "\n")


class AlistError(ValueError):
    pass


def load_alist(path, field: GaloisField | None = None) -> SparseParityMatrix:
    """Read a nonbinary alist file (see README for the layout).

    If ``field`` is given, the file's q must match it; otherwise the default
    field for that q is used.
    """
    with open(path, encoding="ascii") as f:
        raw = f.read().splitlines()
    lines = [(n + 1, ln.split()) for n, ln in enumerate(raw) if ln.strip()]
    name = os.path.basename(str(path))

    def fail(lineno, msg):
        raise AlistError(f"{name}:{lineno}: {msg}")

    def ints(lineno, toks):
        try:
            return [int(t) for t in toks]
        except ValueError:
            fail(lineno, f"non-integer token in {' '.join(toks)!r}")

    if len(lines) < 4:
        fail(len(raw), "truncated header")
    (l1, t1), (l2, t2), (l3, t3), (l4, t4) = lines[:4]
    hdr = ints(l1, t1)
    if len(hdr) != 3:
        fail(l1, "expected 'N M q'")
    N, M, q = hdr
    if q < 2 or q & (q - 1) or q > 256:
        fail(l1, f"q = {q} is not a power of two in [2, 256]")
    if field is None:
        field = GaloisField(q.bit_length() - 1)
    elif field.q != q:
        fail(l1, f"file declares q = {q} but the configured field is GF({field.q})")
    maxes = ints(l2, t2)
    if len(maxes) != 2:
        fail(l2, "expected 'max_col_weight max_row_weight'")
    maxc, maxr = maxes
    cw = ints(l3, t3)
    rw = ints(l4, t4)
    if len(cw) != N:
        fail(l3, f"expected {N} column weights, got {len(cw)}")
    if len(rw) != M:
        fail(l4, f"expected {M} row weights, got {len(rw)}")
    if cw and max(cw) != maxc:
        fail(l2, f"max column weight {maxc} disagrees with column weights (max {max(cw)})")
    if rw and max(rw) != maxr:
        fail(l2, f"max row weight {maxr} disagrees with row weights (max {max(rw)})")
    body = lines[4:]
    if len(body) < N:
        fail(len(raw), f"expected {N} column lines, found {len(body)}")
    entries = []
    for j in range(N):
        lineno, toks = body[j]
        vals = ints(lineno, toks)
        if len(vals) % 2:
            fail(lineno, "odd number of tokens in a 'row value' list")
        pairs = [(vals[k], vals[k + 1]) for k in range(0, len(vals), 2)]
        real = [p for p in pairs if p != (0, 0)]
        if pairs[:len(real)] != real:
            fail(lineno, "padding '0 0' must come after the real entries")
        if len(real) != cw[j]:
            fail(lineno, f"column {j + 1} declares weight {cw[j]} but lists {len(real)} entries")
        for r, h in real:
            if not 1 <= r <= M:
                fail(lineno, f"row index {r} outside [1, {M}]")
            if not 1 <= h < q:
                fail(lineno, f"value {h} outside [1, {q - 1}] for GF({q})")
            entries.append((r - 1, j, h))
    if len(body) > N:
        fail(body[N][0], "trailing data after the column lines")
    try:
        H = SparseParityMatrix(M, N, entries, field)
    except ValueError as exc:
        raise AlistError(f"{name}: {exc}") from None
    if H.row_weights.tolist() != rw:
        bad = int(np.nonzero(H.row_weights != np.array(rw))[0][0])
        fail(l4, f"row {bad + 1} declares weight {rw[bad]} but has {int(H.row_weights[bad])} entries")
    return H
