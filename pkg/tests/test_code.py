import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nbisi.code import (AlistError, Encoder, SparseParityMatrix, is_majority_logic_decodable,
                        load_alist, random_regular_code, save_alist, syndrome)
from nbisi.gf import GaloisField

GF4 = GaloisField(2)
GF16 = GaloisField(4)

H36 = np.array([[1, 2, 0, 3, 0, 1],
                [0, 1, 1, 0, 2, 3],
                [3, 0, 2, 1, 1, 0]])


def brute_syndrome(H, v, gf):
    s = []
    for row in np.asarray(H):
        acc = 0
        for h, x in zip(row, v):
            acc ^= gf.mul(int(h), int(x))
        s.append(acc)
    return s


def brute_mld(Hd):
    S = (np.asarray(Hd) != 0).astype(int)
    M, N = S.shape
    for a, b in itertools.combinations(range(M), 2):
        if sum(S[a, j] and S[b, j] for j in range(N)) > 1:
            return False
    for a, b in itertools.combinations(range(N), 2):
        if sum(S[i, a] and S[i, b] for i in range(M)) > 1:
            return False
    return True


def fano(gf, seed=0):
    rng = np.random.default_rng(seed)
    H = np.zeros((7, 7), dtype=int)
    for i in range(7):
        for d in (0, 1, 3):
            H[i, (i + d) % 7] = rng.integers(1, gf.q)
    return H


def test_index_sets_consistent():
    H = SparseParityMatrix.from_dense(H36, GF4)
    assert H.delta == 12 == sum(len(H.row_index(i)) for i in range(3)) == sum(
        len(H.col_index(j)) for j in range(6))
    for i in range(3):
        assert H.row_index(i).tolist() == np.nonzero(H36[i])[0].tolist()
    for j in range(6):
        assert H.col_index(j).tolist() == np.nonzero(H36[:, j])[0].tolist()
    assert (H.to_dense() == H36).all()


def test_syndrome_matches_double_loop():
    H = SparseParityMatrix.from_dense(H36, GF4)
    rng = np.random.default_rng(7)
    for _ in range(20):
        v = rng.integers(0, 4, 6)
        assert syndrome(H, v).tolist() == brute_syndrome(H36, v, GF4)


def test_syndrome_linearity_single_symbol():
    H = SparseParityMatrix.from_dense(H36, GF4)
    v = np.array([1, 0, 3, 2, 2, 1])
    s0 = syndrome(H, v)
    for j in range(6):
        for dv in range(1, 4):
            w = v.copy()
            w[j] ^= dv
            s1 = syndrome(H, w)
            for i in range(3):
                expect = s0[i] ^ GF4.mul(int(H36[i, j]), dv)
                assert s1[i] == expect


def test_encoder_image_equals_null_space():
    H = SparseParityMatrix.from_dense(H36, GF4)
    enc = Encoder(H)
    assert enc.k == 3
    null = {v for v in itertools.product(range(4), repeat=6)
            if not any(brute_syndrome(H36, v, GF4))}
    image = {tuple(enc.encode(np.array(u)).tolist()) for u in itertools.product(range(4), repeat=3)}
    assert image == null
    assert len(image) == 4**3
    assert (enc.encode(np.zeros(3, dtype=int)) == 0).all()


def test_encoder_redundant_rows():
    Hd = np.vstack([H36, GF4.mul(2, H36[0]) ^ H36[1]])
    H = SparseParityMatrix.from_dense(Hd, GF4)
    enc = Encoder(H)
    assert enc.rank == 3 and enc.k == 3
    rng = np.random.default_rng(1)
    for _ in range(10):
        assert not syndrome(H, enc.encode(rng.integers(0, 4, 3))).any()


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_random_code_encodes_to_zero_syndrome(seed):
    H = random_regular_code(16, 2, 4, GF16, seed=5)
    enc = Encoder(H)
    u = np.random.default_rng(seed).integers(0, 16, enc.k)
    v = enc.encode(u)
    assert not syndrome(H, v).any()
    assert (enc.extract(v) == u).all()


def test_random_regular_code_properties():
    H = random_regular_code(16, 2, 4, GF16, seed=1)
    assert H.delta == 32
    assert set(H.col_weights.tolist()) == {2} and set(H.row_weights.tolist()) == {4}
    assert (H.edge_val > 0).all()
    # no pair of columns shares two rows (length-4 cycle scan)
    Hd = H.to_dense() != 0
    for a, b in itertools.combinations(range(16), 2):
        assert (Hd[:, a] & Hd[:, b]).sum() < 2
    assert H == random_regular_code(16, 2, 4, GF16, seed=1)


def test_random_regular_code_rejects_bad_params():
    with pytest.raises(ValueError):
        random_regular_code(10, 3, 4, GF16)
    with pytest.raises(RuntimeError):
        random_regular_code(128, 4, 16, GF16, seed=0)


def test_majority_logic_check():
    assert is_majority_logic_decodable(SparseParityMatrix.from_dense(np.eye(5, dtype=int) * 3, GF4))
    twin = np.array([[1, 1, 0], [2, 3, 0]])
    assert not is_majority_logic_decodable(SparseParityMatrix.from_dense(twin, GF4))
    F = fano(GF16)
    assert brute_mld(F)
    assert is_majority_logic_decodable(SparseParityMatrix.from_dense(F, GF16))


def test_majority_logic_agrees_with_brute_force():
    rng = np.random.default_rng(11)
    for _ in range(40):
        Hd = rng.integers(0, 4, (5, 7)) * (rng.random((5, 7)) < 0.35)
        H = SparseParityMatrix.from_dense(Hd, GF4)
        assert is_majority_logic_decodable(H) == brute_mld(Hd)


def test_alist_roundtrip(tmp_path):
    H = random_regular_code(16, 2, 4, GF16, seed=3)
    path = tmp_path / "c.alist"
    save_alist(H, path)
    assert load_alist(path, GF16) == H
    text = path.read_text().splitlines()
    assert text[0] == "16 8 16"


def test_alist_small_gf4(tmp_path):
    p = tmp_path / "s.alist"
    p.write_text("4 2 4\n2 3\n2 1 2 1\n3 3\n1 1 2 3\n2 2 0 0\n1 3 2 1\n1 2 0 0\n")
    H = load_alist(p)
    assert H.delta == 6 and H.q == 4
    assert H.to_dense().tolist() == [[1, 0, 3, 2], [3, 2, 1, 0]]


@pytest.mark.parametrize("body, msg", [
    ("4 2 4\n2 3\n2 1 2 1\n3 3\n1 4 2 3\n2 2 0 0\n1 3 2 1\n1 2 0 0\n", "value 4"),
    ("4 2 4\n2 3\n2 1 2 1\n3 3\n1 1 2 3\n2 2 0 0\n1 3 2 1\n", "column lines"),
    ("4 2 4\n2 3\n2 1 2 1\n3 3\n1 1 0 0\n2 2 0 0\n1 3 2 1\n1 2 0 0\n", "declares weight"),
    ("4 2 4\n2 3\n2 1 2 1\n3 2\n1 1 2 3\n2 2 0 0\n1 3 2 1\n1 2 0 0\n", "row 2"),
    ("4 2 8\n2 3\n2 1 2 1\n3 3\n1 1 2 3\n2 2 0 0\n1 3 2 1\n1 2 0 0\n", "configured field"),
    ("4 2 4\n2 3\n2 1 x 1\n3 3\n", "non-integer"),
])
def test_alist_errors(tmp_path, body, msg):
    p = tmp_path / "bad.alist"
    p.write_text(body)
    with pytest.raises(AlistError, match=msg):
        load_alist(p, GF4)
