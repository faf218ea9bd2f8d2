import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nbisi import _ops
from nbisi.code import SparseParityMatrix, random_regular_code, syndrome
from nbisi.decode import (TruncationRule, cnode_ems, cnode_qspa, gmlgd_extrinsic, gmlgd_update,
                          mu_threshold, permute_to_check, permute_to_variable, truncate,
                          vnode_decide, vnode_to_hnode, vnode_to_tnode)
from nbisi.gf import GaloisField

from oracles import cnode_max_oracle, cnode_sum_oracle

GF4 = GaloisField(2)
GF16 = GaloisField(4)


def test_mu_truncation_examples():
    v = np.array([10, 2, 0, 4])
    assert mu_threshold(v, 1) == 3
    assert truncate(v, TruncationRule.mu(1)).tolist() == [0, 3]
    assert truncate(np.zeros(4, dtype=int), TruncationRule.mu(1)).tolist() == [0, 1, 2, 3]
    assert truncate(v, TruncationRule.M(2)).tolist() == [0, 3]


def test_other_rules():
    v = np.array([5, 9, 9, 0, 3, 7, 1, 9])
    assert truncate(v, TruncationRule.M(2)).tolist() == [1, 2]
    assert truncate(v, TruncationRule.T(5)).tolist() == [0, 1, 2, 5, 7]
    assert truncate(v, TruncationRule.D(2)).tolist() == [1, 2, 5, 7]
    assert truncate(v, TruncationRule.full()).tolist() == list(range(8))
    # the argmax survives an impossible threshold
    assert truncate(v, TruncationRule.T(100)).tolist() == [1]
    with pytest.raises(ValueError):
        TruncationRule.M(0)
    with pytest.raises(ValueError):
        TruncationRule("x", 1)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(0, 100), min_size=16, max_size=16), st.integers(0, 30),
       st.integers(0, 30), st.integers(1, 15))
def test_truncation_monotone(vals, c1, c2, M):
    v = np.array(vals)
    lo, hi = sorted((c1, c2))
    assert set(truncate(v, TruncationRule.mu(lo))) <= set(truncate(v, TruncationRule.mu(hi)))
    assert set(truncate(v, TruncationRule.M(M))) <= set(truncate(v, TruncationRule.M(M + 1)))
    assert int(np.argmax(v)) in truncate(v, TruncationRule.mu(lo))
    assert len(truncate(v, TruncationRule.M(M))) == M


def test_vnode_to_hnode():
    rng = np.random.default_rng(0)
    assert (vnode_to_hnode(np.zeros(4), np.zeros((3, 4)), 1) == 0).all()
    det = rng.integers(0, 50, 4)
    assert (vnode_to_hnode(det, np.zeros((1, 4)), 0) == det - det.min()).all()
    inc = rng.integers(0, 50, (3, 4))
    expect = det + inc[0] + inc[2]
    assert vnode_to_hnode(det, inc, 1).tolist() == (expect - expect.min()).tolist()


def test_permutations():
    v = np.arange(4) * 10
    assert (permute_to_check(v, 1, GF4) == v).all()
    for h in range(1, 16):
        w = np.random.default_rng(h).integers(0, 99, 16)
        assert (permute_to_variable(permute_to_check(w, h, GF16), h, GF16) == w).all()
    out = permute_to_check(v, 2, GF4)
    inv2 = GF4.inv(2)
    assert out.tolist() == [v[GF4.mul(inv2, y)] for y in range(4)]
    with pytest.raises(ValueError):
        permute_to_check(v, 0, GF4)


@pytest.mark.parametrize("q", [4, 16])
@pytest.mark.parametrize("d", [2, 3, 4])
def test_ems_full_field_equals_oracle(q, d):
    rng = np.random.default_rng(q * 10 + d)
    for _ in range(5 if q == 16 and d == 4 else 10):
        L = rng.integers(0, 200, (d, q))
        L -= L.min(axis=1, keepdims=True)
        out = cnode_ems(L)
        expect = cnode_max_oracle(L)
        assert (out == expect - expect.min(axis=1, keepdims=True)).all()


def test_ems_degree_two_copies_other_message():
    L = np.array([[0, 5, 9, 2], [7, 0, 3, 1]])
    out = cnode_ems(L)
    assert out[0].tolist() == [7, 0, 3, 1] and out[1].tolist() == [0, 5, 9, 2]
    assert cnode_ems(L, scale=0.5)[0].tolist() == [4, 0, 2, 1]
    with pytest.raises(ValueError):
        cnode_ems(L[:1])


def test_ems_delta_like_inputs():
    L = np.zeros((3, 16), dtype=np.int64)
    L[0, 5] = 100
    L[1, 9] = 100
    out = cnode_ems(L, TruncationRule.mu(1), TruncationRule.mu(1))
    assert int(np.argmax(out[2])) == 5 ^ 9


def test_ems_branch_truncation_equals_restricted_oracle():
    """With a full state rule only the branch sets restrict the search."""
    rng = np.random.default_rng(4)
    rule = TruncationRule.mu(-8)
    for _ in range(20):
        L = rng.integers(0, 60, (4, 16))
        L -= L.min(axis=1, keepdims=True)
        F = [set(truncate(row, rule).tolist()) for row in L]
        out = cnode_ems(L, TruncationRule.full(), rule)
        for e in range(4):
            others = [k for k in range(4) if k != e]
            best = np.full(16, -1)
            for assign in itertools.product(*[sorted(F[k]) for k in others]):
                y = 0
                for a in assign:
                    y ^= a
                best[y] = max(best[y], sum(int(L[k, a]) for k, a in zip(others, assign)))
            expect = np.where(best >= 0, best, 0)
            expect -= expect.min()
            assert out[e].tolist() == expect.tolist()


def test_ems_output_range_and_counts():
    rng = np.random.default_rng(8)
    L = rng.integers(0, 511, (8, 16))
    L -= L.min(axis=1, keepdims=True)
    c = np.zeros((2, _ops.N_SLOTS), dtype=np.int64)
    out = cnode_ems(L, TruncationRule.mu(0), TruncationRule.mu(0), scale=0.75, counts=c)
    assert (out.min(axis=1) == 0).all() and out.max() <= 8 * 511
    cfg = c[_ops.DECODER, _ops.CONFIGS]
    assert cfg > 0
    assert c[_ops.DECODER, _ops.FIELD_OP] == cfg
    c2 = np.zeros_like(c)
    cnode_ems(L, counts=c2)
    assert c2[_ops.DECODER, _ops.CONFIGS] > cfg


@pytest.mark.parametrize("q", [4, 16])
@pytest.mark.parametrize("d", [2, 3, 4])
def test_qspa_equals_oracle(q, d):
    rng = np.random.default_rng(d + q)
    P = rng.dirichlet(np.ones(q), d)
    out = cnode_qspa(P)
    np.testing.assert_allclose(out, cnode_sum_oracle(P), atol=1e-12, rtol=0)
    np.testing.assert_allclose(out.sum(axis=1), 1.0, atol=1e-12)


def test_qspa_trivial_cases():
    P = np.random.default_rng(1).dirichlet(np.ones(4), 2)
    out = cnode_qspa(P)
    np.testing.assert_allclose(out, P[::-1], atol=1e-15)
    np.testing.assert_allclose(cnode_qspa(np.full((5, 16), 1 / 16)), 1 / 16, atol=1e-15)


def test_vnode_decide_and_feedback():
    det = np.array([3, 0, 8, 1])
    total, v = vnode_decide(det, np.zeros((0, 4)))
    assert v == 2 and (vnode_to_tnode(total, det) == 0).all()
    chk = np.array([[0, 4, 0, 9], [2, 6, 0, 0]])
    total, v = vnode_decide(np.zeros(4), chk)
    assert v == 1 and total.tolist() == [2, 10, 0, 9]
    rng = np.random.default_rng(3)
    det = rng.integers(0, 40, 4)
    chk = rng.integers(0, 40, (3, 4))
    total, v = vnode_decide(det, chk)
    expect = det + chk[0] + chk[1] + chk[2]
    assert total.tolist() == expect.tolist() and v == int(np.argmax(expect))
    fb = chk.sum(axis=0)
    assert vnode_to_tnode(total, det).tolist() == (fb - fb.min()).tolist()


def small_code():
    return random_regular_code(16, 2, 4, GF16, seed=2)


def test_gmlgd_extrinsic_matches_definition():
    H = small_code()
    rng = np.random.default_rng(5)
    for _ in range(10):
        v = rng.integers(0, 16, 16)
        s = syndrome(H, v)
        sig = gmlgd_extrinsic(H, v, s)
        for e in range(H.delta):
            i, j = H.edge_row[e], H.edge_col[e]
            acc = 0
            for e2 in range(H.row_ptr[i], H.row_ptr[i + 1]):
                if H.edge_col[e2] != j:
                    acc ^= GF16.mul(int(H.edge_val[e2]), int(v[H.edge_col[e2]]))
            assert sig[e] == GF16.mul(GF16.inv(int(H.edge_val[e])), acc)


def test_gmlgd_single_error_vote():
    from nbisi.code import Encoder
    H = small_code()
    v = Encoder(H).encode(np.arange(Encoder(H).k) % 16)
    assert (gmlgd_extrinsic(H, v, syndrome(H, v)) == v[H.edge_col]).all()
    w = v.copy()
    w[3] ^= 7
    sig = gmlgd_extrinsic(H, w, syndrome(H, w))
    for e in np.nonzero(H.edge_col == 3)[0]:
        assert sig[e] == v[3]


def test_gmlgd_update_conservation():
    H = small_code()
    rng = np.random.default_rng(6)
    cnt = np.zeros((16, 16), dtype=np.int64)
    v = rng.integers(0, 16, 16)
    for _ in range(3):
        new = gmlgd_update(cnt, H, gmlgd_extrinsic(H, v, syndrome(H, v)))
        assert (new >= cnt).all()
        assert new.sum() == cnt.sum() + H.delta
        assert ((new - cnt).sum(axis=1) == H.col_weights).all()
        cnt = new
    # all checks satisfied: every symbol's counter at vhat gains |M_j|
    zero = np.zeros(16, dtype=np.int64)
    new = gmlgd_update(np.zeros((16, 16), dtype=np.int64), H,
                       gmlgd_extrinsic(H, zero, syndrome(H, zero)))
    assert (new[:, 0] == H.col_weights).all()
