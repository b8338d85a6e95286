import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spoisson import (DimensionMismatch, PairwiseMap, Subspace, bilinear_image_span, echelonize, intersection,
                      membership, subspace_sum, truncated_hamiltonian, truncated_symmetric, make_named)

CASES = 500


def is_rref(S: Subspace) -> bool:
    rows, piv = S.rows, S.pivots
    if list(piv) != sorted(set(piv)):
        return False
    for r, c in enumerate(piv):
        if rows[r, c] != 1 or np.any(rows[r, :c]):
            return False
        col = rows[:, c].copy()
        col[r] = 0
        if np.any(col):
            return False
    return bool(np.all((rows >= 0) & (rows < S.p)))


def test_echelonize_examples():
    S = echelonize([(1, 2, 0), (2, 4, 0)], 3, 5)
    assert S.dim == 1 and S.rows.tolist() == [[1, 2, 0]]
    assert echelonize([], 3, 5).dim == 0
    I = echelonize(np.eye(4, dtype=int)[::-1], 4, 3)
    assert I.rows.tolist() == np.eye(4, dtype=int).tolist()


def test_echelonize_length_mismatch():
    with pytest.raises(DimensionMismatch):
        echelonize([(1, 2)], 3, 5)


def test_membership_examples():
    S = echelonize([(1, 2, 0)], 3, 7)
    assert membership(S, (3, 6, 0))
    assert not membership(S, (0, 0, 1))
    assert membership(S, (0, 0, 0))
    assert membership(Subspace.zero(3, 7), (0, 0, 0))
    with pytest.raises(DimensionMismatch):
        membership(S, (1, 2))


def test_sum_examples():
    e1, e2 = Subspace.coordinate(3, 5, [0]), Subspace.coordinate(3, 5, [1])
    assert subspace_sum(e1, e2).dim == 2
    assert e1 + e1 == e1
    assert e1 + Subspace.zero(3, 5) == e1


def test_intersection_examples():
    a, b = Subspace.coordinate(3, 5, [0, 1]), Subspace.coordinate(3, 5, [1, 2])
    assert intersection(a, b) == Subspace.coordinate(3, 5, [1])
    assert intersection(a, Subspace.full(3, 5)) == a
    assert (Subspace.coordinate(3, 5, [0]) & Subspace.coordinate(3, 5, [1])).dim == 0


def test_ambient_mismatch():
    with pytest.raises(DimensionMismatch):
        Subspace.full(3, 5) + Subspace.full(4, 5)
    with pytest.raises(DimensionMismatch):
        Subspace.full(3, 5) & Subspace.full(3, 7)


def test_bilinear_image_examples():
    P = truncated_hamiltonian(1, 2)
    F = P.full()
    D1 = P.bracket_span(F, F)
    assert D1 == P.span([P.one(), P.gen("x"), P.gen("y")])
    assert P.bracket_span(Subspace.zero(4, 2), F).dim == 0
    A = truncated_symmetric(make_named("abelian", {"n": 2}, 3))
    assert A.bracket_span(A.full(), A.full()).dim == 0


def test_fast_and_pairwise_routes_agree(heis):
    R = heis(3)
    rng = np.random.default_rng(0)
    A = echelonize(rng.integers(0, 3, (5, R.dim)), R.dim, 3)
    B = echelonize(rng.integers(0, 3, (4, R.dim)), R.dim, 3)
    slow = PairwiseMap(lambda u, v: R.to_vector(R.bracket(R.from_vector(u), R.from_vector(v))), R.dim, 3)
    assert bilinear_image_span(A, B, slow, fast=False) == R.bracket_span(A, B)
    assert R.bracket_span(A, B) == R.bracket_span(B, A)


# -- properties ----------------------------------------------------------------

@st.composite
def matrices(draw, p=None, n=None, max_rows=7):
    p = p or draw(st.sampled_from([2, 3, 5, 7]))
    n = n or draw(st.integers(1, 7))
    k = draw(st.integers(0, max_rows))
    rows = draw(st.lists(st.lists(st.integers(0, p - 1), min_size=n, max_size=n), min_size=k, max_size=k))
    return p, n, rows


def _stack(rows, n):
    return np.array(rows, dtype=np.int64).reshape(-1, n)


@settings(max_examples=CASES, deadline=None)
@given(matrices(), st.randoms(use_true_random=False))
def test_echelon_idempotent_and_order_independent(m, rnd):
    p, n, rows = m
    S = echelonize(_stack(rows, n), n, p)
    assert is_rref(S)
    again = echelonize(S.rows, n, p)
    assert again.rows.tolist() == S.rows.tolist() and again.pivots == S.pivots
    shuffled = list(rows)
    rnd.shuffle(shuffled)
    T = echelonize(_stack(shuffled, n), n, p)
    assert T.rows.tolist() == S.rows.tolist()
    for r in rows:
        assert S.contains(r)


@st.composite
def subspace_pairs(draw):
    p = draw(st.sampled_from([2, 3, 5, 7]))
    n = draw(st.integers(1, 7))
    _, _, a = draw(matrices(p, n))
    _, _, b = draw(matrices(p, n))
    return p, n, a, b


@settings(max_examples=CASES, deadline=None)
@given(subspace_pairs())
def test_modular_dimension_law(data):
    p, n, a, b = data
    A, B = echelonize(_stack(a, n), n, p), echelonize(_stack(b, n), n, p)
    S, I = A + B, A & B
    assert S.dim + I.dim == A.dim + B.dim
    assert A <= S and B <= S and I <= A and I <= B
    assert is_rref(S) and is_rref(I)
