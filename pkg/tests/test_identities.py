import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spoisson import (ArityError, BudgetExceeded, MultilinearPoissonPolynomial, RingMismatch, ShapeViolation,
                      catalog, evaluate, frobenius_power_test, satisfies_multilinear, series_polynomial,
                      standard_polynomial)
from spoisson.identities import Br, Var, dense_tensor
from spoisson.suites import degtrunc, ham, identity_series_agreement, small_rings, sym

CASES = 500


def test_standard_polynomial_examples():
    assert str(standard_polynomial(1)) == "{x1,x2}" and len(standard_polynomial(1).terms) == 1
    st4 = standard_polynomial(2)
    assert str(st4) == "{x1,x2}*{x3,x4} - {x1,x3}*{x2,x4} + {x1,x4}*{x2,x3}"
    assert len(standard_polynomial(3).terms) == 15
    assert len(standard_polynomial(4).terms) == 105
    with pytest.raises(ArityError):
        standard_polynomial(5)
    with pytest.raises(ArityError):
        standard_polynomial(0)


def test_standard_polynomial_signs_match_brute_force():
    # sign of the permutation sigma listed pair by pair, over T_6
    def sign(perm):
        return (-1) ** sum(1 for a, b in itertools.combinations(perm, 2) if a > b)
    want = {}
    for perm in itertools.permutations(range(6)):
        pairs = [perm[i:i + 2] for i in (0, 2, 4)]
        if all(a < b for a, b in pairs) and pairs[0][0] < pairs[1][0] < pairs[2][0]:
            want[tuple(map(tuple, pairs))] = sign(perm)
    got = {tuple((f.left.slot, f.right.slot) for f in factors): c for c, factors in standard_polynomial(3).terms}
    assert got == want


def test_series_polynomial_examples():
    p = series_polynomial("nilpotence", 2)
    assert str(p) == "{{X0,X1},X2}" and p.arity == 3
    p = series_polynomial("solvability", 2)
    assert str(p) == "{{X1,X2},{X3,X4}}" and p.arity == 4
    p = series_polynomial("strong_solvability", 1)
    assert str(p) == "{X1,X2}*Y1" and p.arity == 3
    assert str(series_polynomial("strong_nilpotence", 2)) == "{{X0,X1}*Y1,X2}"
    s3 = series_polynomial("strong_solvability", 3)
    assert s3.arity == 8 + 7
    with pytest.raises(ArityError):
        series_polynomial("solvability", 6)
    with pytest.raises(ValueError):
        series_polynomial("bogus", 1)


def test_catalog_names():
    assert catalog("st4") == standard_polynomial(2)
    assert catalog("SOLV2") == series_polynomial("solvability", 2)
    for bad in ("st3", "foo1", "nilp"):
        with pytest.raises(KeyError):
            catalog(bad)


def test_polynomial_canonical_equality():
    a = MultilinearPoissonPolynomial(2, ((1, (Br(Var(0), Var(1)),)), (2, (Br(Var(0), Var(1)),))))
    b = MultilinearPoissonPolynomial(2, ((3, (Br(Var(0), Var(1)),)),))
    assert a == b
    with pytest.raises(ArityError):
        MultilinearPoissonPolynomial(3, ((1, (Br(Var(0), Var(1)),)),))


def test_evaluate_examples():
    P = ham(1, 2)
    x, y = P.gen("x"), P.gen("y")
    assert evaluate(P, standard_polynomial(1), [x, y]) == P.one()
    assert evaluate(P, standard_polynomial(2), [x, P.zero(), y, x * y]).is_zero()
    B = sym("char2_family_B", (("k", 4),), 2)
    args = [B.gen("x") * B.gen(f"y{i}") for i in range(1, 5)]
    assert evaluate(B, series_polynomial("solvability", 2), args).is_zero()
    with pytest.raises(ArityError):
        evaluate(P, standard_polynomial(2), [x, y])
    with pytest.raises(RingMismatch):
        evaluate(P, standard_polynomial(1), [x, ham(1, 3).gen("y")])


def test_satisfies_examples():
    v = satisfies_multilinear(ham(1, 3), standard_polynomial(2))
    assert v.satisfied and v.checked == 9**4
    v = satisfies_multilinear(ham(1, 2), catalog("nilp1"))
    assert v.status == "counterexample" and v.counterexample == ("x^1", "y^1") and v.value == "1"
    A = sym("abelian", (("n", 2),), 2)
    for name in ("st4", "nilp2", "solv2", "ssolv1", "snilp2"):
        assert satisfies_multilinear(A, catalog(name)).satisfied


def test_counterexample_is_canonical_minimum():
    R = sym("heisenberg", (("m", 1),), 3)
    v = satisfies_multilinear(R, catalog("nilp1"))
    assert v.counterexample == ("x^1", "y^1")
    v = satisfies_multilinear(R, catalog("nilp2"))
    assert v.status == "counterexample"
    # the reported tuple really fails and nothing of lower total degree does
    vals = [R.parse(t) for t in v.counterexample]
    assert not evaluate(R, catalog("nilp2"), vals).is_zero()
    top = sum(R.parse(t).degree() for t in v.counterexample)
    small = [k for k, m in enumerate(R.monomials) if sum(m) < top]
    for tup in itertools.product(small, repeat=3):
        if sum(sum(R.monomials[k]) for k in tup) < top:
            assert evaluate(R, catalog("nilp2"), [R.basis_element(k) for k in tup]).is_zero()


def test_exhaustive_matches_elementwise_evaluation():
    R = ham(1, 3)
    poly = catalog("snilp2")
    T = {op: dense_tensor(R, op) for op in ("bracket", "multiply")}
    assert T["bracket"].shape == (9, 9, 9)
    bad = 0
    for tup in itertools.product(range(R.dim), repeat=poly.arity):
        if not evaluate(R, poly, [R.basis_element(k) for k in tup]).is_zero():
            bad += 1
    v = satisfies_multilinear(R, poly)
    assert (bad == 0) == v.satisfied


def test_budget_and_sampling():
    R = sym("heisenberg", (("m", 1),), 5)
    with pytest.raises(BudgetExceeded):
        satisfies_multilinear(R, catalog("st4"), budget=10**6)
    with pytest.raises(ValueError):
        satisfies_multilinear(R, catalog("st4"), mode="sample")
    v = satisfies_multilinear(R, catalog("st4"), mode="sample", seed=3, samples=50)
    assert v.mode == "sample" and v.status in ("sampled_no_counterexample", "counterexample") and v.seed == 3
    w = satisfies_multilinear(R, catalog("st4"), mode="sample", seed=3, samples=50)
    assert v == w
    v = satisfies_multilinear(ham(1, 3), catalog("nilp1"), mode="sample", seed=0, samples=20)
    assert v.status == "counterexample" and v.mode == "sample"


def test_frobenius_examples():
    rep = frobenius_power_test(sym("heisenberg", (("m", 1),), 3), 100, seed=1)
    assert rep.ok and rep.tested == 100 and rep.excluded_constant == 0
    rep = frobenius_power_test(ham(1, 2), 100, seed=1)
    assert rep.ok and rep.tested + rep.excluded_constant == 100 and rep.excluded_constant > 0
    R = ham(1, 3)
    f = R.parse("x^1 + x^1*y^2")
    assert R.bracket(f, f).is_zero() and (R.bracket(f, f) ** 3).is_zero()
    with pytest.raises(ShapeViolation):
        frobenius_power_test(degtrunc("solvable2", (), 101, 3), 10, seed=0)


def test_frobenius_deterministic():
    R = sym("filiform", (("n", 3),), 3)
    assert frobenius_power_test(R, 50, seed=9) == frobenius_power_test(R, 50, seed=9)


@pytest.mark.parametrize("R", small_rings(30), ids=lambda R: R.name)
def test_identity_series_agreement(R):
    checks = identity_series_agreement(R, kinds=("solvability", "nilpotence", "strong_solvability",
                                                 "strong_nilpotence"))
    assert checks and all(c.holds for c in checks), [c.label for c in checks if not c.holds]


# -- properties ----------------------------------------------------------------

RINGS = [lambda: ham(1, 3), lambda: sym("heisenberg", (("m", 1),), 3), lambda: sym("filiform", (("n", 4),), 2),
         lambda: degtrunc("solvable2", (), 101, 4)]


def _elem(R, draw):
    v = np.array(draw(st.lists(st.integers(0, R.p - 1), min_size=R.dim, max_size=R.dim)), dtype=np.int64)
    mask = np.array(draw(st.lists(st.booleans(), min_size=R.dim, max_size=R.dim)))
    return R.from_vector(v * (mask & (np.arange(R.dim) % 3 == 0)))


@settings(max_examples=CASES, deadline=None)
@given(st.sampled_from(range(len(RINGS))), st.sampled_from(["st4", "solv2", "ssolv1", "nilp3"]), st.data())
def test_multilinear_in_each_slot(ring, name, data):
    R, poly = RINGS[ring](), catalog(name)
    args = [_elem(R, data.draw) for _ in range(poly.arity)]
    i = data.draw(st.integers(0, poly.arity - 1))
    u, w = _elem(R, data.draw), _elem(R, data.draw)
    a, b = data.draw(st.integers(0, R.p - 1)), data.draw(st.integers(0, R.p - 1))

    def at(val):
        return evaluate(R, poly, args[:i] + [val] + args[i + 1:])
    assert at(u * a + w * b) == at(u) * a + at(w) * b


@settings(max_examples=CASES, deadline=None)
@given(st.sampled_from(range(len(RINGS))), st.sampled_from([1, 2, 3]), st.data())
def test_standard_polynomial_alternating(ring, n, data):
    R, poly = RINGS[ring](), standard_polynomial(n)
    args = [_elem(R, data.draw) for _ in range(poly.arity)]
    i, j = data.draw(st.lists(st.integers(0, poly.arity - 1), min_size=2, max_size=2, unique=True))
    swapped = list(args)
    swapped[i], swapped[j] = args[j], args[i]
    assert evaluate(R, poly, swapped) == -evaluate(R, poly, args)
    repeated = list(args)
    repeated[j] = args[i]
    assert evaluate(R, poly, repeated).is_zero()
