import pytest

from spoisson import (MissingStructure, ModulusError, NotNilpotent, Subspace, make_named, predicted_class_bounds,
                      truncated_hamiltonian, truncated_symmetric)
from spoisson.series import (class_summary, derived_series, dimension_subalgebras, embedded_gamma, gamma_series,
                             upper_derived_series, upper_lie_powers, verify_commutator_products,
                             verify_filtration_law, verify_series_invariants, verify_upper_power_structure)
from spoisson.suites import degtrunc, ham, small_rings, sym

# dimension profiles frozen from tests/oracle.py (sympy polynomials, DomainMatrix ranks over GF(p))
FROZEN = {
    ("gamma", "heisenberg", 3): (27, 16, 8, 0),
    ("upper_lie", "heisenberg", 3): (27, 18, 9, 0),
    ("derived", "heisenberg", 3): (27, 16, 0),
    ("upper_lie", "heisenberg", 2): (8, 4, 0),
    ("derived", "solvable2", 3): (9, 6, 3, 0),
    ("upper_derived", "solvable2", 3): (9, 6, 3, 0),
    ("gamma", "solvable2", 2): (4, 2, 2),
    ("upper_lie", "filiform", 2): (16, 12, 8, 4, 0),
    ("gamma", "filiform", 2): (16, 10, 7, 3, 0),
    ("derived", "char2_family_A", 2): (8, 5, 1, 0),
    ("upper_derived", "char2_family_A", 2): (8, 6, 2, 0),
    ("derived", "char2_family_B", 2): (32, 18, 0),
}
PARAMS = {"heisenberg": (("m", 1),), "solvable2": (), "filiform": (("n", 4),), "char2_family_A": (("k", 2),),
          "char2_family_B": (("k", 2),)}
KIND = {"gamma": gamma_series, "upper_lie": upper_lie_powers, "derived": derived_series,
        "upper_derived": upper_derived_series}


@pytest.mark.parametrize("key", sorted(FROZEN))
def test_frozen_profiles(key):
    kind, family, p = key
    assert KIND[kind](sym(family, PARAMS[family], p)).dims == FROZEN[key]


def test_h2_profiles_frozen():
    P = ham(1, 2)
    assert gamma_series(P).dims == (4, 3, 3)
    assert derived_series(P).dims == (4, 3, 1, 0)
    assert upper_derived_series(P).dims == (4, 4)
    assert gamma_series(degtrunc("solvable2", (), 101, 3)).dims == (10, 6, 6)


def test_gamma_examples(heis, sring):
    r = gamma_series(sring("abelian", 2, n=3))
    assert r.dims == (8, 0) and r.class_or_length == 1
    P = truncated_hamiltonian(1, 2)
    assert gamma_series(P).terms[1] == P.span([P.one(), P.gen("x"), P.gen("y")])
    c = gamma_series(heis(3)).class_or_length
    assert 2 <= c <= 3


def test_upper_examples(heis, sring):
    r = upper_lie_powers(heis(3))
    assert r.dims == (27, 18, 9, 0) and r.class_or_length == 3
    assert upper_lie_powers(heis(5)).class_or_length == 5
    for n, p in ((1, 2), (2, 3), (3, 2)):
        r = upper_lie_powers(sring("abelian", p, n=n))
        assert r.dims == (p**n, 0) and r.class_or_length == 1


def test_derived_examples(sring):
    r = derived_series(ham(1, 2))
    assert r.dims == (4, 3, 1, 0) and r.class_or_length == 3
    assert r.terms[2] == ham(1, 2).span([ham(1, 2).one()])
    r = derived_series(sring("char2_family_A", 2, k=2))
    assert r.terminates and r.class_or_length <= 3
    r = derived_series(sring("solvable2", 3))
    assert r.terminates and r.class_or_length == 3


def test_upper_derived_examples(sring):
    r = upper_derived_series(ham(1, 2))
    assert r.dims == (4, 4) and not r.terminates and r.class_or_length is None
    assert upper_derived_series(sring("char2_family_A", 2, k=2)).terminates
    r = upper_derived_series(sring("abelian", 2, n=1))
    assert r.dims == (2, 0) and r.class_or_length == 1


def test_predicted_class_bounds(named):
    assert predicted_class_bounds(named("heisenberg", 5, m=1)) == (5, 2)
    assert predicted_class_bounds(named("filiform", 5, n=4)) == (13, 6)
    assert predicted_class_bounds(named("abelian", 3, n=2)) == (1, None)
    assert predicted_class_bounds(named("heisenberg", 7, m=1), 7) == (7, 2)
    with pytest.raises(NotNilpotent):
        predicted_class_bounds(named("solvable2", 3))
    with pytest.raises(ModulusError):
        predicted_class_bounds(named("heisenberg", 5, m=1), 3)


def test_dimension_subalgebras_examples(heis):
    R = heis(3)
    ds = dimension_subalgebras(R)
    # spaces are in the coordinates of L
    assert ds[0].space == R.origin.full() and ds[0].equal
    z = Subspace.coordinate(3, 3, [2])
    assert ds[1].space == z and ds[1].equal
    assert R.embed_lie_subspace(ds[1].space) == embedded_gamma(R, 2)
    assert ds[2].dim == 0 and ds[2].equal
    assert len(dimension_subalgebras(R, cap=1)) == 2
    with pytest.raises(MissingStructure):
        dimension_subalgebras(ham(1, 2))


def test_upper_power_structure_examples(heis, sring):
    rep = verify_upper_power_structure(heis(3))
    assert rep.ok
    one = next(c for c in rep.checks if c.info["n"] == 1)
    assert one.info["dim_upper"] == one.info["dim_E"] == 18
    assert verify_upper_power_structure(heis(3), nmax=0).checks[0].holds
    assert verify_upper_power_structure(sring("filiform", 2, n=4)).ok
    with pytest.raises(MissingStructure):
        verify_upper_power_structure(ham(1, 2))


def test_commutator_examples(heis):
    rep = verify_commutator_products(heis(5))
    labels = {c.label: c for c in rep.checks}
    assert labels["gamma_2 gamma_3 in gamma_4 R"].holds
    assert rep.ok
    rep2 = verify_commutator_products(heis(2))
    c = next(c for c in rep2.checks if c.info.get("n") == 2 and c.info.get("m") == 2)
    assert c.holds and c.info["hypothesis"] == "any p, n,m>=2"
    assert all(ch.info["hypothesis"] != "p>3" for ch in rep2.checks)
    assert any(ch.info["hypothesis"] == "p>3" and "word" in ch.info for ch in rep.checks)


@pytest.mark.parametrize("R", small_rings(30), ids=lambda R: R.name)
def test_series_invariants_small(R):
    assert verify_series_invariants(R).ok
    assert verify_filtration_law(R).ok


def test_class_summary_h2():
    v = class_summary(ham(1, 2))
    assert v["solvable_length"] == 3 and not v["strongly_solvable"] and not v["lie_nilpotent"]


def test_series_deterministic(sring):
    a = gamma_series(sym("filiform", (("n", 4),), 3)).dims
    b = gamma_series(truncated_symmetric(make_named("filiform", {"n": 4}, 3))).dims
    assert a == b


def test_oracle_agrees_live():
    import oracle
    assert tuple(oracle.derived_dims(oracle.hamiltonian(2))) == derived_series(ham(1, 2)).dims
    assert tuple(oracle.upper_derived_dims(oracle.hamiltonian(2))) == upper_derived_series(ham(1, 2)).dims
    assert tuple(oracle.upper_dims(oracle.heisenberg(2))) == upper_lie_powers(sym("heisenberg", (("m", 1),), 2)).dims
    assert tuple(oracle.gamma_dims(oracle.solvable2(2))) == gamma_series(sym("solvable2", (), 2)).dims
    A = oracle.family_a(2, 2)
    assert tuple(oracle.derived_dims(A)) == derived_series(sym("char2_family_A", (("k", 2),), 2)).dims


def test_heisenberg_degree_truncation_derived_depth():
    # all brackets of S(heisenberg) are multiples of the central z, so delta_3 lies in z^7 S
    R6, R7 = degtrunc("heisenberg", (("m", 1),), 101, 6), degtrunc("heisenberg", (("m", 1),), 101, 7)
    assert derived_series(R6).dims == (84, 56, 20, 0)
    d7 = derived_series(R7)
    assert d7.terms[3].dim == 1
    assert d7.terms[3] == R7.span([R7.gen("z") ** 7])
