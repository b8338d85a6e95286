"""Fixed verification corpora behind ``spoisson verify``."""
from __future__ import annotations

import functools
from typing import Callable

from .errors import BudgetExceeded
from .identities import (DEFAULT_EVAL_BUDGET, catalog, frobenius_power_test, satisfies_multilinear,
                         series_polynomial)
from .liealg import LieAlgebra, derived_series_of_lie, lower_central_series, make_named
from .poisson import PoissonRing, degree_truncated_symmetric, truncated_hamiltonian, truncated_symmetric
from .series import (Check, CheckReport, derived_series, dimension_subalgebras, gamma_series, predicted_class_bounds,
                     upper_derived_series, upper_lie_powers, verify_commutator_products, verify_filtration_law,
                     verify_series_invariants, verify_upper_power_structure)

CHAR0_PROXY = 101

HEIS = ("heisenberg", (("m", 1),))
FIL3 = ("filiform", (("n", 3),))
FIL4 = ("filiform", (("n", 4),))
SOLV2 = ("solvable2", ())


def _fam(name, **params):
    return name, tuple(sorted(params.items()))


# every Lie algebra the corpus-wide checks run over, as (family, params, p)
CORPUS: tuple = tuple(
    [(*HEIS, p) for p in (2, 3, 5, 7)]
    + [(*_fam("heisenberg", m=2), 2)]
    + [(*FIL3, p) for p in (2, 3, 5)]
    + [(*FIL4, p) for p in (2, 3, 5)]
    + [(*_fam("abelian", n=n), p) for n in (1, 2, 3) for p in (2, 3, 5)]
    + [(*SOLV2, p) for p in (2, 3, 5, 7)]
    + [(*_fam(f, k=k), p) for f in ("char2_family_A", "char2_family_B") for k in (1, 2, 3) for p in (2, 3)]
)


@functools.lru_cache(maxsize=None)
def lie(family: str, params: tuple, p: int) -> LieAlgebra:
    return make_named(family, dict(params), p)


@functools.lru_cache(maxsize=None)
def sym(family: str, params: tuple, p: int) -> PoissonRing:
    """Shared s(L) instances so series computed by one suite are reused by the next."""
    return truncated_symmetric(lie(family, params, p))


@functools.lru_cache(maxsize=None)
def ham(m: int, p: int) -> PoissonRing:
    return truncated_hamiltonian(m, p)


@functools.lru_cache(maxsize=None)
def degtrunc(family: str, params: tuple, p: int, D: int) -> PoissonRing:
    return degree_truncated_symmetric(lie(family, params, p), D)


def _tag(family, params, p, **extra) -> dict:
    return {"family": family, "params": dict(params), "p": p, **extra}


def _corpus(max_dim: int | None = None):
    for family, params, p in CORPUS:
        L = lie(family, params, p)
        if max_dim is not None and p**L.dim > max_dim:
            continue
        yield family, params, p


def _is_nilpotent(L: LieAlgebra) -> bool:
    return lower_central_series(L).terminates


def suite_nilp_theorem() -> CheckReport:
    """s(L) is Lie nilpotent exactly when L is nilpotent (dim L^2 is finite here)."""
    checks = []
    for family, params, p in _corpus(625):
        L = lie(family, params, p)
        g = gamma_series(sym(family, params, p))
        want = _is_nilpotent(L)
        checks.append(Check(f"s({L.name}) over F_{p}: lie nilpotent == L nilpotent", g.terminates == want,
                            _tag(family, params, p, L_nilpotent=want, gamma_dims=list(g.dims))))
    return CheckReport("nilp-theorem", tuple(checks))


def suite_class_formula() -> CheckReport:
    checks = []
    for fam in (HEIS, FIL4):
        for p in (2, 3, 5, 7):
            L = lie(*fam, p)
            strong, _ = predicted_class_bounds(L)
            u = upper_lie_powers(sym(*fam, p))
            checks.append(Check(f"strong class of s({L.name}) over F_{p} = {strong}", u.class_or_length == strong,
                                _tag(*fam, p, computed=u.class_or_length, formula=strong)))
    return CheckReport("class-formula", tuple(checks))


def suite_class_coincide() -> CheckReport:
    checks = []
    for fam, primes in ((HEIS, (5, 7)), (FIL3, (5,)), (FIL4, (5,))):
        for p in primes:
            R = sym(*fam, p)
            lie_c, strong_c = gamma_series(R).class_or_length, upper_lie_powers(R).class_or_length
            formula, _ = predicted_class_bounds(lie(*fam, p))
            checks.append(Check(f"lie class = strong class = formula for {R.name} over F_{p}",
                                lie_c == strong_c == formula,
                                _tag(*fam, p, lie_class=lie_c, strong_class=strong_c, formula=formula)))
    return CheckReport("class-coincide-p>3", tuple(checks))


def suite_lower_bound() -> CheckReport:
    checks = []
    for fam in (HEIS, FIL3, FIL4):
        for p in (2, 3):
            R = sym(*fam, p)
            strong, lower = predicted_class_bounds(lie(*fam, p))
            lie_c, strong_c = gamma_series(R).class_or_length, upper_lie_powers(R).class_or_length
            ok = lie_c is not None and lower <= lie_c <= strong_c == strong
            checks.append(Check(f"{lower} <= lie class <= {strong} for {R.name} over F_{p}", ok,
                                _tag(*fam, p, lie_class=lie_c, strong_class=strong_c, lower_bound=lower)))
    return CheckReport("lower-bound-p23", tuple(checks))


def suite_dim_subalg() -> CheckReport:
    checks = []
    for family, params, p in _corpus(625):
        R = sym(family, params, p)
        for d in dimension_subalgebras(R):
            checks.append(Check(f"L ∩ {R.name}^({d.n}) = gamma_{d.n + 1}(L) over F_{p}", d.equal,
                                _tag(family, params, p, n=d.n, dim=d.dim, gamma_dim=d.gamma_dim)))
    return CheckReport("dim-subalg", tuple(checks))


UPPER_POWER_CORPUS = ((*HEIS, 2), (*HEIS, 3), (*FIL4, 2), (*FIL3, 3), (*_fam("heisenberg", m=2), 2))


def suite_upper_power_structure() -> CheckReport:
    checks = []
    for family, params, p in UPPER_POWER_CORPUS:
        rep = verify_upper_power_structure(sym(family, params, p))
        checks.extend(Check(c.label + f" in {sym(family, params, p).name} over F_{p}", c.holds,
                            _tag(family, params, p, **c.info)) for c in rep.checks)
    return CheckReport("upper-power-structure", tuple(checks))


def suite_filtration() -> CheckReport:
    checks = []
    for family, params, p in UPPER_POWER_CORPUS:
        R = sym(family, params, p)
        for rep in (verify_filtration_law(R), verify_series_invariants(R)):
            checks.extend(Check(c.label + f" in {R.name} over F_{p}", c.holds, _tag(family, params, p, **c.info))
                          for c in rep.checks)
    return CheckReport("filtration", tuple(checks))


def suite_commutator_products() -> CheckReport:
    checks = []
    for fam in (HEIS, FIL4):
        for p in (2, 3, 5):
            R = sym(*fam, p)
            rep = verify_commutator_products(R, nmax=6)
            checks.extend(Check(c.label + f" in {R.name} over F_{p}", c.holds, _tag(*fam, p, **c.info))
                          for c in rep.checks)
    return CheckReport("commutator-products", tuple(checks))


def suite_solv_theorem() -> CheckReport:
    """For p >= 3, s(L) of a finite-dimensional solvable L is solvable and strongly solvable."""
    checks = []
    for family, params, p in _corpus(625):
        if p < 3:
            continue
        L = lie(family, params, p)
        if not derived_series_of_lie(L).terminates:
            continue
        R = sym(family, params, p)
        d, dt = derived_series(R), upper_derived_series(R)
        checks.append(Check(f"{R.name} over F_{p} solvable and strongly solvable", d.terminates and dt.terminates,
                            _tag(family, params, p, length=d.class_or_length, strong_length=dt.class_or_length)))
    return CheckReport("solv-theorem-p>=3", tuple(checks))


def suite_char2() -> CheckReport:
    checks = []
    H = ham(1, 2)
    d, dt = derived_series(H), upper_derived_series(H)
    checks.append(Check("h_2(F_2) derived dims = [4, 3, 1, 0]", list(d.dims) == [4, 3, 1, 0],
                        {"ring": H.name, "dims": list(d.dims)}))
    checks.append(Check("h_2(F_2) upper derived series stabilizes at dim 4",
                        not dt.terminates and dt.stable_dim == 4, {"ring": H.name, "dims": list(dt.dims)}))
    for family in ("char2_family_A", "char2_family_B"):
        last = 0
        for k in (1, 2, 3):
            params = (("k", k),)
            R = sym(family, params, 2)
            d, dt = derived_series(R), upper_derived_series(R)
            info = _tag(family, params, 2, length=d.class_or_length, strong_length=dt.class_or_length)
            checks.append(Check(f"{R.name}: solvable of length <= 3",
                                d.terminates and d.class_or_length <= 3, info))
            checks.append(Check(f"{R.name}: strongly solvable", dt.terminates, info))
            checks.append(Check(f"{R.name}: strong length nondecreasing in k",
                                dt.terminates and dt.class_or_length >= last, {**info, "previous": last}))
            last = dt.class_or_length or last
    return CheckReport("char2-counterexamples", tuple(checks))


def suite_shestakov() -> CheckReport:
    """Finite-depth evidence that S(L) over characteristic 0 is solvable only for abelian L.

    F_101 stands in for characteristic 0. For heisenberg(1) every bracket is a
    multiple of the central z, so delta_3 lies in z^7 S and first survives at
    degree cap 7; the depth used for it is 7.
    """
    p = CHAR0_PROXY
    checks = []
    for fam, d_gamma, d_delta in ((SOLV2, 6, 6), (HEIS, 6, 7)):
        R = degtrunc(*fam, p, d_gamma)
        g = gamma_series(R)
        checks.append(Check(f"{R.name}: gamma_n != 0 for n <= 5",
                            all(g.terms[min(n - 1, len(g.terms) - 1)].dim for n in range(1, 6)),
                            _tag(*fam, p, D=d_gamma, gamma_dims=list(g.dims))))
        Rd = degtrunc(*fam, p, d_delta)
        dd = derived_series(Rd)
        checks.append(Check(f"{Rd.name}: delta_3 != 0", dd.terms[min(3, len(dd.terms) - 1)].dim > 0,
                            _tag(*fam, p, D=d_delta, derived_dims=list(dd.dims))))
    ab = _fam("abelian", n=2)
    R = degtrunc(*ab, p, 6)
    for kind, rep in (("gamma", gamma_series(R)), ("upper_lie", upper_lie_powers(R)),
                      ("derived", derived_series(R)), ("upper_derived", upper_derived_series(R))):
        checks.append(Check(f"{R.name}: {kind} terminates at step 1", rep.terminates and rep.class_or_length == 1,
                            _tag(*ab, p, D=6, kind=kind, dims=list(rep.dims))))
    l6 = derived_series(degtrunc(*SOLV2, p, 6)).class_or_length
    l12 = derived_series(degtrunc(*SOLV2, p, 12)).class_or_length
    checks.append(Check("derived length of S(solvable2) grows from D=6 to D=12",
                        l6 is not None and l12 is not None and l12 > l6, {"length_D6": l6, "length_D12": l12}))
    return CheckReport("shestakov-extension", tuple(checks))


def small_rings(max_dim: int = 30) -> list[PoissonRing]:
    """Every corpus ring of dimension <= max_dim, including Hamiltonian and degree-truncated ones."""
    rings = [sym(f, pa, p) for f, pa, p in _corpus(max_dim)]
    rings += [ham(1, 2), ham(1, 3), ham(2, 2)]
    for fam, D in ((SOLV2, 3), (SOLV2, 6), (HEIS, 3), (_fam("abelian", n=2), 6)):
        rings.append(degtrunc(*fam, CHAR0_PROXY, D))
    return [R for R in rings if R.dim <= max_dim]


_AGREEMENT = (("solvability", derived_series), ("nilpotence", gamma_series),
              ("strong_solvability", upper_derived_series), ("strong_nilpotence", upper_lie_powers))


def identity_series_agreement(R: PoissonRing, budget: int = DEFAULT_EVAL_BUDGET,
                              kinds=("solvability",)) -> list[Check]:
    """Compare identity verdicts with series verdicts at every level the budget allows.

    The level-s identity holds exactly when the level-s term vanishes:
    delta_s, gamma_{s+1}, delta~_s or R^(s) respectively.
    """
    out = []
    for kind, fn in _AGREEMENT:
        if kind not in kinds:
            continue
        rep = fn(R)
        s = 1
        while True:
            poly = series_polynomial(kind, s)
            if R.dim**poly.arity > budget:
                break
            index = s  # position of the level-s term in rep.terms
            want = rep.terms[min(index, len(rep.terms) - 1)].dim == 0
            try:
                v = satisfies_multilinear(R, poly, budget)
            except BudgetExceeded:
                break
            out.append(Check(f"{poly.name} on {R.name}: identity {'holds' if v.satisfied else 'fails'}, "
                             f"series term {'vanishes' if want else 'nonzero'}", v.satisfied == want,
                             {"ring": R.name, "p": R.p, "dim": R.dim, "kind": kind, "level": s}))
            if want:
                break  # higher levels follow
            s += 1
    return out


def suite_identities() -> CheckReport:
    checks = []
    st4 = catalog("st4")
    for p in (2, 3):
        v = satisfies_multilinear(ham(1, p), st4)
        checks.append(Check(f"st4 on h_2(F_{p}) satisfied ({v.checked} tuples)", v.satisfied, v.to_dict()))
    v = satisfies_multilinear(ham(1, 2), catalog("nilp1"))
    checks.append(Check("nilp1 on h_2(F_2) fails at (x, y)",
                        v.status == "counterexample" and v.counterexample == ("x^1", "y^1"), v.to_dict()))
    v = satisfies_multilinear(ham(1, 2), catalog("solv3"))
    checks.append(Check("solv3 on h_2(F_2) satisfied", v.satisfied, v.to_dict()))
    for p in (2, 3, 5):
        rep = frobenius_power_test(sym(*HEIS, p), 1000, seed=p)
        checks.append(Check(f"{{f,g}}^{p} = 0 on s(heisenberg(1)) over F_{p}, 1000 trials",
                            rep.ok and rep.tested == 1000, rep.to_dict()))
    rep = frobenius_power_test(ham(1, 2), 100, seed=0)
    checks.append(Check("{f,g}^2 = 0 on h_2(F_2) for constant-free brackets", rep.ok, rep.to_dict()))
    for R in small_rings(30):
        checks.extend(identity_series_agreement(R))
    return CheckReport("identities", tuple(checks))


SUITES: dict[str, Callable[[], CheckReport]] = {
    "nilp-theorem": suite_nilp_theorem,
    "class-formula": suite_class_formula,
    "class-coincide-p>3": suite_class_coincide,
    "lower-bound-p23": suite_lower_bound,
    "dim-subalg": suite_dim_subalg,
    "upper-power-structure": suite_upper_power_structure,
    "filtration": suite_filtration,
    "commutator-products": suite_commutator_products,
    "solv-theorem-p≥3": suite_solv_theorem,
    "char2-counterexamples": suite_char2,
    "shestakov-extension": suite_shestakov,
    "identities": suite_identities,
}

ALIASES = {"solv-theorem-p>=3": "solv-theorem-p≥3", "solv-theorem": "solv-theorem-p≥3",
           "class-coincide": "class-coincide-p>3", "lower-bound": "lower-bound-p23"}


def run_suite(name: str) -> CheckReport:
    key = ALIASES.get(name, name)
    if key not in SUITES:
        raise KeyError(f"unknown suite {name!r}; known: {', '.join(SUITES)}")
    return SUITES[key]()
