"""The four descending series of a Poisson ring and the structural checks built on them."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Any

from .errors import MissingStructure, ModulusError, NotNilpotent
from .field import as_modulus
from .liealg import LieAlgebra, SeriesReport, descending_chain, gamma_quotient_dims, lower_central_series
from .poisson import PoissonRing, height_filtration_space
from .subspace import Subspace

SERIES_KINDS = ("gamma", "upper_lie", "derived", "upper_derived")


def _cached(R: PoissonRing, kind: str, build):
    key = ("series", kind)
    if key not in R._memo:
        R._memo[key] = build()
    return R._memo[key]


def gamma_series(R: PoissonRing) -> SeriesReport:
    """gamma_1 = R, gamma_{n+1} = {gamma_n, R}; dims run gamma_1, ..., gamma_{s+1}."""
    F = R.full()
    return _cached(R, "gamma", lambda: descending_chain("gamma", F, lambda A: R.bracket_span(A, F)))


def upper_lie_powers(R: PoissonRing) -> SeriesReport:
    """R^(0) = R, R^(n) = {R^(n-1), R} . R."""
    F = R.full()
    return _cached(R, "upper_lie", lambda: descending_chain(
        "upper_lie", F, lambda A: R.product_span(R.bracket_span(A, F), F)))


def derived_series(R: PoissonRing) -> SeriesReport:
    return _cached(R, "derived", lambda: descending_chain(
        "derived", R.full(), lambda A: R.bracket_span(A, A)))


def upper_derived_series(R: PoissonRing) -> SeriesReport:
    """delta~_{n+1} = {delta~_n, delta~_n} . R."""
    F = R.full()
    return _cached(R, "upper_derived", lambda: descending_chain(
        "upper_derived", F, lambda A: R.product_span(R.bracket_span(A, A), F)))


def series(R: PoissonRing, kind: str) -> SeriesReport:
    return {"gamma": gamma_series, "upper_lie": upper_lie_powers, "derived": derived_series,
            "upper_derived": upper_derived_series}[kind](R)


def term(report: SeriesReport, k: int) -> Subspace:
    """k-th stored term (0-based in ``terms``); past the end the chain is constant."""
    return report.terms[min(k, len(report.terms) - 1)]


def gamma_term(R: PoissonRing, n: int) -> Subspace:
    """gamma_n(R) for n >= 1."""
    return term(gamma_series(R), n - 1)


def upper_power(R: PoissonRing, n: int) -> Subspace:
    return term(upper_lie_powers(R), n)


def predicted_class_bounds(L: LieAlgebra, p=None) -> tuple[int, int | None]:
    """(strong class of s(L), lower bound for its Lie class); the bound is None for abelian L."""
    if p is not None and as_modulus(p).p != L.p:
        raise ModulusError(f"algebra is defined over F_{L.p}, not F_{as_modulus(p).p}")
    if not lower_central_series(L).terminates:
        raise NotNilpotent(f"{L.name} is not nilpotent over F_{L.p}")
    d = gamma_quotient_dims(L)  # d[0] = d_1
    strong = 1 + (L.p - 1) * sum(n * dn for n, dn in enumerate(d, start=1))
    if L.is_abelian():
        return strong, None
    lower = 2 + (L.p - 1) * sum((n - 1) * dn for n, dn in enumerate(d, start=1) if n >= 2)
    return strong, lower


@dataclass(frozen=True)
class Check:
    """One verified statement; ``info`` holds the instance data shown on failure."""

    label: str
    holds: bool
    info: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"label": self.label, "holds": self.holds, **self.info}


@dataclass(frozen=True)
class CheckReport:
    name: str
    checks: tuple[Check, ...]

    @property
    def ok(self) -> bool:
        return all(c.holds for c in self.checks)

    def first_failure(self) -> Check | None:
        return next((c for c in self.checks if not c.holds), None)

    def to_dict(self) -> dict[str, Any]:
        return {"name": self.name, "ok": self.ok, "checks": [c.to_dict() for c in self.checks]}

    def __bool__(self):
        return self.ok


@dataclass(frozen=True)
class DimensionSubalgebra:
    n: int
    space: Subspace = field(compare=False, repr=False)
    gamma: Subspace = field(compare=False, repr=False)
    dim: int = 0
    gamma_dim: int = 0
    equal: bool = False


def dimension_subalgebras(R: PoissonRing, cap: int | None = None) -> list[DimensionSubalgebra]:
    """``L ∩ R^(n)`` for n = 0, 1, ... together with a comparison against gamma_{n+1}(L).

    Stops after the first n where both sides vanish, or at ``cap``.
    """
    if R.origin is None:
        raise MissingStructure("ring has no Lie origin")
    L = R.origin
    lcs = lower_central_series(L)
    ups = upper_lie_powers(R)
    out = []
    n = 0
    while cap is None or n <= cap:
        D = R.restrict_to_lie(term(ups, n))
        g = term(lcs, n)  # gamma_{n+1}
        out.append(DimensionSubalgebra(n, D, g, D.dim, g.dim, D == g))
        if D.dim == 0 and g.dim == 0:
            break
        if cap is None and n >= max(len(ups.terms), len(lcs.terms)) - 1:
            break  # both chains are constant from here on
        n += 1
    return out


def verify_upper_power_structure(R: PoissonRing, nmax: int | None = None) -> CheckReport:
    """Compare R^(n) with the height filtration space E_n."""
    if R.heights is None:
        raise MissingStructure("ring carries no heights")
    ups = upper_lie_powers(R)
    top = len(ups.terms) - 1 if nmax is None else nmax
    checks = []
    for n in range(top + 1):
        A, E = term(ups, n), height_filtration_space(R, n)
        checks.append(Check(f"R^({n}) = E_{n}", A == E, {"n": n, "dim_upper": A.dim, "dim_E": E.dim}))
    return CheckReport("upper-power-structure", tuple(checks))


def verify_filtration_law(R: PoissonRing, imax: int | None = None) -> CheckReport:
    """R^(i) R^(j) and {R^(i), R^(j)} lie in R^(i+j) for all computed i <= j."""
    ups = upper_lie_powers(R)
    top = len(ups.terms) - 1 if imax is None else imax
    checks = []
    for i in range(top + 1):
        for j in range(i, top + 1):
            A, B, T = term(ups, i), term(ups, j), term(ups, i + j)
            prod = R.product_span(A, B) <= T
            br = R.bracket_span(A, B) <= T
            checks.append(Check(f"R^({i}) R^({j}) in R^({i + j})", prod, {"i": i, "j": j, "op": "product"}))
            checks.append(Check(f"{{R^({i}), R^({j})}} in R^({i + j})", br, {"i": i, "j": j, "op": "bracket"}))
    return CheckReport("filtration", tuple(checks))


def verify_series_invariants(R: PoissonRing) -> CheckReport:
    """gamma_n in R^(n-1), delta_s in delta~_s, and the class/length orderings."""
    g, u = gamma_series(R), upper_lie_powers(R)
    d, dt = derived_series(R), upper_derived_series(R)
    checks = []
    for n in range(1, len(g.terms) + 1):
        checks.append(Check(f"gamma_{n} in R^({n - 1})", gamma_term(R, n) <= term(u, n - 1), {"n": n}))
    for s in range(max(len(d.terms), len(dt.terms))):
        checks.append(Check(f"delta_{s} in delta~_{s}", term(d, s) <= term(dt, s), {"s": s}))
    if g.terminates and u.terminates:
        checks.append(Check("lie class <= strong class", g.class_or_length <= u.class_or_length,
                            {"lie": g.class_or_length, "strong": u.class_or_length}))
    if d.terminates and dt.terminates:
        checks.append(Check("length <= strong length", d.class_or_length <= dt.class_or_length,
                            {"length": d.class_or_length, "strong": dt.class_or_length}))
    return CheckReport("series-invariants", tuple(checks))


def _left_normed(R: PoissonRing, gens) -> Any:
    c = gens[0]
    for g in gens[1:]:
        c = R.bracket(c, g)
    return c


def verify_commutator_products(R: PoissonRing, nmax: int = 6, sample_length: int = 4) -> CheckReport:
    """Inclusions between products of lower central terms.

    For p > 3: gamma_n gamma_m in gamma_{n+m-1} R when n or m is odd, and
    {x_1, ..., x_n}^m in gamma_{(n-1)m+1} R on left-normed commutators of
    generators. For every p: gamma_n gamma_m in gamma_{n+m-2} R for n, m >= 2.
    """
    F = R.full()
    ideal_cache: dict[int, Subspace] = {}

    def gR(k):
        if k not in ideal_cache:
            ideal_cache[k] = R.product_span(gamma_term(R, k), F)
        return ideal_cache[k]

    checks = []
    strong_hyp = R.p > 3
    for n in range(1, nmax):
        for m in range(n, nmax - n + 1):
            prod = R.product_span(gamma_term(R, n), gamma_term(R, m))
            if strong_hyp and (n % 2 or m % 2):
                checks.append(Check(f"gamma_{n} gamma_{m} in gamma_{n + m - 1} R", prod <= gR(n + m - 1),
                                    {"n": n, "m": m, "hypothesis": "p>3, n or m odd"}))
            if n >= 2 and m >= 2:
                checks.append(Check(f"gamma_{n} gamma_{m} in gamma_{n + m - 2} R", prod <= gR(n + m - 2),
                                    {"n": n, "m": m, "hypothesis": "any p, n,m>=2"}))
    if strong_hyp:
        gens = [R.gen(i) for i in range(R.ngens)]
        for n in range(1, sample_length + 1):
            for word in itertools.product(range(R.ngens), repeat=n):
                c = _left_normed(R, [gens[i] for i in word])
                if c.is_zero():
                    continue
                for m in range(1, R.p):
                    v = R.to_vector(c**m)
                    target = gR((n - 1) * m + 1)
                    label = "{" + ",".join(R.generators[i] for i in word) + f"}}^{m}"
                    checks.append(Check(f"{label} in gamma_{(n - 1) * m + 1} R", target.contains(v),
                                        {"word": list(word), "m": m, "hypothesis": "p>3"}))
    return CheckReport("commutator-products", tuple(checks))


def class_summary(R: PoissonRing) -> dict:
    """Verdicts of all four series in one dict."""
    g, u = gamma_series(R), upper_lie_powers(R)
    d, dt = derived_series(R), upper_derived_series(R)
    return {
        "lie_class": g.class_or_length, "lie_nilpotent": g.terminates,
        "strong_class": u.class_or_length, "strongly_lie_nilpotent": u.terminates,
        "solvable_length": d.class_or_length, "solvable": d.terminates,
        "strong_solvable_length": dt.class_or_length, "strongly_solvable": dt.terminates,
    }


def embedded_gamma(R: PoissonRing, n: int) -> Subspace:
    """gamma_n of the Lie origin, embedded in R as degree-one elements."""
    if R.origin is None:
        raise MissingStructure("ring has no Lie origin")
    return R.embed_lie_subspace(term(lower_central_series(R.origin), n - 1))


__all__ = [
    "SERIES_KINDS", "gamma_series", "upper_lie_powers", "derived_series", "upper_derived_series", "series",
    "term", "gamma_term", "upper_power", "predicted_class_bounds", "Check", "CheckReport",
    "DimensionSubalgebra", "dimension_subalgebras", "verify_upper_power_structure", "verify_filtration_law",
    "verify_series_invariants", "verify_commutator_products", "class_summary", "embedded_gamma",
]
