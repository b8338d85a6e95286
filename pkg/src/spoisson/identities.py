"""Multilinear Poisson polynomials and identity checking on finite-dimensional rings."""
from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .errors import ArityError, BudgetExceeded, RingMismatch, ShapeViolation
from .poisson import PoissonElement, PoissonRing
from .subspace import matmul_mod

DEFAULT_EVAL_BUDGET = 10**7
MAX_ARITY = 32
DENSE_TENSOR_MAX_DIM = 160


@dataclass(frozen=True)
class Var:
    slot: int


@dataclass(frozen=True)
class Br:
    left: "Tree"
    right: "Tree"


@dataclass(frozen=True)
class Mul:
    left: "Tree"
    right: "Tree"


Tree = Union[Var, Br, Mul]


def tree_slots(t: Tree) -> tuple[int, ...]:
    if isinstance(t, Var):
        return (t.slot,)
    return tree_slots(t.left) + tree_slots(t.right)


def render_tree(t: Tree, names: Sequence[str]) -> str:
    if isinstance(t, Var):
        return names[t.slot]
    if isinstance(t, Br):
        return "{" + render_tree(t.left, names) + "," + render_tree(t.right, names) + "}"
    return render_tree(t.left, names) + "*" + render_tree(t.right, names)


def left_normed(slots: Sequence[int]) -> Tree:
    t: Tree = Var(slots[0])
    for s in slots[1:]:
        t = Br(t, Var(s))
    return t


@dataclass(frozen=True)
class MultilinearPoissonPolynomial:
    """``sum_k c_k * F_k1 * ... * F_kr`` where each factor is a bracket/product tree.

    Every slot 0..arity-1 occurs exactly once in each term. Terms are kept in
    canonical order with like terms merged, so ``==`` compares polynomials.
    """

    arity: int
    terms: tuple[tuple[int, tuple[Tree, ...]], ...]
    slot_names: tuple[str, ...] = ()
    name: str = field(default="", compare=False)

    def __post_init__(self):
        if self.arity < 1:
            raise ArityError("arity must be positive")
        if self.arity > MAX_ARITY:
            raise ArityError(f"arity {self.arity} exceeds the limit {MAX_ARITY}")
        names = self.slot_names or tuple(f"x{i + 1}" for i in range(self.arity))
        if len(names) != self.arity:
            raise ArityError("need one name per slot")
        merged: dict[tuple, int] = {}
        for c, factors in self.terms:
            factors = tuple(factors)
            used = sorted(s for f in factors for s in tree_slots(f))
            if used != list(range(self.arity)):
                raise ArityError(f"term {factors} does not use every slot exactly once")
            merged[factors] = merged.get(factors, 0) + int(c)
        ordered = sorted(((c, f) for f, c in merged.items() if c),
                         key=lambda cf: [render_tree(t, names) for t in cf[1]])
        object.__setattr__(self, "terms", tuple(ordered))
        object.__setattr__(self, "slot_names", tuple(names))

    def __str__(self):
        if not self.terms:
            return "0"
        out = []
        for k, (c, factors) in enumerate(self.terms):
            body = "*".join(render_tree(t, self.slot_names) for t in factors)
            sign = "-" if c < 0 else "+"
            mag = abs(c)
            piece = body if mag == 1 else f"{mag}*{body}"
            out.append((("-" if sign == "-" else "") if k == 0 else f" {sign} ") + piece)
        return "".join(out)


def _perm_sign(perm: Sequence[int]) -> int:
    sign = 1
    seen = [False] * len(perm)
    for i in range(len(perm)):
        if seen[i]:
            continue
        j, length = i, 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def _matchings(items: list[int]):
    if not items:
        yield []
        return
    a = items[0]
    for k in range(1, len(items)):
        rest = items[1:k] + items[k + 1:]
        for m in _matchings(rest):
            yield [(a, items[k])] + m


def standard_polynomial(n: int) -> MultilinearPoissonPolynomial:
    """St_{2n}: signed sum over perfect matchings of products of n brackets."""
    if n < 1:
        raise ArityError("St_{2n} needs n >= 1")
    if 2 * n > 8:
        raise ArityError(f"St_{2 * n} has {math.factorial(2 * n) // (2**n * math.factorial(n))} terms; limit is St_8")
    terms = []
    for m in _matchings(list(range(2 * n))):
        perm = [s for pair in m for s in pair]
        terms.append((_perm_sign(perm), tuple(Br(Var(a), Var(b)) for a, b in m)))
    return MultilinearPoissonPolynomial(2 * n, tuple(terms), name=f"st{2 * n}")


SERIES_POLY_KINDS = ("nilpotence", "strong_nilpotence", "solvability", "strong_solvability")


def _delta(level: int, xs: list[int]) -> Tree:
    if level == 1:
        return Br(Var(xs[0]), Var(xs[1]))
    h = len(xs) // 2
    return Br(_delta(level - 1, xs[:h]), _delta(level - 1, xs[h:]))


def _delta_tilde(level: int, xs: list[int], ys: list[int]) -> Tree:
    if level == 1:
        return Mul(Br(Var(xs[0]), Var(xs[1])), Var(ys[0]))
    h, hy = len(xs) // 2, (len(ys) - 1) // 2
    inner = Br(_delta_tilde(level - 1, xs[:h], ys[:hy]), _delta_tilde(level - 1, xs[h:], ys[hy:2 * hy]))
    return Mul(inner, Var(ys[-1]))


def series_polynomial(kind: str, s: int) -> MultilinearPoissonPolynomial:
    """The single-term polynomial whose vanishing defines the series at level s."""
    if s < 1:
        raise ArityError("level must be >= 1")
    if kind == "nilpotence":
        arity = s + 1
        _guard(arity)
        return MultilinearPoissonPolynomial(arity, ((1, (left_normed(range(arity)),)),),
                                            tuple(f"X{i}" for i in range(arity)), f"nilp{s}")
    if kind == "strong_nilpotence":
        # {{...{{X0,X1}.Y1,X2}.Y2,...,X_{s-1}}.Y_{s-1},X_s}: slots X0..Xs then Y1..Y_{s-1}
        arity = 2 * s
        _guard(arity)
        t: Tree = Var(0)
        for k in range(1, s + 1):
            t = Br(t, Var(k))
            if k < s:
                t = Mul(t, Var(s + k))
        names = tuple(f"X{i}" for i in range(s + 1)) + tuple(f"Y{i}" for i in range(1, s))
        return MultilinearPoissonPolynomial(arity, ((1, (t,)),), names, f"snilp{s}")
    if kind == "solvability":
        arity = 2**s
        _guard(arity)
        return MultilinearPoissonPolynomial(arity, ((1, (_delta(s, list(range(arity))),)),),
                                            tuple(f"X{i + 1}" for i in range(arity)), f"solv{s}")
    if kind == "strong_solvability":
        nx, ny = 2**s, 2**s - 1
        _guard(nx + ny)
        t = _delta_tilde(s, list(range(nx)), list(range(nx, nx + ny)))
        names = tuple(f"X{i + 1}" for i in range(nx)) + tuple(f"Y{i + 1}" for i in range(ny))
        return MultilinearPoissonPolynomial(nx + ny, ((1, (t,)),), names, f"ssolv{s}")
    raise ValueError(f"unknown polynomial kind {kind!r}; expected one of {SERIES_POLY_KINDS}")


def _guard(arity: int):
    if arity > MAX_ARITY:
        raise ArityError(f"arity {arity} exceeds the limit {MAX_ARITY}")


_CATALOG_RE = re.compile(r"(st|nilp|snilp|solv|ssolv)(\d+)")
_CATALOG_KIND = {"nilp": "nilpotence", "snilp": "strong_nilpotence", "solv": "solvability",
                 "ssolv": "strong_solvability"}


def catalog(name: str) -> MultilinearPoissonPolynomial:
    """Look up ``st4``, ``nilp3``, ``solv2``, ``ssolv2``, ``snilp2``, ..."""
    m = _CATALOG_RE.fullmatch(name.strip().lower())
    if not m:
        raise KeyError(f"unknown polynomial {name!r}; use st<2n>, nilp<s>, snilp<s>, solv<s> or ssolv<s>")
    head, k = m.group(1), int(m.group(2))
    if head == "st":
        if k % 2:
            raise KeyError(f"standard polynomials have even arity, got {name!r}")
        return standard_polynomial(k // 2)
    return series_polynomial(_CATALOG_KIND[head], k)


# -- evaluation ------------------------------------------------------------

def _eval_tree(R: PoissonRing, t: Tree, values: Sequence[PoissonElement]) -> PoissonElement:
    if isinstance(t, Var):
        return values[t.slot]
    a, b = _eval_tree(R, t.left, values), _eval_tree(R, t.right, values)
    return R.bracket(a, b) if isinstance(t, Br) else R.multiply(a, b)


def evaluate(R: PoissonRing, poly: MultilinearPoissonPolynomial,
             assignment: Sequence[PoissonElement]) -> PoissonElement:
    if len(assignment) != poly.arity:
        raise ArityError(f"{poly.name or 'polynomial'} takes {poly.arity} arguments, got {len(assignment)}")
    for f in assignment:
        if f.ring is not R:
            raise RingMismatch("assignment element from another ring")
    total = R.zero()
    for c, factors in poly.terms:
        val = _eval_tree(R, factors[0], assignment)
        for f in factors[1:]:
            if val.is_zero():
                break
            val = R.multiply(val, _eval_tree(R, f, assignment))
        total = total + val * c
    return total


def dense_tensor(R: PoissonRing, op: str) -> np.ndarray:
    """(dim, dim, dim) structure tensor of ``bracket`` or ``multiply`` on the monomial basis."""
    key = ("dense", op)
    if key not in R._memo:
        T = R.structure_coo(op).dense()
        T.setflags(write=False)
        R._memo[key] = T
    return R._memo[key]


class _TableEvaluator:
    """Values of trees on all basis assignments of their free slots.

    A table for a tree with free slots (s_1, ..., s_k) has shape
    (dim**k, dim): row r holds the value when the slots take the basis
    indices given by unravelling r (s_1 most significant).
    """

    def __init__(self, R: PoissonRing):
        self.R = R
        self.dim, self.p = R.dim, R.p
        self.dense = R.dim <= DENSE_TENSOR_MAX_DIM
        self.tensors = {}
        self.cache: dict[Tree, tuple[tuple[int, ...], np.ndarray]] = {}

    def _tensor(self, op):
        if op not in self.tensors:
            self.tensors[op] = dense_tensor(self.R, op).reshape(self.dim, self.dim * self.dim)
        return self.tensors[op]

    def combine(self, op: str, left: np.ndarray, right: np.ndarray) -> np.ndarray:
        n, p = self.dim, self.p
        nl, nr = left.shape[0], right.shape[0]
        if self.dense:
            x = matmul_mod(left, self._tensor(op), p).reshape(nl, n, n)
            y = matmul_mod(right, x.transpose(1, 0, 2).reshape(n, nl * n), p).reshape(nr, nl, n)
            return np.ascontiguousarray(y.transpose(1, 0, 2)).reshape(nl * nr, n)
        return self.R.structure_coo(op).outer(left, right)

    def table(self, t: Tree, fixed: dict[int, int]) -> tuple[tuple[int, ...], np.ndarray]:
        slots = tree_slots(t)
        pinned = any(s in fixed for s in slots)
        if not pinned and t in self.cache:
            return self.cache[t]
        if isinstance(t, Var):
            if t.slot in fixed:
                v = np.zeros((1, self.dim), dtype=np.int64)
                v[0, fixed[t.slot]] = 1
                res = ((), v)
            else:
                res = ((t.slot,), np.eye(self.dim, dtype=np.int64))
        else:
            ls, lt = self.table(t.left, fixed)
            rs, rt = self.table(t.right, fixed)
            res = (ls + rs, self.combine("bracket" if isinstance(t, Br) else "multiply", lt, rt))
        if not pinned:
            self.cache[t] = res
        return res


def _canonical_keys(R: PoissonRing, tuples: np.ndarray) -> np.ndarray:
    """Sort keys for assignments: total degree first, then deg-lex rank slot by slot."""
    deg = R._degrees[tuples].sum(axis=1)
    # rank 0 = largest monomial in deg-lex order
    rank = (R.dim - 1 - np.arange(R.dim))
    ranked = rank[tuples]
    return np.column_stack([deg, ranked])


@dataclass(frozen=True)
class IdentityVerdict:
    """Outcome of an identity check.

    ``status`` is ``satisfied`` (exhaustive, no counterexample), ``counterexample``,
    or ``sampled_no_counterexample`` (random mode; not a proof).
    """

    status: str
    polynomial: str
    mode: str
    checked: int
    counterexample: tuple[str, ...] | None = None
    value: str | None = None
    seed: int | None = None

    @property
    def satisfied(self) -> bool:
        return self.status == "satisfied"

    def to_dict(self) -> dict:
        d = {"status": self.status, "polynomial": self.polynomial, "mode": self.mode, "checked": self.checked,
             "counterexample": list(self.counterexample) if self.counterexample is not None else None,
             "value": self.value}
        if self.seed is not None:
            d["seed"] = self.seed
        return d


def satisfies_multilinear(R: PoissonRing, poly: MultilinearPoissonPolynomial,
                          budget: int = DEFAULT_EVAL_BUDGET, *, mode: str = "exhaustive",
                          seed: int | None = None, samples: int = 1000) -> IdentityVerdict:
    """Check ``poly == 0`` on R.

    Exhaustive mode runs over every tuple of basis monomials, which decides the
    question for multilinear polynomials. The reported counterexample is the
    least failing tuple by (total degree, deg-lex ranks).
    """
    label = poly.name or str(poly)
    if mode == "sample":
        if seed is None:
            raise ValueError("sampling mode needs an explicit seed")
        return _sample(R, poly, samples, seed, label)
    if mode != "exhaustive":
        raise ValueError(f"unknown mode {mode!r}")
    total = R.dim**poly.arity
    if total > budget:
        raise BudgetExceeded(f"{R.dim}^{poly.arity} = {total} assignments exceed budget {budget}; "
                             f"use sampling mode")
    ev = _TableEvaluator(R)
    n, p = R.dim, R.p
    # fix leading slots until each chunk table holds at most ~2^21 entries
    k = 0
    while k < poly.arity and n ** (poly.arity - k) * n > 2**21:
        k += 1
    best_key, best_tuple, best_val = None, None, None
    for prefix in itertools.product(range(n), repeat=k):
        fixed = dict(enumerate(prefix))
        acc = None
        for c, factors in poly.terms:
            slots, tab = ev.table(factors[0], fixed)
            for f in factors[1:]:
                s2, t2 = ev.table(f, fixed)
                slots, tab = slots + s2, ev.combine("multiply", tab, t2)
            free = len(slots)
            if free:
                order = np.argsort(slots)
                tab = tab.reshape((n,) * free + (n,)).transpose(tuple(order) + (free,)).reshape(-1, n)
            tab = (tab * (c % p)) % p
            acc = tab if acc is None else (acc + tab) % p
        bad = np.flatnonzero(np.any(acc, axis=1))
        if bad.size == 0:
            continue
        rest = poly.arity - k
        tail = np.array(np.unravel_index(bad, (n,) * rest)).T if rest else np.zeros((bad.size, 0), dtype=np.int64)
        tuples = np.hstack([np.tile(np.array(prefix, dtype=np.int64), (bad.size, 1)), tail])
        keys = _canonical_keys(R, tuples)
        i = np.lexsort(keys.T[::-1])[0]
        key = tuple(keys[i].tolist())
        if best_key is None or key < best_key:
            best_key, best_tuple, best_val = key, tuples[i], acc[bad[i]]
    if best_key is None:
        return IdentityVerdict("satisfied", label, "exhaustive", total)
    names = tuple(R.render(R.basis_element(int(j))) for j in best_tuple)
    return IdentityVerdict("counterexample", label, "exhaustive", total, names,
                           R.render(R.from_vector(best_val)))


def _sample(R, poly, samples, seed, label) -> IdentityVerdict:
    rng = np.random.default_rng(seed)
    for k in range(samples):
        args = [R.random_element(rng) for _ in range(poly.arity)]
        val = evaluate(R, poly, args)
        if not val.is_zero():
            return IdentityVerdict("counterexample", label, "sample", k + 1,
                                   tuple(R.render(a) for a in args), R.render(val), seed)
    return IdentityVerdict("sampled_no_counterexample", label, "sample", samples, seed=seed)


@dataclass(frozen=True)
class FrobeniusReport:
    trials: int
    tested: int
    excluded_constant: int
    violations: tuple[tuple[str, str], ...]
    seed: int

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {"trials": self.trials, "tested": self.tested, "excluded_constant": self.excluded_constant,
                "violations": [list(v) for v in self.violations], "seed": self.seed, "ok": self.ok}


def _has_constant_brackets(R: PoissonRing) -> bool:
    zero = (0,) * R.ngens
    return any(zero in terms for terms in R.bracket_table.values())


def frobenius_power_test(R: PoissonRing, trials: int, seed: int) -> FrobeniusReport:
    """Check ``{f, g}^p = 0`` on seeded random pairs.

    When the bracket table has constant values (Hamiltonian rings) inputs are
    drawn constant-free and pairs whose bracket still has a constant term are
    excluded and counted: a nonzero constant c gives c^p = c.
    """
    if R.shape.exponent_cap != R.p:
        raise ShapeViolation("Frobenius test needs a ring with exponent cap p")
    rng = np.random.default_rng(seed)
    constants = _has_constant_brackets(R)
    n, p = R.dim, R.p
    const_idx = R.index[(0,) * R.ngens]
    F = rng.integers(0, p, size=(trials, n))
    G = rng.integers(0, p, size=(trials, n))
    if constants:
        F[:, const_idx] = G[:, const_idx] = 0
    B, M = R.structure_coo("bracket"), R.structure_coo("multiply")
    H = B.apply(F, G)
    P = H
    for _ in range(p - 1):
        P = M.apply(P, H)
    keep = ~H[:, const_idx].astype(bool) if constants else np.ones(trials, dtype=bool)
    bad = np.flatnonzero(keep & np.any(P, axis=1))
    violations = tuple((R.render(R.from_vector(F[i])), R.render(R.from_vector(G[i]))) for i in bad)
    return FrobeniusReport(trials, int(keep.sum()), int(trials - keep.sum()), violations, seed)
