"""Finite-dimensional Lie algebras over F_p given by structure constants."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import (BadParams, DimensionMismatch, EnumerationTooLarge,
                     IndexOutOfRange, JacobiViolation, UnknownFamily)
from .field import PrimeModulus, as_modulus
from .subspace import Subspace, echelonize, matmul_mod, rref

DEFAULT_CENSUS_CAP = 10**6


@dataclass(frozen=True)
class SeriesReport:
    """Dimension profile of a descending chain of subspaces.

    ``verdict`` is ``"terminates"`` when the chain reaches 0 and
    ``"stabilizes_nonzero"`` when it hits a nonzero fixpoint; in the latter
    case the repeated dimension is the last entry of ``dims``.
    """

    kind: str
    dims: tuple[int, ...]
    verdict: str
    class_or_length: int | None
    terms: tuple[Subspace, ...] = field(default=(), compare=False, repr=False)

    @property
    def terminates(self) -> bool:
        return self.verdict == "terminates"

    @property
    def stable_dim(self) -> int:
        return self.dims[-1]

    def to_dict(self) -> dict:
        return {"kind": self.kind, "dims": list(self.dims), "verdict": self.verdict,
                "class_or_length": self.class_or_length}

    @classmethod
    def from_dict(cls, d: Mapping) -> "SeriesReport":
        return cls(d["kind"], tuple(d["dims"]), d["verdict"], d["class_or_length"])


def descending_chain(kind: str, first: Subspace, step) -> SeriesReport:
    """Iterate ``step`` from ``first`` until 0 or a repeated dimension.

    The class (or length) is ``len(dims) - 1`` under both numberings: for the
    lower central series dims are gamma_1..gamma_{s+1}, for the others they
    are X_0..X_s.
    """
    terms = [first]
    while terms[-1].dim:
        nxt = step(terms[-1])
        terms.append(nxt)
        if nxt.dim == terms[-2].dim:
            # chains are monotone, so equal dimension means a fixpoint
            break
    dims = tuple(t.dim for t in terms)
    if dims[-1] == 0:
        return SeriesReport(kind, dims, "terminates", len(dims) - 1, tuple(terms))
    return SeriesReport(kind, dims, "stabilizes_nonzero", None, tuple(terms))


class LieAlgebra:
    """Structure constants ``[e_i, e_j] = sum_k c_ij^k e_k`` stored for ``i < j`` only."""

    def __init__(self, p, dim: int, brackets: Mapping, labels: Sequence[str] | None = None,
                 name: str | None = None, *, check: bool = True):
        self.modulus: PrimeModulus = as_modulus(p)
        self.p = self.modulus.p
        if dim < 0:
            raise BadParams("dimension must be non-negative")
        self.dim = int(dim)
        self.labels = tuple(labels) if labels is not None else tuple(f"e{i}" for i in range(dim))
        if len(self.labels) != dim or len(set(self.labels)) != dim:
            raise BadParams("need one distinct label per basis element")
        self.name = name or f"lie({dim})"
        table: dict[tuple[int, int], dict[int, int]] = {}
        tensor = np.zeros((dim, dim, dim), dtype=np.int64)
        for (i, j), value in dict(brackets).items():
            i, j = int(i), int(j)
            for idx in (i, j):
                if not 0 <= idx < dim:
                    raise IndexOutOfRange(f"basis index {idx} out of range for dim {dim}")
            if i == j:
                raise BadParams(f"[e{i}, e{i}] is zero by definition and cannot be set")
            sign = 1
            if i > j:
                i, j, sign = j, i, -1
            if (i, j) in table:
                raise BadParams(f"bracket ({i}, {j}) given twice")
            entry = {}
            for k, c in dict(value).items():
                k = int(k)
                if not 0 <= k < dim:
                    raise IndexOutOfRange(f"basis index {k} out of range for dim {dim}")
                c = sign * int(c) % self.p
                if c:
                    entry[k] = c
            if entry:
                table[(i, j)] = entry
                for k, c in entry.items():
                    tensor[i, j, k] = c
                    tensor[j, i, k] = -c % self.p
        self.structure = table
        tensor.setflags(write=False)
        self.tensor = tensor
        if check:
            self._check_jacobi()

    def _check_jacobi(self):
        eye = np.eye(self.dim, dtype=np.int64)
        for i, j, k in itertools.combinations(range(self.dim), 3):
            ei, ej, ek = eye[i], eye[j], eye[k]
            r = (self.bracket(self.bracket(ei, ej), ek) + self.bracket(self.bracket(ej, ek), ei)
                 + self.bracket(self.bracket(ek, ei), ej)) % self.p
            if np.any(r):
                raise JacobiViolation((i, j, k), r.tolist())

    def vector(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=np.int64)
        if v.shape != (self.dim,):
            raise DimensionMismatch(f"expected a vector of length {self.dim}, got shape {v.shape}")
        return v % self.p

    def basis_vector(self, i: int) -> np.ndarray:
        v = np.zeros(self.dim, dtype=np.int64)
        v[i] = 1
        return v

    def element(self, **coeffs: int) -> np.ndarray:
        """Vector from label keywords, e.g. ``L.element(x=1, y=1)``."""
        v = np.zeros(self.dim, dtype=np.int64)
        for name, c in coeffs.items():
            v[self.labels.index(name)] = c
        return v % self.p

    def bracket(self, u, v) -> np.ndarray:
        u, v = self.vector(u), self.vector(v)
        if self.dim == 0:
            return u
        inner = matmul_mod(u[None, :], self.tensor.reshape(self.dim, -1), self.p).reshape(self.dim, self.dim)
        return matmul_mod(v[None, :], inner, self.p)[0]

    def ad_images(self, rows: np.ndarray) -> np.ndarray:
        """All ``[a, e_i]`` for rows ``a``, stacked as (len(rows) * dim, dim)."""
        n = self.dim
        out = matmul_mod(np.asarray(rows, dtype=np.int64), self.tensor.reshape(n, n * n), self.p)
        return out.reshape(-1, n)

    def full(self) -> Subspace:
        return Subspace.full(self.dim, self.p)

    def bracket_span(self, a: Subspace, b: Subspace) -> Subspace:
        if a.dim == 0 or b.dim == 0:
            return Subspace.zero(self.dim, self.p)
        n = self.dim
        # [a, b] for all basis pairs: contract a with the tensor, then with b
        left = matmul_mod(a.rows, self.tensor.reshape(n, n * n), self.p).reshape(-1, n, n)
        imgs = np.einsum("sj,rjk->rsk", b.rows, left) % self.p if self.p < 2**20 else np.stack(
            [matmul_mod(b.rows, m, self.p) for m in left])
        return echelonize(imgs.reshape(-1, n), n, self.p)

    def is_abelian(self) -> bool:
        return not self.structure

    def __repr__(self):
        return f"LieAlgebra({self.name}, dim={self.dim}, p={self.p})"


def build_lie_algebra(p, dim: int, brackets: Mapping, labels=None, name=None) -> LieAlgebra:
    return LieAlgebra(p, dim, brackets, labels, name)


def lie_bracket(L: LieAlgebra, u, v) -> np.ndarray:
    return L.bracket(u, v)


def lower_central_series(L: LieAlgebra) -> SeriesReport:
    """gamma_1 = L, gamma_{n+1} = [gamma_n, L]; class s when gamma_{s+1} = 0 != gamma_s."""
    full = L.full()
    return descending_chain("lower_central", full, lambda g: L.bracket_span(g, full))


def derived_series_of_lie(L: LieAlgebra) -> SeriesReport:
    return descending_chain("derived", L.full(), lambda d: L.bracket_span(d, d))


def gamma_quotient_dims(L: LieAlgebra) -> list[int]:
    """``d_n = dim gamma_{n+1}/gamma_{n+2}`` for n >= 1; requires nilpotent L."""
    rep = lower_central_series(L)
    dims = list(rep.dims)
    return [dims[n] - dims[n + 1] for n in range(1, len(dims) - 1)]


def width(L: LieAlgebra, x) -> int:
    """``dim [L, x]``."""
    x = L.vector(x)
    if L.dim == 0:
        return 0
    rows, _ = rref(L.ad_images(x[None, :]), L.p)
    return rows.shape[0]


def delta_n_census(L: LieAlgebra, n: int, cap: int = DEFAULT_CENSUS_CAP) -> int:
    """Number of x in L with ``dim [L, x] <= n``, by enumeration of all p^dim vectors."""
    p, d = L.p, L.dim
    if p**d > cap:
        raise EnumerationTooLarge(f"{p}^{d} vectors exceed the enumeration cap {cap}")
    if d == 0:
        return 1
    count = 1 if n >= 0 else 0  # the zero vector has width 0
    # width is constant on nonzero scalar multiples: enumerate one vector per line
    for lead in range(d):
        for tail in itertools.product(range(p), repeat=d - lead - 1):
            x = np.zeros(d, dtype=np.int64)
            x[lead] = 1
            x[lead + 1:] = tail
            if width(L, x) <= n:
                count += p - 1
    return count


def _abelian(p, n):
    return LieAlgebra(p, n, {}, [f"a{i + 1}" for i in range(n)], f"abelian({n})")


def _heisenberg(p, m):
    if m == 1:
        labels = ["x", "y", "z"]
    else:
        labels = [f"x{i + 1}" for i in range(m)] + [f"y{i + 1}" for i in range(m)] + ["z"]
    z = 2 * m
    return LieAlgebra(p, 2 * m + 1, {(i, m + i): {z: 1} for i in range(m)}, labels, f"heisenberg({m})")


def _filiform(p, n):
    # [e1, e_i] = e_{i+1}, 2 <= i <= n-1 (1-based labels)
    return LieAlgebra(p, n, {(0, i): {i + 1: 1} for i in range(1, n - 1)},
                      [f"e{i + 1}" for i in range(n)], f"filiform({n})")


def _solvable2(p):
    return LieAlgebra(p, 2, {(0, 1): {1: 1}}, ["x", "y"], "solvable2")


def _family_a(p, k):
    labels = ["x"] + [f"y{i + 1}" for i in range(k)]
    return LieAlgebra(p, k + 1, {(0, i): {i: 1} for i in range(1, k + 1)}, labels, f"char2_family_A({k})")


def _family_b(p, k):
    labels = ["x"] + [f"y{i + 1}" for i in range(k)] + [f"z{i + 1}" for i in range(k)]
    return LieAlgebra(p, 2 * k + 1, {(0, i): {k + i: 1} for i in range(1, k + 1)}, labels,
                      f"char2_family_B({k})")


FAMILIES = {
    "abelian": (("n",), 1, _abelian),
    "heisenberg": (("m",), 1, _heisenberg),
    "filiform": (("n",), 2, _filiform),
    "solvable2": ((), 0, _solvable2),
    "char2_family_A": (("k",), 1, _family_a),
    "char2_family_B": (("k",), 1, _family_b),
}


def make_named(family: str, params: Mapping | None, p) -> LieAlgebra:
    """Build one of the corpus algebras, e.g. ``make_named("heisenberg", {"m": 1}, 5)``."""
    if family not in FAMILIES:
        raise UnknownFamily(f"unknown Lie algebra family {family!r}; known: {sorted(FAMILIES)}")
    names, minimum, ctor = FAMILIES[family]
    params = dict(params or {})
    if set(params) != set(names):
        raise BadParams(f"{family} takes parameters {list(names)}, got {sorted(params)}")
    values = []
    for key in names:
        v = params[key]
        if isinstance(v, bool) or not isinstance(v, int) or v < minimum:
            raise BadParams(f"{family}: parameter {key} must be an integer >= {minimum}, got {v!r}")
        values.append(v)
    return ctor(as_modulus(p), *values)
