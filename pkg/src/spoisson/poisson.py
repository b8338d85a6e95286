"""Finite-dimensional truncated Poisson algebras.

A :class:`PoissonRing` is a quotient of a polynomial ring by a monomial
ideal (per-variable exponent cap and/or total-degree cap) together with the
brackets of its generators; the bracket of arbitrary elements follows from
the Leibniz rule::

    {f, g} = sum_{i<j} (df/dx_i * dg/dx_j - df/dx_j * dg/dx_i) * {x_i, x_j}

Two evaluation routes are provided. :class:`PoissonElement` arithmetic works
on sparse term maps and is what identities and tests use. Subspace-level
operations go through a block kernel that exploits the multigrading every
homogeneous bracket table carries.
"""
from __future__ import annotations

import itertools
import math
import re
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np
import sympy

from .errors import (DimensionBudgetExceeded, DimensionMismatch, JacobiViolation,
                     MissingStructure, RingMismatch, ShapeViolation)
from .field import PrimeModulus, as_modulus
from .liealg import LieAlgebra, lower_central_series
from .subspace import Subspace, bilinear_image_span, matmul_mod, rref_tall

DEFAULT_BUDGET = 5000

Exps = tuple[int, ...]


@dataclass(frozen=True)
class TruncationShape:
    """Monomials with an exponent >= ``exponent_cap`` or degree > ``degree_cap`` vanish."""

    exponent_cap: int | None = None
    degree_cap: int | None = None

    def __post_init__(self):
        if self.exponent_cap is None and self.degree_cap is None:
            raise ShapeViolation("at least one cap must be finite")
        if self.exponent_cap is not None and self.exponent_cap < 1:
            raise ShapeViolation("exponent cap must be positive")
        if self.degree_cap is not None and self.degree_cap < 0:
            raise ShapeViolation("degree cap must be non-negative")

    def admits(self, exps: Sequence[int]) -> bool:
        if self.exponent_cap is not None and any(e >= self.exponent_cap for e in exps):
            return False
        if self.degree_cap is not None and sum(exps) > self.degree_cap:
            return False
        return all(e >= 0 for e in exps)

    def count(self, n: int) -> int:
        """Number of admissible monomials in ``n`` variables."""
        e, d = self.exponent_cap, self.degree_cap
        if d is None:
            return e**n
        if e is None:
            return math.comb(n + d, d)
        # ways[t] = monomials of degree t so far
        ways = [1] + [0] * d
        for _ in range(n):
            ways = [sum(ways[t - a] for a in range(min(e - 1, t) + 1)) for t in range(d + 1)]
        return sum(ways)

    def to_dict(self):
        return {"exponent_cap": self.exponent_cap, "degree_cap": self.degree_cap}


def _monomials(n: int, shape: TruncationShape) -> list[Exps]:
    top = shape.exponent_cap - 1 if shape.exponent_cap is not None else shape.degree_cap
    if shape.degree_cap is None:
        mons = list(itertools.product(range(top + 1), repeat=n))
    else:
        mons = []

        def rec(prefix, left):
            if len(prefix) == n:
                mons.append(tuple(prefix))
                return
            for a in range(min(top, left) + 1):
                rec(prefix + [a], left - a)

        rec([], shape.degree_cap)
    mons.sort(key=lambda m: (sum(m), m))
    return mons


def _integer_kernel(rows: list[list[int]], ncols: int) -> list[list[int]]:
    """Integer basis of the rational null space of ``rows``."""
    vecs = sympy.Matrix(rows).nullspace() if rows else [sympy.eye(ncols)[:, k] for k in range(ncols)]
    out = []
    for v in vecs:
        den = sympy.ilcm(*[sympy.fraction(x)[1] for x in v]) if len(v) else 1
        out.append([int(x * den) for x in v])
    return out


class PoissonElement:
    """A sparse element ``sum c_m * m`` of a :class:`PoissonRing`; zero coefficients are never stored."""

    __slots__ = ("ring", "terms")

    def __init__(self, ring: "PoissonRing", terms: Mapping[Exps, int] | None = None):
        self.ring = ring
        p = ring.p
        clean = {}
        for m, c in (terms or {}).items():
            c %= p
            if c:
                clean[tuple(m)] = c
        self.terms: dict[Exps, int] = clean

    def _same(self, other) -> "PoissonElement":
        if isinstance(other, int):
            return self.ring.scalar(other)
        if not isinstance(other, PoissonElement):
            return NotImplemented
        if other.ring is not self.ring:
            raise RingMismatch("elements belong to different rings")
        return other

    def __add__(self, other):
        other = self._same(other)
        if other is NotImplemented:
            return other
        t = dict(self.terms)
        for m, c in other.terms.items():
            t[m] = t.get(m, 0) + c
        return PoissonElement(self.ring, t)

    __radd__ = __add__

    def __neg__(self):
        return PoissonElement(self.ring, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        other = self._same(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, int):
            return PoissonElement(self.ring, {m: c * other for m, c in self.terms.items()})
        other = self._same(other)
        if other is NotImplemented:
            return other
        return self.ring.multiply(self, other)

    __rmul__ = __mul__

    def __pow__(self, e: int):
        result = self.ring.one()
        base = self
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    def bracket(self, other: "PoissonElement") -> "PoissonElement":
        return self.ring.bracket(self, other)

    def __eq__(self, other):
        if isinstance(other, int):
            other = self.ring.scalar(other)
        if not isinstance(other, PoissonElement):
            return NotImplemented
        return self.ring is other.ring and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __bool__(self):
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def constant_term(self) -> int:
        return self.terms.get((0,) * self.ring.ngens, 0)

    def degree(self) -> int:
        return max((sum(m) for m in self.terms), default=-1)

    def __str__(self):
        return self.ring.render(self)

    def __repr__(self):
        return f"PoissonElement({self.ring.render(self)!r})"


class StructureCOO:
    """Entries ``op(b_I, b_J) ∋ C * b_K`` sorted by K, for batched evaluation."""

    def __init__(self, n: int, p: int, I, J, K, C):
        self.n, self.p = n, p
        self.I, self.J, self.K, self.C = I, J, K, C
        if K.size:
            self.starts = np.flatnonzero(np.r_[True, K[1:] != K[:-1]])
            self.targets = K[self.starts]
        else:
            self.starts = self.targets = np.zeros(0, dtype=np.int64)

    @property
    def nnz(self) -> int:
        return int(self.K.size)

    def dense(self) -> np.ndarray:
        T = np.zeros((self.n,) * 3, dtype=np.int64)
        np.add.at(T, (self.I, self.J, self.K), self.C)
        return T % self.p

    def apply(self, F: np.ndarray, G: np.ndarray) -> np.ndarray:
        """Row-wise ``op(F[t], G[t])`` for coordinate rows F, G of shape (t, n)."""
        F = np.asarray(F, dtype=np.int64)
        G = np.asarray(G, dtype=np.int64)
        t = F.shape[0]
        out = np.zeros((t, self.n), dtype=np.int64)
        if not self.nnz or not t:
            return out
        p = self.p
        step = max(1, (1 << 22) // self.nnz)
        for s in range(0, t, step):
            prod = (F[s:s + step][:, self.I] * G[s:s + step][:, self.J]) % p
            prod = (prod * self.C) % p
            out[s:s + step, self.targets] = np.add.reduceat(prod, self.starts, axis=1) % p
        return out

    def outer(self, L: np.ndarray, Rt: np.ndarray) -> np.ndarray:
        """``op(L[a], Rt[b])`` for all pairs, shape (len(L) * len(Rt), n), a major."""
        L = np.asarray(L, dtype=np.int64)
        Rt = np.asarray(Rt, dtype=np.int64)
        nl, nr = L.shape[0], Rt.shape[0]
        out = np.zeros((nl, nr, self.n), dtype=np.int64)
        if not self.nnz:
            return out.reshape(nl * nr, self.n)
        p = self.p
        rj = Rt[:, self.J]
        for a in range(nl):
            la = (L[a, self.I] * self.C) % p
            if not la.any():
                continue
            prod = (rj * la) % p
            out[a][:, self.targets] = np.add.reduceat(prod, self.starts, axis=1) % p
        return out.reshape(nl * nr, self.n)


class _BlockKernel:
    """Bilinear maps on a graded ring evaluated block by block.

    Every monomial carries an integer key (its multidegree under all gradings
    compatible with the bracket table). Products map keys (a, b) to a + b,
    brackets to a + b + shift, so a homogeneous subspace splits into blocks and
    each pair of blocks contributes to exactly one target block.
    """

    def __init__(self, ring: "PoissonRing", op: str):
        self.ring = ring
        self.op = op
        self.ambient_dim = ring.dim
        self.p = ring.p
        self._tensors: dict[tuple[int, int], tuple[np.ndarray, int] | None] = {}

    def pair(self, u, v) -> np.ndarray:
        r = self.ring
        f, g = r.from_vector(u), r.from_vector(v)
        out = r.bracket(f, g) if self.op == "bracket" else r.multiply(f, g)
        return r.to_vector(out)

    def _tensor(self, ia: int, ib: int):
        key = (ia, ib)
        if key in self._tensors:
            return self._tensors[key]
        ring = self.ring
        target = ring._block_keys[ia] + ring._block_keys[ib]
        if self.op == "bracket":
            target = target + ring._shift
        it = ring._key_to_block.get(tuple(int(x) for x in target))
        if it is None:
            self._tensors[key] = None
            return None
        sa, sb = ring._blocks[ia], ring._blocks[ib]
        st = ring._blocks[it]
        T = np.zeros((len(sa), len(sb), len(st)), dtype=np.int64)
        ea, eb = ring._exps[sa], ring._exps[sb]
        tot = ea[:, None, :] + eb[None, :, :]
        p = ring.p
        if self.op == "multiply":
            idx = ring._lookup(tot)
            a, b = np.nonzero(idx >= 0)
            T[a, b, ring._local[idx[a, b]]] = 1
        else:
            for i, j, terms in ring._bracket_list:
                coef = (ea[:, None, i] * eb[None, :, j] - ea[:, None, j] * eb[None, :, i]) % p
                a, b = np.nonzero(coef)
                if a.size == 0:
                    continue
                base = tot[a, b].copy()
                base[:, i] -= 1
                base[:, j] -= 1
                c = coef[a, b]
                for u, cu in terms:
                    idx = ring._lookup(base + np.asarray(u))
                    ok = idx >= 0
                    np.add.at(T, (a[ok], b[ok], ring._local[idx[ok]]), (c[ok] * cu) % p)
            T %= p
        if not T.any():
            self._tensors[key] = None
            return None
        self._tensors[key] = (T, it)
        return self._tensors[key]

    def image_span(self, A: Subspace, B: Subspace) -> Subspace:
        ring = self.ring
        pa, pb = ring._split(A), ring._split(B)
        if pa is None or pb is None:
            return bilinear_image_span(A, B, self, fast=False)
        p = self.p
        cands: dict[int, list[np.ndarray]] = defaultdict(list)
        for ia, ra in pa.items():
            for ib, rb in pb.items():
                got = self._tensor(ia, ib)
                if got is None:
                    continue
                T, it = got
                na, nb, nt = T.shape
                a_full = ra.shape[0] == na
                b_full = rb.shape[0] == nb
                if a_full:
                    x = T.reshape(na, nb * nt)
                else:
                    x = matmul_mod(ra, T.reshape(na, nb * nt), p)
                if b_full:
                    y = x.reshape(-1, nt)
                else:
                    ka = x.shape[0]
                    x3 = x.reshape(ka, nb, nt).transpose(1, 0, 2).reshape(nb, ka * nt)
                    y = matmul_mod(rb, x3, p).reshape(-1, nt)
                cands[it].append(y)
        return ring._assemble(cands)


class PoissonRing:
    """Truncated polynomial ring with a Poisson bracket on its generators.

    ``brackets`` maps ``(i, j)`` to ``{x_i, x_j}`` given as ``{exponents: coeff}``.
    Only ``i < j`` entries are stored; ``(j, i)`` keys are negated on input.
    """

    def __init__(self, p, generators: Sequence[str], brackets: Mapping, shape: TruncationShape, *,
                 origin: LieAlgebra | None = None, heights: Sequence[int] | None = None,
                 budget: int = DEFAULT_BUDGET, name: str | None = None):
        self.modulus: PrimeModulus = as_modulus(p)
        self.p = self.modulus.p
        self.generators = tuple(generators)
        self.ngens = n = len(self.generators)
        if len(set(self.generators)) != n:
            raise ShapeViolation("generator labels must be distinct")
        self.shape = shape
        self.name = name or "poisson"
        if shape.exponent_cap is not None and shape.exponent_cap != self.p:
            raise ShapeViolation(
                f"exponent cap {shape.exponent_cap} != characteristic {self.p}: (x^e) is not a Poisson ideal")
        table: dict[tuple[int, int], dict[Exps, int]] = {}
        for (i, j), val in dict(brackets).items():
            sign = 1
            if i > j:
                i, j, sign = j, i, -1
            if not (0 <= i < n and 0 <= j < n) or i == j:
                raise ShapeViolation(f"bad generator pair ({i}, {j})")
            terms = {}
            for m, c in dict(val).items():
                m = tuple(int(e) for e in m)
                if len(m) != n:
                    raise ShapeViolation(f"monomial {m} has wrong length")
                c = sign * int(c) % self.p
                if c and shape.admits(m):
                    terms[m] = (terms.get(m, 0) + c) % self.p
            terms = {m: c for m, c in terms.items() if c}
            if terms:
                table[(i, j)] = terms
        if shape.degree_cap is not None:
            for (i, j), terms in table.items():
                if any(sum(m) != 1 for m in terms):
                    raise ShapeViolation(
                        f"degree truncation needs brackets linear in the generators; "
                        f"{{{self.generators[i]}, {self.generators[j]}}} is not")
        self.bracket_table = table
        self._bracket_list = [(i, j, tuple(t.items())) for (i, j), t in sorted(table.items())]
        self.budget = budget
        size = shape.count(n)
        if size > budget:
            raise DimensionBudgetExceeded(f"ring dimension {size} exceeds budget {budget}")
        self.origin = origin
        if origin is not None and origin.dim != n:
            raise DimensionMismatch("origin Lie algebra has a different dimension")
        self.heights = tuple(heights) if heights is not None else None
        self._build_basis()
        self._check_jacobi()
        self._build_grading()
        self.bracket_map = _BlockKernel(self, "bracket")
        self.product_map = _BlockKernel(self, "multiply")
        self._memo: dict = {}

    # -- basis ------------------------------------------------------------
    def _build_basis(self):
        n = self.ngens
        mons = _monomials(n, self.shape)
        self.monomials: tuple[Exps, ...] = tuple(mons)
        self.dim = len(mons)
        self.index = {m: k for k, m in enumerate(mons)}
        self._exps = np.array(mons, dtype=np.int64).reshape(self.dim, n)
        top = self.shape.exponent_cap if self.shape.exponent_cap is not None else self.shape.degree_cap + 1
        self._radix = top
        if n and top**n >= 2**62:
            raise ShapeViolation("too many generators for the monomial encoding")
        self._powers = np.array([top**k for k in range(n)], dtype=np.int64)
        codes = self._exps @ self._powers if n else np.zeros(self.dim, dtype=np.int64)
        order = np.argsort(codes)
        self._sorted_codes = codes[order]
        self._code_order = order
        self._degrees = self._exps.sum(axis=1)

    def _lookup(self, ex: np.ndarray) -> np.ndarray:
        """Basis index for each exponent row of ``ex`` (shape (..., n)); -1 where it vanishes."""
        ex = np.asarray(ex, dtype=np.int64)
        lead = ex.shape[:-1]
        if self.ngens == 0:
            return np.zeros(lead, dtype=np.int64)
        ok = np.all(ex >= 0, axis=-1)
        if self.shape.exponent_cap is not None:
            ok &= np.all(ex < self.shape.exponent_cap, axis=-1)
        if self.shape.degree_cap is not None:
            ok &= ex.sum(axis=-1) <= self.shape.degree_cap
        codes = np.where(ok, ex @ self._powers, 0)
        pos = np.searchsorted(self._sorted_codes, codes)
        pos = np.minimum(pos, self.dim - 1)
        found = ok & (self._sorted_codes[pos] == codes)
        return np.where(found, self._code_order[pos], -1)

    def _check_jacobi(self):
        gens = [self.gen(i) for i in range(self.ngens)]
        for i, j, k in itertools.combinations(range(self.ngens), 3):
            a, b, c = gens[i], gens[j], gens[k]
            r = (self.bracket(self.bracket(a, b), c) + self.bracket(self.bracket(b, c), a)
                 + self.bracket(self.bracket(c, a), b))
            if r:
                raise JacobiViolation((i, j, k), self.render(r))

    def _build_grading(self):
        n = self.ngens
        constraints = []
        for i, j, terms in self._bracket_list:
            for u, _ in terms:
                row = list(u) + [-1]
                row[i] -= 1
                row[j] -= 1
                constraints.append(row)
        if constraints:
            kern = _integer_kernel(constraints, n + 1)
        else:
            kern = [[int(k == i) for k in range(n)] + [0] for i in range(n)]
        W = np.array([v[:n] for v in kern], dtype=np.int64).reshape(len(kern), n)
        self._shift = np.array([v[n] for v in kern], dtype=np.int64)
        keys = self._exps @ W.T if len(kern) else np.zeros((self.dim, 0), dtype=np.int64)
        self._keys = keys
        groups: dict[tuple, list[int]] = defaultdict(list)
        for idx, k in enumerate(map(tuple, keys.tolist())):
            groups[k].append(idx)
        self._block_keys = []
        self._blocks = []
        self._key_to_block = {}
        self._block_of = np.empty(self.dim, dtype=np.int64)
        self._local = np.empty(self.dim, dtype=np.int64)
        for b, (k, idxs) in enumerate(groups.items()):
            arr = np.array(idxs, dtype=np.int64)
            self._block_keys.append(np.array(k, dtype=np.int64))
            self._blocks.append(arr)
            self._key_to_block[k] = b
            self._block_of[arr] = b
            self._local[arr] = np.arange(len(arr))

    @property
    def nblocks(self) -> int:
        return len(self._blocks)

    def _split(self, A: Subspace) -> dict[int, np.ndarray] | None:
        """Local RREF rows per block, or None when some row is not homogeneous."""
        if A.dim == 0:
            return {}
        rows = A.rows
        rb = self._block_of[list(A.pivots)]
        nz = rows != 0
        if np.any(nz & (self._block_of[None, :] != rb[:, None])):
            return None
        out = {}
        for b in np.unique(rb):
            sel = rb == b
            out[int(b)] = rows[sel][:, self._blocks[b]]
        return out

    def _assemble(self, cands: Mapping[int, list[np.ndarray]]) -> Subspace:
        pieces, pivs = [], []
        for it, lst in cands.items():
            cols = self._blocks[it]
            local, lp = rref_tall(lst, len(cols), self.p)
            if not lp:
                continue
            g = np.zeros((local.shape[0], self.dim), dtype=np.int64)
            g[:, cols] = local
            pieces.append(g)
            pivs.extend(int(cols[c]) for c in lp)
        if not pieces:
            return Subspace.zero(self.dim, self.p)
        rows = np.vstack(pieces)
        order = np.argsort(pivs, kind="stable")
        return Subspace(self.dim, self.p, rows[order], [pivs[k] for k in order])

    # -- elements -----------------------------------------------------------
    def element(self, terms: Mapping[Exps, int] | None = None) -> PoissonElement:
        for m in (terms or {}):
            if len(m) != self.ngens:
                raise DimensionMismatch(f"monomial {m} has wrong length")
        return PoissonElement(self, {m: c for m, c in (terms or {}).items() if self.shape.admits(m)})

    def zero(self) -> PoissonElement:
        return PoissonElement(self)

    def one(self) -> PoissonElement:
        return self.scalar(1)

    def scalar(self, c: int) -> PoissonElement:
        return PoissonElement(self, {(0,) * self.ngens: c})

    def monomial(self, exps: Sequence[int], coeff: int = 1) -> PoissonElement:
        return self.element({tuple(exps): coeff})

    def gen(self, which) -> PoissonElement:
        i = self.generators.index(which) if isinstance(which, str) else int(which)
        e = [0] * self.ngens
        e[i] = 1
        return self.monomial(e)

    def basis_element(self, k: int) -> PoissonElement:
        return PoissonElement(self, {self.monomials[k]: 1})

    def to_vector(self, f: PoissonElement) -> np.ndarray:
        if f.ring is not self:
            raise RingMismatch("element belongs to another ring")
        v = np.zeros(self.dim, dtype=np.int64)
        for m, c in f.terms.items():
            v[self.index[m]] = c
        return v

    def from_vector(self, v) -> PoissonElement:
        v = np.asarray(v, dtype=np.int64)
        if v.shape != (self.dim,):
            raise DimensionMismatch(f"expected a vector of length {self.dim}")
        v = v % self.p
        return PoissonElement(self, {self.monomials[k]: int(v[k]) for k in np.flatnonzero(v)})

    def random_element(self, rng: np.random.Generator, max_terms: int | None = None,
                       constant_free: bool = False) -> PoissonElement:
        lo = 1 if constant_free else 0
        if self.dim - lo <= 0:
            return self.zero()
        k = self.dim - lo if max_terms is None else min(max_terms, self.dim - lo)
        nterms = int(rng.integers(1, k + 1))
        idx = rng.choice(np.arange(lo, self.dim), size=nterms, replace=False)
        coeffs = rng.integers(1, self.p, size=nterms) if self.p > 2 else np.ones(nterms, dtype=np.int64)
        return PoissonElement(self, {self.monomials[int(i)]: int(c) for i, c in zip(idx, coeffs)})

    # -- arithmetic -----------------------------------------------------------
    def _check_pair(self, f, g):
        if f.ring is not self or g.ring is not self:
            raise RingMismatch("elements belong to a different ring")

    def multiply(self, f: PoissonElement, g: PoissonElement) -> PoissonElement:
        """Product in the quotient ring: monomials outside the shape are dropped."""
        self._check_pair(f, g)
        out: dict[Exps, int] = defaultdict(int)
        admits = self.shape.admits
        for a, ca in f.terms.items():
            for b, cb in g.terms.items():
                m = tuple(x + y for x, y in zip(a, b))
                if admits(m):
                    out[m] += ca * cb
        return PoissonElement(self, out)

    def bracket(self, f: PoissonElement, g: PoissonElement) -> PoissonElement:
        self._check_pair(f, g)
        out: dict[Exps, int] = defaultdict(int)
        admits = self.shape.admits
        p = self.p
        for a, ca in f.terms.items():
            for b, cb in g.terms.items():
                cab = ca * cb
                for i, j, terms in self._bracket_list:
                    c = (a[i] * b[j] - a[j] * b[i]) % p
                    if not c:
                        continue
                    base = [x + y for x, y in zip(a, b)]
                    base[i] -= 1
                    base[j] -= 1
                    for u, cu in terms:
                        m = tuple(x + y for x, y in zip(base, u))
                        if admits(m):
                            out[m] += cab * c * cu
        return PoissonElement(self, out)

    def structure_coo(self, op: str) -> "StructureCOO":
        """All nonzero structure constants of ``bracket`` or ``multiply`` on basis pairs.

        Built directly from exponent arithmetic, independently of the block kernel.
        """
        key = ("coo", op)
        if key in self._memo:
            return self._memo[key]
        n, p = self.dim, self.p
        parts_i, parts_j, parts_k, parts_c = [], [], [], []
        step = max(1, (1 << 20) // max(n, 1))
        cols = np.arange(n)
        for s in range(0, n, step):
            rows = np.arange(s, min(n, s + step))
            a = np.repeat(rows, n)
            b = np.tile(cols, len(rows))
            ea, eb = self._exps[a], self._exps[b]
            if op == "multiply":
                idx = self._lookup(ea + eb)
                ok = idx >= 0
                parts_i.append(a[ok]); parts_j.append(b[ok]); parts_k.append(idx[ok])
                parts_c.append(np.ones(int(ok.sum()), dtype=np.int64))
                continue
            for i, j, terms in self._bracket_list:
                coef = (ea[:, i] * eb[:, j] - ea[:, j] * eb[:, i]) % p
                nz = np.flatnonzero(coef)
                base = ea[nz] + eb[nz]
                base[:, i] -= 1
                base[:, j] -= 1
                for u, cu in terms:
                    idx = self._lookup(base + np.asarray(u))
                    ok = idx >= 0
                    parts_i.append(a[nz][ok]); parts_j.append(b[nz][ok]); parts_k.append(idx[ok])
                    parts_c.append(coef[nz][ok] * cu % p)
        cat = (lambda xs: np.concatenate(xs) if xs else np.zeros(0, dtype=np.int64))
        I, J, K, C = cat(parts_i), cat(parts_j), cat(parts_k), cat(parts_c)
        order = np.argsort(K, kind="stable")
        coo = StructureCOO(n, p, I[order], J[order], K[order], C[order])
        self._memo[key] = coo
        return coo

    # -- subspaces ------------------------------------------------------------
    def full(self) -> Subspace:
        return Subspace.full(self.dim, self.p)

    def span(self, elements: Iterable[PoissonElement]) -> Subspace:
        from .subspace import echelonize
        vecs = [self.to_vector(f) for f in elements]
        return echelonize(np.array(vecs).reshape(len(vecs), self.dim), self.dim, self.p)

    def bracket_span(self, A: Subspace, B: Subspace) -> Subspace:
        return bilinear_image_span(A, B, self.bracket_map)

    def product_span(self, A: Subspace, B: Subspace) -> Subspace:
        return bilinear_image_span(A, B, self.product_map)

    def ideal(self, A: Subspace) -> Subspace:
        """``A * R``: for subspaces containing 1 this is the ideal generated by A."""
        return self.product_span(A, self.full())

    def monomial_span(self, predicate) -> Subspace:
        return Subspace.coordinate(self.dim, self.p, [k for k, m in enumerate(self.monomials) if predicate(m)])

    # -- Lie origin -------------------------------------------------------------
    def _require_origin(self) -> LieAlgebra:
        if self.origin is None:
            raise MissingStructure("ring has no Lie origin")
        return self.origin

    def embed_lie_element(self, v) -> PoissonElement:
        L = self._require_origin()
        v = np.asarray(v, dtype=np.int64)
        if v.shape != (L.dim,):
            raise DimensionMismatch(f"expected a vector of length {L.dim}")
        terms = {}
        for i, c in enumerate(v.tolist()):
            e = [0] * self.ngens
            e[i] = 1
            terms[tuple(e)] = c
        return self.element(terms)

    def linear_part_indices(self) -> np.ndarray:
        """Ring coordinates of the generators x_1..x_n (degree-one monomials)."""
        eye = np.eye(self.ngens, dtype=np.int64)
        return self._lookup(eye)

    def embed_lie_subspace(self, S: Subspace) -> Subspace:
        L = self._require_origin()
        if S.ambient_dim != L.dim:
            raise DimensionMismatch("subspace lives in a different Lie algebra")
        cols = self.linear_part_indices()
        rows = np.zeros((S.dim, self.dim), dtype=np.int64)
        rows[:, cols] = S.rows
        # column order of generators is increasing in ring coordinates up to a
        # permutation, so re-echelonize instead of trusting the Lie pivots
        from .subspace import echelonize
        return echelonize(rows, self.dim, self.p)

    def restrict_to_lie(self, S: Subspace) -> Subspace:
        """Preimage in the Lie algebra of ``S ∩ (embedded L)``."""
        from .subspace import echelonize, intersection
        L = self._require_origin()
        inter = intersection(S, self.embed_lie_subspace(L.full()))
        cols = self.linear_part_indices()
        return echelonize(inter.rows[:, cols], L.dim, self.p)

    # -- heights ----------------------------------------------------------------
    def height(self, exps: Sequence[int]) -> int:
        if self.heights is None:
            raise MissingStructure("ring carries no heights")
        return sum(a * h for a, h in zip(exps, self.heights))

    # -- rendering --------------------------------------------------------------
    def render(self, f: PoissonElement) -> str:
        if not f.terms:
            return "0"
        parts = []
        for m in sorted(f.terms, key=lambda m: (sum(m), m), reverse=True):
            c = f.terms[m]
            factors = [f"{self.generators[k]}^{e}" for k, e in enumerate(m) if e]
            if not factors:
                parts.append(str(c))
            elif c == 1:
                parts.append("*".join(factors))
            else:
                parts.append(f"{c}*" + "*".join(factors))
        return " + ".join(parts)

    def parse(self, text: str) -> PoissonElement:
        """Inverse of :meth:`render` (also accepts ``-`` signs and bare labels)."""
        text = text.strip()
        if text == "0":
            return self.zero()
        terms: dict[Exps, int] = defaultdict(int)
        for sign, body in re.findall(r"([+-]?)\s*([^+-]+)", text):
            coeff = -1 if sign == "-" else 1
            exps = [0] * self.ngens
            for factor in body.strip().split("*"):
                factor = factor.strip()
                if re.fullmatch(r"\d+", factor):
                    coeff *= int(factor)
                    continue
                label, _, e = factor.partition("^")
                if label not in self.generators:
                    raise ValueError(f"unknown generator {label!r}")
                exps[self.generators.index(label)] += int(e) if e else 1
            terms[tuple(exps)] += coeff
        return self.element(terms)

    def describe(self) -> dict:
        return {"name": self.name, "p": self.p, "generators": list(self.generators),
                "shape": self.shape.to_dict(), "dim": self.dim,
                "heights": list(self.heights) if self.heights is not None else None}

    def __repr__(self):
        return f"PoissonRing({self.name}, dim={self.dim}, p={self.p})"


def shifted_heights(L: LieAlgebra) -> tuple[int, ...] | None:
    """Heights from the filtration L_n = gamma_{n+1}(L).

    Returns None when L is not nilpotent or the given basis is not adapted to
    the lower central series (then no height function on basis vectors exists).
    """
    rep = lower_central_series(L)
    if not rep.terminates:
        return None
    heights = []
    gammas = rep.terms
    for i in range(L.dim):
        e = L.basis_vector(i)
        h = max(n for n in range(len(gammas)) if gammas[n].contains(e))
        heights.append(h)
    for n, g in enumerate(gammas):
        coords = Subspace.coordinate(L.dim, L.p, [i for i, h in enumerate(heights) if h >= n])
        if coords != g:
            return None
    return tuple(heights)


def _lie_table(L: LieAlgebra) -> dict:
    n = L.dim
    table = {}
    for (i, j), entry in L.structure.items():
        terms = {}
        for k, c in entry.items():
            e = [0] * n
            e[k] = 1
            terms[tuple(e)] = c
        table[(i, j)] = terms
    return table


def truncated_symmetric(L: LieAlgebra, budget: int = DEFAULT_BUDGET) -> PoissonRing:
    """s(L): polynomials in a basis of L with every exponent below p."""
    shape = TruncationShape(exponent_cap=L.p)
    if shape.count(L.dim) > budget:
        raise DimensionBudgetExceeded(f"{L.p}^{L.dim} exceeds budget {budget}")
    return PoissonRing(L.modulus, L.labels, _lie_table(L), shape, origin=L,
                       heights=shifted_heights(L), budget=budget, name=f"s({L.name})")


def degree_truncated_symmetric(L: LieAlgebra, D: int, budget: int = DEFAULT_BUDGET) -> PoissonRing:
    """S(L) modulo the span of monomials of degree > D."""
    shape = TruncationShape(degree_cap=D)
    if shape.count(L.dim) > budget:
        raise DimensionBudgetExceeded(f"C({L.dim}+{D}, {D}) exceeds budget {budget}")
    return PoissonRing(L.modulus, L.labels, _lie_table(L), shape, origin=L,
                       heights=shifted_heights(L), budget=budget, name=f"S({L.name})/deg>{D}")


def truncated_hamiltonian(m: int, p, budget: int = DEFAULT_BUDGET) -> PoissonRing:
    """h_{2m}: x_i, y_i with {x_i, y_j} = delta_ij and all exponents below p."""
    modulus = as_modulus(p)
    if m < 1:
        raise ShapeViolation("need m >= 1")
    shape = TruncationShape(exponent_cap=modulus.p)
    if shape.count(2 * m) > budget:
        raise DimensionBudgetExceeded(f"{modulus.p}^{2 * m} exceeds budget {budget}")
    labels = ["x", "y"] if m == 1 else [f"x{i + 1}" for i in range(m)] + [f"y{i + 1}" for i in range(m)]
    one = (0,) * (2 * m)
    return PoissonRing(modulus, labels, {(i, m + i): {one: 1} for i in range(m)}, shape, budget=budget,
                       name=f"h_{2 * m}(F_{modulus.p})")


def multiply(R: PoissonRing, f: PoissonElement, g: PoissonElement) -> PoissonElement:
    return R.multiply(f, g)


def poisson_bracket(R: PoissonRing, f: PoissonElement, g: PoissonElement) -> PoissonElement:
    return R.bracket(f, g)


def embed_lie_element(R: PoissonRing, v) -> PoissonElement:
    return R.embed_lie_element(v)


def height_filtration_space(R: PoissonRing, n: int) -> Subspace:
    """E_n: span of monomials whose weighted exponent sum is at least n."""
    if R.heights is None:
        raise MissingStructure("ring carries no heights")
    return R.monomial_span(lambda m: R.height(m) >= n)
