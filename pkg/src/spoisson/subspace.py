"""Exact linear algebra over F_p on coordinate spaces.

Vectors are int64 numpy arrays holding canonical residues. A
:class:`Subspace` is always kept in reduced row echelon form, which makes
equality of subspaces an equality of arrays.
"""
from __future__ import annotations

from typing import Callable, Iterable, Protocol, Sequence

import numpy as np

from .errors import DimensionMismatch
from .field import as_modulus, inv_mod

_EXACT_FLOAT = 2**53
_EXACT_INT = 2**63


def matmul_mod(x: np.ndarray, y: np.ndarray, p: int) -> np.ndarray:
    """``x @ y mod p`` for residue matrices, without int64 overflow."""
    x = np.asarray(x, dtype=np.int64)
    y = np.asarray(y, dtype=np.int64)
    k = x.shape[-1]
    out_shape = x.shape[:-1] + y.shape[1:]
    if k == 0 or x.size == 0 or y.size == 0:
        return np.zeros(out_shape, dtype=np.int64)
    bound = (p - 1) ** 2
    if bound * k < _EXACT_FLOAT:
        # every partial sum is an integer below 2^53, so BLAS is exact
        return (x.astype(np.float64) @ y.astype(np.float64)).astype(np.int64) % p
    if bound * k < _EXACT_INT:
        return (x @ y) % p
    step = max(1, (_EXACT_INT - 1) // max(bound, 1))
    acc = np.zeros(out_shape, dtype=np.int64)
    for s in range(0, k, step):
        acc = (acc + (x[..., s:s + step] @ y[s:s + step]) % p) % p
    return acc


def rref(mat, p: int) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form of ``mat`` over F_p; returns (nonzero rows, pivots)."""
    m = np.array(mat, dtype=np.int64, copy=True)
    if m.ndim != 2:
        raise DimensionMismatch("rref expects a 2-d array")
    m %= p
    nrows, ncols = m.shape
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        nz = np.flatnonzero(m[r:, c])
        if nz.size == 0:
            continue
        i = r + int(nz[0])
        if i != r:
            m[[r, i]] = m[[i, r]]
        lead = int(m[r, c])
        if lead != 1:
            m[r, c:] = (m[r, c:] * inv_mod(lead, p)) % p
        col = m[:, c].copy()
        col[r] = 0
        hit = np.flatnonzero(col)
        if hit.size:
            # entries are < p <= 2^31 - 1, so each product fits in int64
            m[hit, c:] = (m[hit, c:] - np.outer(col[hit], m[r, c:])) % p
        pivots.append(c)
        r += 1
    return m[:r], pivots


def rref_tall(blocks: Iterable[np.ndarray], ncols: int, p: int) -> tuple[np.ndarray, list[int]]:
    """Echelonize a stream of row blocks without materializing the whole stack."""
    basis = np.zeros((0, ncols), dtype=np.int64)
    pivots: list[int] = []
    chunk = max(2 * ncols, 256)
    pending: list[np.ndarray] = []
    npending = 0

    def flush():
        nonlocal basis, pivots, pending, npending
        if not pending:
            return
        basis, pivots = rref(np.vstack([basis] + pending), p)
        pending, npending = [], 0

    for blk in blocks:
        if len(pivots) == ncols:
            break
        blk = np.asarray(blk, dtype=np.int64).reshape(-1, ncols)
        for s in range(0, blk.shape[0], chunk):
            part = blk[s:s + chunk]
            part = part[np.any(part, axis=1)]
            if part.shape[0]:
                pending.append(part)
                npending += part.shape[0]
            if npending >= chunk:
                flush()
                if len(pivots) == ncols:
                    break
    flush()
    return basis, pivots


class Subspace:
    """A linear subspace of F_p^n held as a reduced row echelon basis."""

    __slots__ = ("ambient_dim", "p", "rows", "pivots", "__weakref__")

    def __init__(self, ambient_dim: int, p: int, rows: np.ndarray, pivots: Sequence[int]):
        # trusted constructor: callers pass rows already in RREF
        self.ambient_dim = int(ambient_dim)
        self.p = int(p)
        rows = np.asarray(rows, dtype=np.int64).reshape(-1, self.ambient_dim)
        rows.setflags(write=False)
        self.rows = rows
        self.pivots = tuple(int(c) for c in pivots)

    @classmethod
    def zero(cls, ambient_dim: int, p: int) -> "Subspace":
        return cls(ambient_dim, p, np.zeros((0, ambient_dim), dtype=np.int64), ())

    @classmethod
    def full(cls, ambient_dim: int, p: int) -> "Subspace":
        return cls(ambient_dim, p, np.eye(ambient_dim, dtype=np.int64), range(ambient_dim))

    @classmethod
    def coordinate(cls, ambient_dim: int, p: int, coords: Iterable[int]) -> "Subspace":
        """Span of the given standard basis vectors."""
        cols = sorted(set(int(c) for c in coords))
        rows = np.zeros((len(cols), ambient_dim), dtype=np.int64)
        rows[np.arange(len(cols)), cols] = 1
        return cls(ambient_dim, p, rows, cols)

    @property
    def dim(self) -> int:
        return len(self.pivots)

    def __len__(self):
        return self.dim

    def is_zero(self) -> bool:
        return self.dim == 0

    def is_full(self) -> bool:
        return self.dim == self.ambient_dim

    def _check(self, other: "Subspace"):
        if self.ambient_dim != other.ambient_dim or self.p != other.p:
            raise DimensionMismatch(
                f"ambient mismatch: F_{self.p}^{self.ambient_dim} vs F_{other.p}^{other.ambient_dim}")

    def reduce(self, vectors) -> np.ndarray:
        """Residues of ``vectors`` (rows) modulo this subspace."""
        v = np.asarray(vectors, dtype=np.int64)
        single = v.ndim == 1
        v = v.reshape(-1, self.ambient_dim) % self.p
        if v.shape[1] != self.ambient_dim:
            raise DimensionMismatch(f"vector length {v.shape[1]} != {self.ambient_dim}")
        if self.dim:
            v = (v - matmul_mod(v[:, list(self.pivots)], self.rows, self.p)) % self.p
        return v[0] if single else v

    def contains(self, v) -> bool:
        return not np.any(self.reduce(v))

    def __contains__(self, v):
        return self.contains(v)

    def issubspace(self, other: "Subspace") -> bool:
        self._check(other)
        if self.dim > other.dim:
            return False
        if self.dim == 0:
            return True
        return not np.any(other.reduce(self.rows))

    def __le__(self, other: "Subspace") -> bool:
        return self.issubspace(other)

    def __eq__(self, other):
        if not isinstance(other, Subspace):
            return NotImplemented
        # mutual inclusion; for RREF bases this coincides with equal rows
        return (self.ambient_dim == other.ambient_dim and self.p == other.p
                and self.issubspace(other) and other.issubspace(self))

    def __hash__(self):
        return hash((self.ambient_dim, self.p, self.pivots, self.rows.tobytes()))

    def __add__(self, other: "Subspace") -> "Subspace":
        return subspace_sum(self, other)

    def __and__(self, other: "Subspace") -> "Subspace":
        return intersection(self, other)

    def __repr__(self):
        return f"Subspace(dim={self.dim}, ambient=F_{self.p}^{self.ambient_dim})"


def echelonize(vectors, ambient_dim: int, p) -> Subspace:
    """RREF basis of the span of ``vectors``."""
    p = as_modulus(p).p
    v = np.asarray(vectors if len(vectors) else np.zeros((0, ambient_dim)), dtype=np.int64)
    if v.ndim == 1:
        v = v.reshape(1, -1)
    if v.shape[1] != ambient_dim:
        raise DimensionMismatch(f"vectors of length {v.shape[1]} in ambient dimension {ambient_dim}")
    rows, piv = rref_tall([v], ambient_dim, p)
    return Subspace(ambient_dim, p, rows, piv)


def membership(space: Subspace, v) -> bool:
    v = np.asarray(v)
    if v.shape[-1] != space.ambient_dim:
        raise DimensionMismatch(f"vector length {v.shape[-1]} != {space.ambient_dim}")
    return space.contains(v)


def subspace_sum(a: Subspace, b: Subspace) -> Subspace:
    a._check(b)
    if b.dim == 0:
        return a
    if a.dim == 0:
        return b
    rows, piv = rref(np.vstack([a.rows, b.rows]), a.p)
    return Subspace(a.ambient_dim, a.p, rows, piv)


def intersection(a: Subspace, b: Subspace) -> Subspace:
    """Zassenhaus: echelonize [[A, A], [B, 0]]; rows with zero left half span A ∩ B."""
    a._check(b)
    n, p = a.ambient_dim, a.p
    if a.dim == 0 or b.dim == 0:
        return Subspace.zero(n, p)
    if a.is_full():
        return b
    if b.is_full():
        return a
    top = np.hstack([a.rows, a.rows])
    bottom = np.hstack([b.rows, np.zeros_like(b.rows)])
    rows, piv = rref(np.vstack([top, bottom]), p)
    keep = [i for i, c in enumerate(piv) if c >= n]
    if not keep:
        return Subspace.zero(n, p)
    inter = rows[keep][:, n:]
    rows2, piv2 = rref(inter, p)
    return Subspace(n, p, rows2, piv2)


class BilinearMap(Protocol):
    """A bilinear operation on a coordinate space.

    ``pair(u, v)`` evaluates the map on two coordinate vectors. Implementations
    may also provide ``image_span(A, B)``, a faster route to the same span.
    """

    ambient_dim: int
    p: int

    def pair(self, u: np.ndarray, v: np.ndarray) -> np.ndarray: ...


class PairwiseMap:
    """Adapter turning a plain ``f(u, v) -> vector`` into a :class:`BilinearMap`."""

    def __init__(self, fn: Callable[[np.ndarray, np.ndarray], np.ndarray], ambient_dim: int, p: int):
        self.fn = fn
        self.ambient_dim = ambient_dim
        self.p = p

    def pair(self, u, v):
        return self.fn(u, v)


def bilinear_image_span(a: Subspace, b: Subspace, bmap, *, fast: bool = True) -> Subspace:
    """Span of ``bmap(u, v)`` over the echelon bases of ``a`` and ``b``.

    Bilinearity makes the basis pairs sufficient. With ``fast`` the map's own
    ``image_span`` is used when it has one.
    """
    a._check(b)
    if a.ambient_dim != bmap.ambient_dim:
        raise DimensionMismatch("bilinear map lives on a different ambient space")
    n, p = a.ambient_dim, a.p
    if a.dim == 0 or b.dim == 0:
        return Subspace.zero(n, p)
    if fast and hasattr(bmap, "image_span"):
        return bmap.image_span(a, b)

    def images():
        for u in a.rows:
            yield np.array([bmap.pair(u, v) for v in b.rows], dtype=np.int64)

    rows, piv = rref_tall(images(), n, p)
    return Subspace(n, p, rows, piv)
