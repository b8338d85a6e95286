"""Slow reference implementation used to produce and re-check frozen test values.

Shares no code with the package: polynomials are sympy ``Poly`` objects over
GF(p), the bracket is the closed derivative formula, and ranks come from
sympy's ``DomainMatrix`` row reduction.
"""
from __future__ import annotations

import itertools

import sympy
from sympy.polys.domains import GF
from sympy.polys.matrices import DomainMatrix


class OracleRing:
    """Truncated polynomial ring with a Poisson bracket given on generators.

    ``table[(i, j)]`` is a sympy expression in the generator symbols.
    Either ``exp_cap`` (all exponents < cap) or ``deg_cap`` (total degree <= cap).
    """

    def __init__(self, names, table, p, exp_cap=None, deg_cap=None):
        self.p = p
        self.syms = sympy.symbols(list(names))
        self.n = len(self.syms)
        self.exp_cap, self.deg_cap = exp_cap, deg_cap
        self.table = {k: self.poly(v) for k, v in table.items()}
        if exp_cap is not None:
            mons = list(itertools.product(range(exp_cap), repeat=self.n))
        else:
            mons = [m for m in itertools.product(range(deg_cap + 1), repeat=self.n) if sum(m) <= deg_cap]
        self.monomials = sorted(mons)
        self.index = {m: k for k, m in enumerate(self.monomials)}
        self.dim = len(self.monomials)

    def poly(self, expr):
        return sympy.Poly(expr, *self.syms, modulus=self.p)

    def truncate(self, f):
        keep = {}
        for m, c in f.terms():
            if self.exp_cap is not None and max(m) >= self.exp_cap:
                continue
            if self.deg_cap is not None and sum(m) > self.deg_cap:
                continue
            keep[m] = c
        return sympy.Poly.from_dict(keep, *self.syms, modulus=self.p) if keep else self.poly(0)

    def basis(self, k):
        m = self.monomials[k]
        return self.poly(sympy.Mul(*[s**e for s, e in zip(self.syms, m)]))

    def mul(self, f, g):
        return self.truncate(f * g)

    def bracket(self, f, g):
        total = self.poly(0)
        for (i, j), b in self.table.items():
            xi, xj = self.syms[i], self.syms[j]
            total += (f.diff(xi) * g.diff(xj) - f.diff(xj) * g.diff(xi)) * b
        return self.truncate(total)

    def vec(self, f):
        v = [0] * self.dim
        for m, c in f.terms():
            if m in self.index:
                v[self.index[m]] = int(c) % self.p
        return v


def rank(rows, ncols, p):
    if not rows:
        return 0
    return DomainMatrix([[GF(p)(x) for x in r] for r in rows], (len(rows), ncols), GF(p)).rank()


def span_basis(rows, ncols, p):
    if not rows:
        return []
    m = DomainMatrix([[GF(p)(x) for x in r] for r in rows], (len(rows), ncols), GF(p))
    red, piv = m.rref()
    return [[int(x) % p for x in red.to_Matrix().row(i)] for i in range(len(piv))]


def image_span(R: OracleRing, A, B, op):
    fa = [sum((c * R.basis(k) for k, c in enumerate(r) if c), R.poly(0)) for r in A]
    fb = [sum((c * R.basis(k) for k, c in enumerate(r) if c), R.poly(0)) for r in B]
    rows = [R.vec(op(f, g)) for f in fa for g in fb]
    return span_basis(rows, R.dim, R.p)


def chain(R: OracleRing, step):
    """Dimensions of a descending chain started at R, stopping at 0 or a repeat."""
    cur = [[int(i == k) for i in range(R.dim)] for k in range(R.dim)]
    dims = [len(cur)]
    while dims[-1]:
        cur = step(cur)
        dims.append(len(cur))
        if dims[-1] == dims[-2]:
            break
    return dims


def full(R):
    return [[int(i == k) for i in range(R.dim)] for k in range(R.dim)]


def gamma_dims(R):
    F = full(R)
    return chain(R, lambda A: image_span(R, A, F, R.bracket))


def upper_dims(R):
    F = full(R)
    return chain(R, lambda A: image_span(R, image_span(R, A, F, R.bracket), F, R.mul))


def derived_dims(R):
    return chain(R, lambda A: image_span(R, A, A, R.bracket))


def upper_derived_dims(R):
    F = full(R)
    return chain(R, lambda A: image_span(R, image_span(R, A, A, R.bracket), F, R.mul))


def delta_census(brackets, dim, p, n):
    """Count vectors x in F_p^dim with rank of {[e_i, x]} at most n; ``brackets[i][j]`` is a vector."""
    count = 0
    for x in itertools.product(range(p), repeat=dim):
        rows = []
        for i in range(dim):
            rows.append([sum(x[j] * brackets[i][j][k] for j in range(dim)) % p for k in range(dim)])
        if rank(rows, dim, p) <= n:
            count += 1
    return count


# -- the rings behind the frozen values ------------------------------------

def heisenberg(p, cap="exp", D=None):
    x, y, z = sympy.symbols("x y z")
    kw = {"exp_cap": p} if cap == "exp" else {"deg_cap": D}
    return OracleRing("x y z".split(), {(0, 1): z}, p, **kw)


def hamiltonian(p):
    return OracleRing(["x", "y"], {(0, 1): sympy.Integer(1)}, p, exp_cap=p)


def solvable2(p, cap="exp", D=None):
    y = sympy.Symbol("y")
    kw = {"exp_cap": p} if cap == "exp" else {"deg_cap": D}
    return OracleRing(["x", "y"], {(0, 1): y}, p, **kw)


def filiform4(p):
    e = sympy.symbols("e1:5")
    return OracleRing([str(s) for s in e], {(0, 1): e[2], (0, 2): e[3]}, p, exp_cap=p)


def family_a(k, p):
    names = ["x"] + [f"y{i + 1}" for i in range(k)]
    ys = sympy.symbols(names[1:])
    return OracleRing(names, {(0, i + 1): ys[i] for i in range(k)}, p, exp_cap=p)


def family_b(k, p):
    names = ["x"] + [f"y{i + 1}" for i in range(k)] + [f"z{i + 1}" for i in range(k)]
    zs = sympy.symbols(names[k + 1:])
    return OracleRing(names, {(0, i + 1): zs[i] for i in range(k)}, p, exp_cap=p)


def frozen_values() -> dict:
    """Everything the test modules freeze, recomputed from scratch."""
    out = {}
    H3 = heisenberg(3)
    out["heis3_gamma"] = gamma_dims(H3)
    out["heis3_upper"] = upper_dims(H3)
    out["heis3_derived"] = derived_dims(H3)
    out["heis2_upper"] = upper_dims(heisenberg(2))
    h2 = hamiltonian(2)
    out["h2_derived"] = derived_dims(h2)
    out["h2_upper_derived"] = upper_derived_dims(h2)
    out["h2_gamma"] = gamma_dims(h2)
    out["solv2_p3_derived"] = derived_dims(solvable2(3))
    out["solv2_p3_upper_derived"] = upper_derived_dims(solvable2(3))
    out["solv2_p2_gamma"] = gamma_dims(solvable2(2))
    out["fil4_p2_upper"] = upper_dims(filiform4(2))
    out["fil4_p2_gamma"] = gamma_dims(filiform4(2))
    out["famA2_derived"] = derived_dims(family_a(2, 2))
    out["famA2_upper_derived"] = upper_derived_dims(family_a(2, 2))
    out["famB2_derived"] = derived_dims(family_b(2, 2))
    out["solv2_D3_gamma"] = gamma_dims(solvable2(101, "deg", 3))
    heis_b = [[[0] * 3 for _ in range(3)] for _ in range(3)]
    heis_b[0][1][2], heis_b[1][0][2] = 1, 1  # -1 = 1 mod 2
    out["heis_p2_census"] = [delta_census(heis_b, 3, 2, n) for n in (0, 1)]
    return out


if __name__ == "__main__":
    for k, v in frozen_values().items():
        print(f"{k} = {v}")
