"""Arithmetic in the prime field F_p."""
from __future__ import annotations

from dataclasses import dataclass

from .errors import DivisionByZero, ModulusError

MAX_MODULUS = 2**31 - 1

# Deterministic Miller-Rabin witnesses, valid for every n < 3.3e24.
_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    for q in _MR_WITNESSES:
        if n % q == 0:
            return n == q
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_WITNESSES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


@dataclass(frozen=True)
class PrimeModulus:
    """A prime ``p`` with ``2 <= p <= 2**31 - 1``, validated on construction."""

    p: int

    def __post_init__(self):
        p = self.p
        if isinstance(p, bool) or not isinstance(p, int):
            raise ModulusError(f"modulus must be an int, got {p!r}")
        if not 2 <= p <= MAX_MODULUS:
            raise ModulusError(f"modulus {p} outside [2, 2^31-1]")
        if not is_prime(p):
            raise ModulusError(f"modulus {p} is not prime")

    def __int__(self):
        return self.p

    def __call__(self, value: int) -> "Scalar":
        return Scalar(value % self.p, self)

    def __str__(self):
        return f"F_{self.p}"


def as_modulus(p) -> PrimeModulus:
    return p if isinstance(p, PrimeModulus) else PrimeModulus(int(p))


@dataclass(frozen=True)
class Scalar:
    """Canonical residue ``0 <= value < p``."""

    value: int
    modulus: PrimeModulus

    def __post_init__(self):
        if not 0 <= self.value < self.modulus.p:
            raise ModulusError(f"{self.value} is not a canonical residue mod {self.modulus.p}")

    def _check(self, other: "Scalar") -> int:
        if not isinstance(other, Scalar):
            return NotImplemented
        if other.modulus != self.modulus:
            raise ModulusError(f"cannot combine {self.modulus} with {other.modulus}")
        return other.value

    def __add__(self, other):
        return fp_arith("add", self, other)

    def __sub__(self, other):
        return fp_arith("sub", self, other)

    def __mul__(self, other):
        return fp_arith("mul", self, other)

    def __neg__(self):
        return fp_arith("neg", self)

    def __pow__(self, e: int):
        if e < 0:
            return fp_inv(self) ** (-e)
        return Scalar(pow(self.value, e, self.modulus.p), self.modulus)

    def __truediv__(self, other):
        return self * fp_inv(other)

    def __bool__(self):
        return self.value != 0

    def __int__(self):
        return self.value

    def __repr__(self):
        return f"{self.value} (mod {self.modulus.p})"


def fp_arith(op: str, a: Scalar, b: Scalar | None = None) -> Scalar:
    """Apply ``add``, ``sub``, ``mul`` or ``neg`` and return the canonical residue."""
    p = a.modulus.p
    if op == "neg":
        return Scalar(-a.value % p, a.modulus)
    if b is None:
        raise TypeError(f"{op} needs two operands")
    bv = a._check(b)
    if bv is NotImplemented:
        raise TypeError(f"expected Scalar, got {type(b).__name__}")
    if op == "add":
        r = a.value + bv
    elif op == "sub":
        r = a.value - bv
    elif op == "mul":
        r = a.value * bv
    else:
        raise ValueError(f"unknown operation {op!r}")
    return Scalar(r % p, a.modulus)


def fp_inv(a: Scalar) -> Scalar:
    if a.value == 0:
        raise DivisionByZero(f"0 has no inverse mod {a.modulus.p}")
    return Scalar(pow(a.value, -1, a.modulus.p), a.modulus)


def inv_mod(a: int, p: int) -> int:
    """Plain-int inverse used by the hot loops."""
    a %= p
    if a == 0:
        raise DivisionByZero(f"0 has no inverse mod {p}")
    return pow(a, -1, p)
