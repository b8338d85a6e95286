"""Exception types raised by the engine.

All of them derive from :class:`SpoissonError` so callers (the CLI in
particular) can map whole families of failures onto exit codes.
"""


class SpoissonError(Exception):
    """Base class for every error raised by this package."""


class ModulusError(SpoissonError, ValueError):
    """Composite or out-of-range modulus, or mixing scalars of different moduli."""


class DivisionByZero(SpoissonError, ZeroDivisionError):
    pass


class IndexOutOfRange(SpoissonError, IndexError):
    pass


class DimensionMismatch(SpoissonError, ValueError):
    pass


class JacobiViolation(SpoissonError, ValueError):
    def __init__(self, triple, residual):
        self.triple = tuple(triple)
        self.residual = residual
        super().__init__(f"Jacobi identity fails on basis triple {self.triple}: residual {residual}")


class UnknownFamily(SpoissonError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else "unknown family"


class BadParams(SpoissonError, ValueError):
    pass


class ResourceBudgetError(SpoissonError):
    """Anything that refuses to run because it would exceed a configured budget."""


class EnumerationTooLarge(ResourceBudgetError):
    pass


class DimensionBudgetExceeded(ResourceBudgetError):
    pass


class BudgetExceeded(ResourceBudgetError):
    pass


class ShapeViolation(SpoissonError, ValueError):
    pass


class RingMismatch(SpoissonError, ValueError):
    pass


class MissingStructure(SpoissonError, ValueError):
    """The ring lacks an attached Lie origin or height function."""


class NotNilpotent(SpoissonError, ValueError):
    pass


class ArityError(SpoissonError, ValueError):
    pass
