"""Exception types raised across the package."""


class SepscanError(Exception):
    """Base class for all package errors."""


class ValidationError(SepscanError, ValueError):
    """A matrix failed a density-matrix invariant.

    ``magnitude`` carries the worst offending value.
    """

    invariant = "density matrix"

    def __init__(self, magnitude: float, detail: str = ""):
        self.magnitude = float(magnitude)
        msg = f"{self.invariant} violated (worst offending magnitude {self.magnitude:.3e})"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)


class NotHermitian(ValidationError):
    invariant = "Hermiticity"


class NotUnitTrace(ValidationError):
    invariant = "unit trace"


class NotPositive(ValidationError):
    invariant = "positive semidefiniteness"


class NoSplit(SepscanError, ValueError):
    """Bipartite operation on a matrix without split metadata."""


class WrongDim(SepscanError, ValueError):
    pass


class OutOfRange(SepscanError, ValueError):
    pass


class ShapeMismatch(SepscanError, ValueError):
    pass


class NoCrossing(SepscanError):
    """The antidiagonal-minus-diagonal difference never changes sign below 1/2."""


class InsufficientData(SepscanError, ValueError):
    pass


class NoData(SepscanError, ValueError):
    pass


class NoSignChange(SepscanError, ValueError):
    pass


class ToleranceNotReached(SepscanError, ArithmeticError):
    pass


class DomainError(SepscanError, ValueError):
    pass


class RngExhausted(SepscanError, RuntimeError):
    pass
