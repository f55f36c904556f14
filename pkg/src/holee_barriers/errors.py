"""Exception hierarchy shared by the pricing, calibration and CLI layers."""


class HoLeeError(Exception):
    """Base class for all library errors."""


class ValidationError(HoLeeError, ValueError):
    """Bad user input (non-positive volatility, unsorted maturities, ...)."""


class DomainError(ValidationError):
    """Evaluation point outside the model's state space."""


class NumericalError(HoLeeError, ArithmeticError):
    """A numerical routine failed to reach its accuracy target."""


class AiryRangeError(NumericalError):
    """Airy argument outside the representable range (Bi overflow)."""


class BracketError(NumericalError):
    """A root could not be bracketed; indicates an evaluation accuracy bug."""


class AdmissibilityError(ValidationError):
    """Drift or parameters violate the asymptotic-yield admissibility condition."""


class CalibrationError(NumericalError):
    """No feasible optimum was found.

    The best (penalised) point is attached as ``best`` for inspection.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best
