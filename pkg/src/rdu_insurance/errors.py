"""Exception hierarchy shared by every module of the package."""


class RduInsuranceError(Exception):
    """Base class for all errors raised by this package."""


class InvalidParameter(RduInsuranceError, ValueError):
    """A model or tolerance parameter lies outside its admissible range."""


class OutOfDomain(RduInsuranceError, ValueError):
    """A function was evaluated outside the set where it is defined."""


class InvalidInterval(RduInsuranceError, ValueError):
    """An integration interval has lo > hi."""


class NonConvergent(RduInsuranceError, ArithmeticError):
    """An iterative numeric routine did not meet its tolerance."""


class NoSignChange(RduInsuranceError, ArithmeticError):
    """A root bracket does not straddle a sign change."""


class LandmarkNotFound(RduInsuranceError):
    """A structural point of the weighting function could not be bracketed."""


class BracketInvalid(RduInsuranceError):
    """Sign conditions that the theory guarantees failed numerically."""


class NoBracket(RduInsuranceError):
    """The requested budget lies outside the regime handled by a sub-solver."""


class InfeasibleDelta(RduInsuranceError, ValueError):
    """The retention budget cannot be met by any feasible retention."""


class UnsupportedARAClass(RduInsuranceError):
    """The utility's risk-aversion class has no closed-form solver."""


class AssumptionViolated(RduInsuranceError):
    """A modelling assumption required by a solver does not hold."""

    def __init__(self, clause: str, detail: str = ""):
        self.clause = clause
        self.detail = detail
        super().__init__(f"{clause}: {detail}" if detail else clause)


class SolverFailed(RduInsuranceError):
    """A contract solver finished without meeting its residual checks."""

    def __init__(self, message: str, residuals: dict | None = None):
        self.residuals = dict(residuals or {})
        super().__init__(message)


class ConfigError(RduInsuranceError, ValueError):
    """A run configuration is malformed or inconsistent."""
