"""Exception hierarchy shared by the loopgrade modules."""


class LoopgradeError(Exception):
    """Base class for all package errors."""


class DomainError(LoopgradeError, ValueError):
    """A parameter lies outside the domain an operation accepts."""


class OutOfRange(DomainError):
    """A normalized process lies outside the reference mesh."""


class SimulationError(LoopgradeError):
    """Base for closed-loop simulation failures.

    ``response`` carries the trajectory computed up to the failure (may be None).
    """

    def __init__(self, message, response=None):
        super().__init__(message)
        self.response = response


class Unstable(SimulationError):
    """The normalized response exceeded the instability bound."""


class NumericalFailure(SimulationError):
    """A state became non-finite during integration."""


class NoCrossover(LoopgradeError):
    """No gain crossover could be bracketed on the frequency grid."""


class Infeasible(LoopgradeError):
    """Reference-tuning search found no point satisfying the margin constraints."""


class DegenerateResponse(LoopgradeError):
    """The response carries no excitation worth assessing."""


class ZeroReference(LoopgradeError):
    """The reference response has (numerically) zero absolute area."""


class BudgetExceeded(LoopgradeError):
    """Dataset generation ran out of attempts before filling a class quota."""


class NotSettled(LoopgradeError):
    """An identification record does not reach steady state."""


class FitDiverged(LoopgradeError):
    """Model fit residual is too large to trust."""
