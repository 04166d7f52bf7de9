"""Exception hierarchy shared by the design pipeline."""


class MlfirError(Exception):
    """Base class for all errors raised by this package."""


class SpecError(MlfirError, ValueError):
    """Malformed or inconsistent filter specification."""


class SpecInfeasible(MlfirError):
    """The specification cannot be met even with real-valued coefficients."""


class IntegerInfeasible(MlfirError):
    """No integer design exists under the imposed adder count / depth limits."""


class DepthInfeasible(IntegerInfeasible):
    """Infeasible at every adder depth up to the word-length bound."""


class Diverged(MlfirError):
    """The adaptive refinement loop hit its iteration cap."""


class SolverTimeout(MlfirError):
    """A solve hit its time limit; ``incumbent`` holds the best design, if any."""

    def __init__(self, message, incumbent=None):
        super().__init__(message)
        self.incumbent = incumbent


class GraphError(MlfirError):
    """Corrupt adder graph (cycle, value mismatch, bad extraction)."""


class BackendUnavailable(MlfirError):
    """Requested MILP backend is not installed."""
