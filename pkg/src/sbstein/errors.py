"""Exception hierarchy shared by every module."""


class ChainError(Exception):
    """Base class for all errors raised by this package."""


class InvalidParameter(ChainError, ValueError):
    """A family parameter or input object violates its invariants."""


class StateOutOfRange(ChainError, IndexError):
    """A finite chain was queried beyond its state space."""


class BudgetExceeded(ChainError):
    """A truncation window hit its hard cap before the requested accuracy."""


class WindowTooSmall(ChainError):
    """A windowed sum or check cannot be certified on the supplied window."""


class ZeroBirthProbability(ChainError):
    """A non-positive up-step probability was met where one is required."""


class NotBirthDeath(ChainError):
    """The chain has mass more than one step below the diagonal."""


class NotMonotone(ChainError):
    """A stochastic-monotonicity certificate is missing or failed."""


class NotOrdered(ChainError):
    """No domination relation holds between two transition matrices."""


class NotStationary(ChainError):
    """A supplied law fails the requested stationarity residual check."""


class SingularSystem(ChainError):
    """A direct linear solve for a stationary law failed."""
