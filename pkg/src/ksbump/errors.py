"""Exception hierarchy shared by all modules."""


class KSError(Exception):
    """Base class for every error raised by ksbump."""


class DomainError(KSError, ValueError):
    """An argument lies outside the domain where the quantity is defined.

    ``interval`` holds the admissible ``(low, high)`` range when one applies.
    """

    def __init__(self, message, interval=None):
        super().__init__(message)
        self.interval = interval


class ConfigurationError(KSError, ValueError):
    """Invalid grid, solver or run configuration."""


class NoRootError(KSError, ValueError):
    """The support-length equation has no admissible root."""


class BranchNotPresentError(KSError, ValueError):
    """The requested steady-state branch does not exist at this chemosensitivity."""


class IntegrationError(KSError, RuntimeError):
    """Time integration failed (non-finite values or step-size underflow).

    The last valid state is attached as ``state`` and, when raised by a run,
    the statistics gathered so far as ``stats``.
    """

    def __init__(self, message, state=None, stats=None):
        super().__init__(message)
        self.state = state
        self.stats = stats
