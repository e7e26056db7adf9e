"""Exception hierarchy shared by all modules.

Each class maps to one CLI exit code so that batch callers can
distinguish bad input from numerical failure.
"""


class BosegasError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class ConfigurationError(BosegasError):
    """Invalid parameters, malformed config files, bad grids."""

    exit_code = 2

    def __init__(self, messages):
        if isinstance(messages, str):
            messages = [messages]
        self.messages = list(messages)
        super().__init__("; ".join(self.messages))


class ConvergenceError(BosegasError):
    """An iterative solve did not reach its tolerance."""

    exit_code = 3

    def __init__(self, message, history=None):
        super().__init__(message)
        self.history = list(history) if history is not None else []


class InvariantViolation(BosegasError):
    """A mathematically guaranteed property failed on the grid.

    Signals under-resolution or non-physical input rather than a bug in
    the caller; the message carries a remediation hint.
    """

    exit_code = 4


class GridMismatchError(BosegasError):
    """Two fields that must share a grid do not."""

    exit_code = 2
