"""Exception types shared across the package."""


class LdrankError(Exception):
    """Base class for errors raised by this package."""


class InputError(LdrankError, ValueError):
    """Malformed or inconsistent input data."""


class ParseError(InputError):
    """A fixture file could not be parsed.

    ``line`` is 1-based; ``None`` when the error is not tied to a line.
    """

    def __init__(self, message, path=None, line=None):
        where = ""
        if path is not None:
            where = f"{path}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}" if where else message)
        self.path = path
        self.line = line


class ConvergenceError(LdrankError, RuntimeError):
    """An iterative method exhausted its iteration budget.

    ``state`` carries the best (or last) iterate reached.
    """

    def __init__(self, message, state=None):
        super().__init__(message)
        self.state = state
