"""Exception types raised across the package."""


class MLBelsError(Exception):
    """Base class for every error raised by mlbels."""


class ConfigurationError(MLBelsError, ValueError):
    """Bad hyperparameters, or arrays whose shapes do not line up."""


class NumericalError(MLBelsError, ArithmeticError):
    """A linear system could not be solved."""


class ParseError(MLBelsError):
    """Malformed dataset file.

    ``line`` is the 1-based line number of the offending record, when known.
    """

    def __init__(self, message, line=None, path=None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}"
        if line is not None:
            where += f":{line}" if where else f"line {line}"
        super().__init__(f"{where}: {message}" if where else message)


class StreamError(MLBelsError):
    """A stream produced a chunk inconsistent with the earlier ones.

    The prequential harness attaches whatever it had measured so far as
    ``report``.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report
