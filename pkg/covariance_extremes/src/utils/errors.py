"""Exception hierarchy shared by the library and the CLI.

Every error carries the process exit code the CLI maps it to.
"""


class CovExtremesError(Exception):
    exit_code = 1


class ParseError(CovExtremesError):
    exit_code = 2

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DomainError(CovExtremesError, ValueError):
    exit_code = 3


class DegenerateDiagonalError(DomainError):
    pass


class ResourceRefusal(CovExtremesError):
    exit_code = 4


class NonConvergenceError(CovExtremesError):
    exit_code = 5

    def __init__(self, message: str, last_iterate=None, estimate: float | None = None):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.estimate = estimate


class ConfigError(CovExtremesError, ValueError):
    exit_code = 6


class DegenerateThresholdWarning(UserWarning):
    pass


class GrowthRateWarning(UserWarning):
    pass
