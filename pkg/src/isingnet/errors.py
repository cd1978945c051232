"""Exception types shared across the package.

Each error class carries the process exit code the CLI maps it to.
"""


class IsingNetError(Exception):
    exit_code = 1


class UsageError(IsingNetError, ValueError):
    """Bad arguments: dimension mismatch, out-of-range parameters."""

    exit_code = 2


class ConfigError(UsageError):
    """Invalid run configuration. ``path`` names the offending field."""

    exit_code = 2

    def __init__(self, message: str, path: str = ""):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class ParseError(UsageError):
    exit_code = 2

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class CapacityError(IsingNetError):
    """Problem too large for an exact (enumerative / LP) computation."""

    exit_code = 4


class NumericalError(IsingNetError, ArithmeticError):
    """Non-finite values during integration."""

    exit_code = 3

    def __init__(self, message: str, step: int | None = None, trial: int | None = None):
        self.step = step
        self.trial = trial
        where = []
        if trial is not None:
            where.append(f"trial {trial}")
        if step is not None:
            where.append(f"step {step}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)


class UndefinedHeuristicError(UsageError):
    """Spectral heuristic requested on an empty coupling spectrum."""
