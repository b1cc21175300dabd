"""
Exception types shared by every module of the Time-Varying Market Efficiency toolkit.

Each error carries the process exit code the command-line front end maps it to.
"""


class EfficiencyError(Exception):
    """Base class for all toolkit errors."""

    exit_code = 1


class ConfigurationError(EfficiencyError, ValueError):
    """Invalid parameter, missing column, or inconsistent configuration."""

    exit_code = 2


class DataError(EfficiencyError, ValueError):
    """Input data violates a domain invariant (gaps, non-positive prices, ...)."""

    exit_code = 3


class NumericError(EfficiencyError, ArithmeticError):
    """Singular systems, unit roots and other numerical failures."""

    exit_code = 4


class StageError(EfficiencyError):
    """An error raised inside a named pipeline stage."""

    def __init__(self, stage: str, cause: Exception):
        self.stage = stage
        self.cause = cause
        self.exit_code = getattr(cause, "exit_code", 1)
        super().__init__(f"[{stage}] {type(cause).__name__}: {cause}")
