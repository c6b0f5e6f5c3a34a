"""Exception types shared across the package.

Exit-code mapping for the command line lives here so library code can
raise without knowing about the CLI: configuration problems exit 1,
numerical failures exit 2, I/O problems exit 3.
"""


class FPatternError(Exception):
    """Base class for all package errors."""

    exit_code = 2


class ConfigurationError(FPatternError):
    """Bad or inconsistent user input (grid sizes, parameter ranges, config keys)."""

    exit_code = 1


class NumericalError(FPatternError):
    """A computation produced an unusable result (non-finite state, sign loss, ...)."""

    exit_code = 2
