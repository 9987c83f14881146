"""Exception hierarchy.

Every error raised by the library derives from :class:`PortoptError`. The CLI
maps the three families below onto its exit codes.
"""


class PortoptError(Exception):
    """Base class for all library errors."""


# --- usage / configuration (exit code 1) ---------------------------------


class ConfigError(PortoptError, ValueError):
    """Invalid parameter or inconsistent combination of parameters."""


class CoverageError(ConfigError):
    """A sampling plan cannot cover every variable."""


# --- data problems (exit code 2) -----------------------------------------


class DataError(PortoptError, ValueError):
    """Input data is malformed or degenerate."""


class DimensionError(DataError):
    """Vector or matrix shape does not match the problem size."""


class IngestionError(DataError):
    """A price file could not be parsed."""


class ModelError(DataError):
    """A market model cannot be built from the given prices."""


class StatsError(DataError):
    """Portfolio statistics are undefined for the given selection."""


class UndefinedRatioError(DataError):
    """Approximation ratio requested against a non-negative baseline."""


class IndependenceViolation(DataError):
    """A selection contains two adjacent vertices."""

    def __init__(self, pair):
        self.pair = tuple(int(v) for v in pair)
        super().__init__(f"vertices {self.pair[0]} and {self.pair[1]} are adjacent")


# --- solver failures (exit code 3) ---------------------------------------


class SolverError(PortoptError, RuntimeError):
    """A solver or recombiner could not produce a result."""


class SizeError(SolverError):
    """Problem too large for exhaustive enumeration."""


class RecombinationError(SolverError):
    """Sub-system solutions cannot be recombined."""

    def __init__(self, uncovered):
        self.uncovered = sorted(int(v) for v in uncovered)
        super().__init__(f"variables not covered by any sub-system: {self.uncovered}")


class DegenerateEncodingError(SolverError):
    """All amplitudes that encode the coefficients are zero."""
