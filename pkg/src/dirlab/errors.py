"""Exception types shared across the package.

Everything raised on purpose derives from DirlabError so the CLI can map
failures to exit codes (validation -> 1, computation -> 2) without string
matching.
"""


class DirlabError(Exception):
    """Base class for all deliberate failures."""


class ConfigurationError(DirlabError):
    """Invalid series descriptor, config file, or argument combination."""


class DomainError(DirlabError):
    """Arguments outside the mathematical domain of an operation."""


class AccuracyError(DirlabError):
    """Requested tolerance unattainable within the configured term budget.

    Carries the best available estimate and the error bound that was actually
    achieved, so callers can degrade gracefully instead of re-running blind.
    """

    def __init__(self, message, estimate=None, bound=None):
        super().__init__(message)
        self.estimate = estimate
        self.bound = bound


class CoefficientOverflowError(DirlabError):
    """Coefficient magnitude left the representable range (float path)."""


class DataError(DirlabError):
    """Regression or check input is unusable (wrong size, sign, or order)."""


class DegenerateDataError(DataError):
    """All-zero or otherwise informationless input where a fit was requested."""


class BracketNotFoundError(DirlabError):
    """A sigma scan never crossed the divergence threshold.

    `side` is "all_convergent" or "all_divergent", naming which side of the
    bracket is missing.
    """

    def __init__(self, message, side):
        super().__init__(message)
        self.side = side


class QuadratureError(DirlabError):
    """Adaptive quadrature failed to meet its tolerance; carries the partial value."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class UnsupportedSeriesError(DirlabError):
    """Operation needs structure (e.g. a reflection partner) the series lacks."""


class InsufficientCoverageError(DirlabError):
    """Diagnostic table is missing cells; `missing` lists the (k, alpha) pairs."""

    def __init__(self, message, missing=()):
        super().__init__(message)
        self.missing = list(missing)
