"""Exception types raised across the package."""


class BlockSamplingError(Exception):
    """Base class for all package errors."""


class ConfigError(BlockSamplingError, ValueError):
    """Invalid configuration, detected before any simulation runs."""


class TruncationError(ConfigError):
    """Coefficient truncation leaves too much tail variance."""

    def __init__(self, message, ratio, bound):
        super().__init__(message)
        self.ratio = ratio
        self.bound = bound


class DegenerateScaleError(BlockSamplingError, ValueError):
    """A scale estimate is zero, so studentized quantities are undefined."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class InsufficientPastError(BlockSamplingError, ValueError):
    def __init__(self, needed, available):
        super().__init__(
            f"backward windows need {needed} past values but only {available} "
            f"are available (short by {needed - available})"
        )
        self.needed = needed
        self.available = available


class SeriesTooShortError(BlockSamplingError, ValueError):
    pass


class ResourceLimitError(BlockSamplingError):
    pass


class UnsupportedBoundaryError(BlockSamplingError, ValueError):
    pass


class QuadratureError(BlockSamplingError, RuntimeError):
    def __init__(self, message, best_estimate, error_estimate):
        super().__init__(message)
        self.best_estimate = best_estimate
        self.error_estimate = error_estimate
