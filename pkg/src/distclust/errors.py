"""Exception types shared across the package."""


class DistClustError(Exception):
    """Base class for all errors raised by this package."""


class InputError(DistClustError, ValueError):
    """Invalid caller input: dimension mismatch, bad parameter, malformed file."""


class ConsistencyError(DistClustError, RuntimeError):
    """Cross-stage bookkeeping mismatch, e.g. a truncated representative stream."""
