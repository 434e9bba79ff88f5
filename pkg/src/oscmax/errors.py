"""Exception types shared across the package."""


class OscmaxError(Exception):
    """Base class for all package errors."""


class DomainError(OscmaxError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class OutOfDomainError(OscmaxError):
    """A point or box falls outside the truncated grid."""


class TruncatedGridError(OscmaxError):
    """A construction needs cubes beyond the truncation box; raise max_layer."""


class NearRegionNotFoundError(OscmaxError):
    """No admissible enlargement cube exists for the requested cell."""


class NoInteriorMaxError(OscmaxError):
    """The kernel has no interior maximum in t; the supremum sits at t -> 0+."""


class NegativeValueError(OscmaxError):
    """Grid functions must carry nonnegative cell averages."""


class NonIntegrableError(OscmaxError):
    """A weight or its dual density fails to integrate on the given cube."""


class UsageError(OscmaxError):
    """Invalid configuration or command-line input."""
