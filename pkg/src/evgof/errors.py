"""Exception types shared across the package."""


class EvGofError(Exception):
    """Base class for all package errors."""


class DomainError(EvGofError, ValueError):
    """A parameter or argument lies outside its admissible domain."""


class TauRangeError(DomainError):
    """A dependence value cannot be attained by the requested family."""


class UnsupportedOperation(EvGofError, TypeError):
    """The operation is not defined for this copula family."""


class TieError(EvGofError, ValueError):
    """Ties were found in the data while the tie policy forbids them."""


class DegenerateError(EvGofError, ValueError):
    """The input carries no usable dependence information (e.g. constant)."""


class ConfigError(EvGofError, ValueError):
    """An inconsistent configuration was requested."""
