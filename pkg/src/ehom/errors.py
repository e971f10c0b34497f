"""Exception hierarchy shared by every module.

The CLI maps these onto exit codes (2 parse/domain, 3 capacity, 4 numeric).
"""


class EhomError(Exception):
    """Base class for all package errors."""


class DomainError(EhomError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class CapacityError(EhomError):
    """A photon count or cutoff exceeds the configured maximum."""


class NumericValidationError(EhomError):
    """A computed quantity failed an internal consistency check."""
