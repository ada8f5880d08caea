"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain an operation is defined on."""


class OutOfRangeError(DomainError, IndexError):
    """A query exceeds the bound a precomputed table was built for."""


class CapacityError(RuntimeError):
    """A resource (sieve bound, prime supply, search budget) is too small."""
