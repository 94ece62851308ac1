"""Error types shared across the package.

Exit-code mapping at the CLI: InvalidInputError -> 2, ResourceCapError -> 3.
"""


class InvalidInputError(ValueError):
    """Raised when an argument violates a precondition (bad modulus, non-prime
    level, malformed module description, non-coprime CRT moduli, ...)."""


class ResourceCapError(RuntimeError):
    """Raised when a computation would exceed a configured cap (closure size,
    point count, prime bound).  Fail loudly rather than thrash."""
