"""Exception types shared across the package."""


class ValidationError(ValueError):
    """An input object violates its invariants (mass, sign, shape)."""


class DimensionError(ValueError):
    """Two objects live on domains of different bit-width."""


class DomainError(ValueError):
    """Arguments are outside the range where an operation is defined."""


class SaturationError(DomainError):
    """The distinguisher is at least as large as the entropy budget (|D| > 2^k).

    The maximum of E D(Y) over the entropy superlevel set is then 1.
    """


class SizeCapError(DomainError):
    """The instance is too large for an exhaustive or convex solve."""


class NumericError(ArithmeticError):
    """A numerical routine failed to converge or to bracket a root."""
