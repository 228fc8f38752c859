"""Exception and warning types."""


class MagWeylError(Exception):
    """Base class for library errors."""


class DomainError(MagWeylError, ValueError):
    """A point falls outside the region where data is available."""


class ComposabilityError(MagWeylError, ValueError):
    """Fiber dimensions of two symbols do not match."""


class NotInvertibleError(MagWeylError, ArithmeticError):
    """An operator is numerically singular (condition number above threshold)."""


class CapabilityError(MagWeylError, NotImplementedError):
    """Requested feature is outside what the implementation supports."""


class ContourError(MagWeylError, ValueError):
    """A contour runs too close to the spectrum."""


class BadPrincipalSymbolError(MagWeylError, ValueError):
    """A parametrix seed does not invert the symbol to leading order."""


class MagWeylWarning(UserWarning):
    """Diagnostic about truncation, degenerate geometry or skipped nodes."""


class CoverError(MagWeylError, ValueError):
    """The momentum cover is too small for the symbol's coupling range."""
