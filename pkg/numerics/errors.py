"""Exception hierarchy shared by every sgalab package."""
from typing import Optional


class SgaLabError(Exception):
    """Base class for all recoverable sgalab failures."""


class DegenerateBasisError(SgaLabError):
    """Raised when a basis or a bilinear form is numerically singular."""

    def __init__(self, message: str = "degenerate basis"):
        super().__init__(message)


class VanishingDensityError(SgaLabError):
    """Raised when dividing by a density whose value is zero."""

    def __init__(self, message: str = "division by vanishing density"):
        super().__init__(message)


class NonTransverseCompositionError(SgaLabError):
    """Raised when a linear composition is not transverse."""

    def __init__(
        self,
        message: str = "non-transverse composition (clean case unsupported)"
    ):
        super().__init__(message)


class CompositionError(SgaLabError):
    """Raised when two arrows are not composable."""


class OutsideLocalDomainError(SgaLabError):
    """Raised when a point leaves the chart where the local groupoid lives."""

    def __init__(self, message: str = "outside local domain"):
        super().__init__(message)


class SeriesConsistencyError(SgaLabError):
    """Raised when the series generating function fails at some order."""

    def __init__(self, order: int, residual: float):
        self.order = order
        self.residual = residual
        super().__init__(
            f"series generating function inconsistent at order {order} "
            f"(residual {residual:.3e})"
        )


class CocycleUndefinedError(SgaLabError):
    """Raised when a multiplicative cochain vanishes where it is inverted."""

    def __init__(self, message: str = "cocycle undefined (zero value)"):
        super().__init__(message)


class NotNormalizedError(SgaLabError):
    """Raised when a cochain that must be normalized is not."""


class PreconditionError(SgaLabError):
    """Raised when a named precondition check of a solver fails."""

    def __init__(self, check: str, detail: str = ""):
        self.check = check
        message = f"precondition failed: {check}"
        if detail:
            message = f"{message} ({detail})"
        super().__init__(message)


class ConfigError(SgaLabError):
    """Raised for unreadable or invalid structure configurations."""

    def __init__(
        self,
        message: str,
        line: Optional[int] = None,
        column: Optional[int] = None
    ):
        self.line = line
        self.column = column
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)


class UnknownSuiteError(SgaLabError):
    """Raised for a suite name the CLI does not know."""
