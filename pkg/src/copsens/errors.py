"""Exception types shared across the package."""


class CopsensError(Exception):
    """Base class for all library errors."""


class InvalidInputError(CopsensError, ValueError):
    """An argument violates a documented precondition."""


class DegenerateCopulaError(CopsensError, ValueError):
    """Copula correlation at +/-1 where a density is required."""


class InversionError(CopsensError, RuntimeError):
    """Monotone-transform inversion failed to bracket the target."""


class DivergedFitError(CopsensError, RuntimeError):
    """Training hit a non-finite loss."""

    def __init__(self, epoch, message=None):
        self.epoch = epoch
        super().__init__(message or f"non-finite loss at epoch {epoch}")


class SchemaError(CopsensError, ValueError):
    """Dataset does not match the declared variable schema."""


class SweepError(CopsensError, RuntimeError):
    """A grid-point fit failed during a curve sweep."""
