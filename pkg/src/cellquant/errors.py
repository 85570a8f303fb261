"""Exception types raised by cellquant."""


class CellquantError(Exception):
    """Base class for all library errors."""


class DomainError(CellquantError, ValueError):
    """An argument lies outside the domain of a function."""


class UndefinedPosteriorError(CellquantError, ValueError):
    """Both conditional densities vanish, so the posterior is 0/0."""


class EmptyGridError(CellquantError, ValueError):
    """Discretization produced no atom with positive mass."""


class EmptyCellError(CellquantError, ValueError):
    """A centroid was requested for a cell with zero mass."""


class InvalidQuantizerError(CellquantError, ValueError):
    """Boundaries or labels do not describe a partition of the grid."""


class ConfigError(CellquantError, ValueError):
    """A configuration value is malformed.  ``field`` names the offender."""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")


class OracleSizeError(CellquantError, ValueError):
    """Exhaustive enumeration was refused because the instance is too large."""
