"""Exception hierarchy shared by all modules."""


class BilipError(Exception):
    """Base class for errors raised by this package."""


class DomainError(BilipError, ValueError):
    """A point was evaluated outside the domain of an interval map."""


class ConstructionError(BilipError, ValueError):
    """A map, action or sequence failed a construction-time certificate."""


class NumericError(BilipError, ArithmeticError):
    """An iterative numerical procedure did not converge.

    ``details`` carries whatever the failing routine wants to attach
    (last estimates, residuals, iteration counts).
    """

    def __init__(self, message, **details):
        super().__init__(message)
        self.details = details


class ResourceError(BilipError, RuntimeError):
    """A requested enumeration exceeds the configured budget."""


class OrientationError(BilipError, ValueError):
    """The driving map moves the base point the wrong way."""


class EquivarianceError(BilipError, ValueError):
    """Two definitions of an equivariant extension disagree on a gap."""


class GeometryError(BilipError, ValueError):
    """Enumerated gap images overlap."""


class ConfigError(BilipError, ValueError):
    """Invalid run configuration."""
