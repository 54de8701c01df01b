"""Exception hierarchy shared across the package."""


class BiphotonError(Exception):
    """Base class for all package-specific errors."""


class ShapeError(BiphotonError, ValueError):
    """Array shape or grid metadata does not match what an operation needs."""


class DomainError(BiphotonError, ValueError):
    """A parameter is outside its physically meaningful domain."""


class ResolutionError(BiphotonError, ValueError):
    """A grid cannot resolve or contain the requested Gaussian widths."""


class GeometryError(BiphotonError, ValueError):
    """A pupil or window does not fit inside the sampling lattice."""


class FitError(BiphotonError, RuntimeError):
    """A Gaussian fit did not converge to a well-defined width."""


class InsufficientDataError(BiphotonError, ValueError):
    """Not enough frames/samples for the requested estimator."""


class ResourceLimitError(BiphotonError, RuntimeError):
    """A computation would exceed the configured memory budget."""


class ConfigError(BiphotonError, ValueError):
    """Scenario configuration failed validation.

    ``errors`` is a list of ``(category, message)`` pairs where category is
    one of ``"schema"`` (unknown/missing/mistyped keys) or ``"domain"``
    (well-formed but physically invalid values).
    """

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(msg for _, msg in self.errors))

    @property
    def has_schema_errors(self) -> bool:
        return any(cat == "schema" for cat, _ in self.errors)
