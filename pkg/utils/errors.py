"""
Exception hierarchy shared by every package.
"""


class OvershootLabError(Exception):
    """Base class for all errors raised by Overshoot Lab."""


class ConfigurationError(OvershootLabError, ValueError):
    """Invalid experiment configuration or law declaration."""

    def __init__(self, message: str, field: str = None):
        self.field = field
        if field:
            message = f"{field}: {message}"
        super().__init__(message)


class CapabilityError(OvershootLabError):
    """The requested quantity is not available for this law/set/target."""


class StructuralError(OvershootLabError):
    """A finite chain does not have the structure an operation needs."""


class DomainError(OvershootLabError):
    """A state or subset lies outside the domain of a kernel or measure."""


class ConsistencyError(OvershootLabError):
    """Two independent numerical routes disagree beyond tolerance."""
