"""EMF-exposure-constrained RIS-assisted MIMO downlink simulator."""

__version__ = "0.1.0"

from .errors import (
    ConfigError,
    ConvergenceError,
    DegenerateChannelError,
    DomainError,
    GeometryError,
)

__all__ = [
    "ConfigError",
    "ConvergenceError",
    "DegenerateChannelError",
    "DomainError",
    "GeometryError",
    "__version__",
]
