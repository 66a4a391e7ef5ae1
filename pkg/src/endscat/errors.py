"""Exception hierarchy shared by all modules."""


class EndsError(Exception):
    """Base class for every error raised by endscat."""


class DomainError(EndsError, ValueError):
    """An argument lies outside the domain where an object is defined."""


class IntegrationError(EndsError, RuntimeError):
    """The geodesic integrator failed (step-size underflow, solver failure)."""


class QuadratureError(EndsError, RuntimeError):
    """Numerical quadrature did not converge."""


class BoundaryContamination(EndsError, RuntimeError):
    """A grid state reached the artificial boundary during evolution."""

    def __init__(self, message, t=None, edge_ratio=None):
        super().__init__(message)
        self.t = t
        self.edge_ratio = edge_ratio


class ConfigError(EndsError, ValueError):
    """An experiment configuration failed schema validation."""
