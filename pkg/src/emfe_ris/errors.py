class EmfeRisError(Exception):
    pass


class DomainError(EmfeRisError, ValueError):
    pass


class ConfigError(EmfeRisError, ValueError):
    pass


class GeometryError(EmfeRisError, ValueError):
    pass


class DegenerateChannelError(EmfeRisError, ArithmeticError):
    pass


class ConvergenceError(EmfeRisError, RuntimeError):
    """Iterative solver ran out of iterations; ``last_iterate`` holds its final vector."""

    def __init__(self, message, last_iterate=None):
        super().__init__(message)
        self.last_iterate = last_iterate
