class MagnonError(Exception):
    """Base class for every error raised by the simulator."""


class DomainError(MagnonError, ValueError):
    """An input lies outside the physically meaningful domain."""


class SingularConfigurationError(MagnonError):
    """A steady-state denominator vanishes for the given detunings."""


class InconsistentParametersError(MagnonError):
    """Parameters contradict each other (e.g. G != 0 with G0 = 0)."""


class ConvergenceError(MagnonError):
    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (last residual {residual:.3e})")
        self.residual = residual


class StabilityError(MagnonError):
    """The drift matrix has an eigenvalue with non-negative real part."""


class NumericalError(MagnonError):
    """A linear-algebra or integration step failed."""


class ConfigError(MagnonError):
    def __init__(self, message: str, paths: list[str] | None = None):
        self.paths = paths or []
        if self.paths:
            message = f"{message}: {', '.join(self.paths)}"
        super().__init__(message)
