class RailPowerError(Exception):
    """Base class for every error raised by the simulator."""


class DomainError(RailPowerError, ValueError):
    """An input lies outside the domain of the operation."""


class DegenerateInputError(DomainError):
    """The inputs make a formula divide by zero."""


class ModeMismatchError(RailPowerError):
    """An operation was combined with an SNR mode it is not defined for."""


class ConvergenceError(RailPowerError):
    """An iterative method ran out of evaluations or iterations."""


class ConfigError(RailPowerError):
    """A run configuration could not be parsed or validated."""

    def __init__(self, message: str, key: str = ""):
        super().__init__(message)
        self.key = key
