"""Exception types shared across the package."""


class CommhideError(Exception):
    """Base class for all package errors."""


class GraphFormatError(CommhideError):
    """A graph file could not be parsed."""


class InvalidPerturbationError(CommhideError):
    """A perturbation does not fit the graph it is applied to."""


class InfeasibleAttackError(CommhideError):
    """The requested attack has no admissible candidate links."""


class ConfigError(CommhideError):
    """An experiment configuration value is missing or out of range."""
