"""Exception hierarchy shared by all modules."""


class CommonInfoError(Exception):
    """Base class for all package errors."""


class ConfigError(CommonInfoError):
    """Invalid inputs: bad shapes, unnormalized pmfs, out-of-range parameters."""


class DomainError(CommonInfoError):
    """Evaluation requested outside the mathematical domain of an operation."""


class ResourceBudgetError(CommonInfoError):
    """An exact computation would exceed its enumeration budget."""


class SamplingError(CommonInfoError):
    """Rejection sampling exceeded its retry budget."""
