"""Exception hierarchy shared by every module (and both kernel backends)."""


class FedMechError(Exception):
    """Base class for all package errors."""


class DomainError(FedMechError, ValueError):
    """Argument outside the mathematical domain of a function."""


class DegenerateInputError(FedMechError, ValueError):
    """Inputs that make a quantity undefined, e.g. zero total contribution."""


class NoRootError(FedMechError):
    """A bracketed root search found no sign change."""


class SolverError(FedMechError):
    """A numerical search failed to bracket or hit its hard cap."""


class AssumptionViolation(FedMechError):
    """A modelling assumption required by the mechanism does not hold."""


class RewardExceedsCostError(FedMechError, ValueError):
    """Monetary rate r is at least c_i + eps, so accuracy shaping is undefined."""


class ConfigError(FedMechError, ValueError):
    """Malformed or inconsistent scenario / manifest configuration."""

    def __init__(self, message, key=None, line=None):
        super().__init__(message)
        self.key = key
        self.line = line


class FeasibilityError(FedMechError):
    """A settlement would hand out more accuracy than the global model has."""
