"""Exception hierarchy shared by all kuokit modules."""


class KuokitError(Exception):
    """Base class for all errors raised by kuokit."""


class InputError(KuokitError):
    """Malformed or inconsistent user input (dimension mismatch, bad values)."""


class CapabilityError(KuokitError):
    """The request is understood but outside what the engine supports."""


class ApproximationError(KuokitError):
    """An iterative approximation failed to converge.

    Carries the best bound found so far in ``best_bound`` (may be None).
    """

    def __init__(self, message, best_bound=None):
        super().__init__(message)
        self.best_bound = best_bound


class SamplingError(KuokitError):
    """A shell could not be filled within the iteration budget."""


class EstimationError(KuokitError):
    """Too little usable data for an exponent fit."""


class ConfigError(KuokitError):
    """Problem configuration failed to parse or validate."""
