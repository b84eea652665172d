"""Shared exception types for the laboratory."""


class SpdelabError(Exception):
    """Base class for all package errors."""


class ConfigError(SpdelabError):
    """Bad or unknown configuration input."""


class FormatError(SpdelabError):
    """File format or version mismatch."""


class ResolutionError(SpdelabError):
    """Requested scale cannot be represented on the given grid/window."""


class StepSizeError(SpdelabError):
    """Time step rejected by a stability guard."""


class ConditioningError(SpdelabError):
    """Iterative solve failed to converge."""


class QuadratureError(SpdelabError):
    """Quadrature refinement did not converge."""


class SamplingError(SpdelabError):
    """Monte Carlo estimate is underpowered for the requested check."""


class DivergenceSignal(SpdelabError):
    """Solution magnitude exceeded the blow-up guard."""
