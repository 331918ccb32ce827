"""Exception hierarchy shared across the package.

The CLI maps :class:`ParameterError` to exit code 2 and :class:`CapacityError`
to exit code 3.
"""


class ParameterError(ValueError):
    """Invalid argument, configuration value or contract violation."""


class CapacityError(ParameterError):
    """A problem size exceeds a configured memory/time cap."""


class NormalizationError(ParameterError):
    """The selected normalization denominator is empty or zero."""


class UnsupportedModelError(ParameterError):
    """The model has terms the requested backend cannot handle (e.g. cubic terms)."""


class UndefinedMetricError(ValueError):
    """A metric cannot be evaluated for the given inputs."""
