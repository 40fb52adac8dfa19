"""Exception types shared across the package.

The CLI maps :class:`ValidationError` to exit code 1 and every other
:class:`HerdwatchError` (runtime failures) to exit code 2.
"""


class HerdwatchError(Exception):
    pass


class ValidationError(HerdwatchError, ValueError):
    """Malformed model, belief, configuration, or CSV input."""


class DivergenceError(ValidationError):
    """Change-time quantities requested for a non-absorbing chain."""


class SimulationError(HerdwatchError, RuntimeError):
    """Filter or simulation failure at runtime."""


class ImpossibleObservationError(SimulationError):
    """Observation has zero probability under the predicted belief."""


class ImpossibleActionError(SimulationError):
    """Action has zero probability under the current decision profile."""


class ReplayError(SimulationError):
    """Recorded action sequence is inconsistent with the model."""
