"""Runtime failure types raised by the samplers and the pipeline.

Input validation problems raise plain ``ValueError``; these classes cover
failures that occur after inputs were accepted (budget exhaustion,
non-finite accumulation), which the CLI maps to a distinct exit code.
"""

__all__ = [
    "EstimationError",
    "RejectionBudgetError",
    "RetryBudgetError",
    "NonFiniteAccumulationError",
]


class EstimationError(RuntimeError):
    """Base class for runtime estimation failures."""


class RejectionBudgetError(EstimationError):
    """The rejection sampler ran out of trials.

    The probable cause is a body that does not actually contain the unit
    ball (so the concentrated starting Gaussian keeps missing it).
    """


class RetryBudgetError(EstimationError):
    """The speedy-walk proposal resampler hit its retry bound, which
    indicates vanishing local conductance at the current point."""


class NonFiniteAccumulationError(EstimationError):
    """A ratio or log-measure accumulation became non-finite."""
