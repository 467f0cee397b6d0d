"""Gaussian measure of convex bodies by annealed ball-walk Monte Carlo.

The package estimates the standard Gaussian measure of a convex body given
through a membership oracle, and samples the Gaussian restricted to the
body.  Analytic oracles for halfspaces, boxes, and balls plus oracle-mode
diagnostics make every stochastic component statistically checkable.
"""

from .anneal import (
    AnnealOptions,
    RatioEstimate,
    VolumeEstimate,
    estimate_phase_ratio,
    gaussian_volume,
    median_boost,
    sample_gaussian_restricted,
)
from .bodies import (
    AxisBox,
    Ball,
    ConvexBody,
    Halfspace,
    Intersection,
    Polytope,
    RestrictedBody,
    body_from_dict,
    body_to_dict,
    contains,
    load_body,
    restrict_to_ball,
    verify_unit_ball_containment,
)
from .diagnostics import (
    ConductanceReport,
    average_local_conductance,
    consecutive_warmness_factor,
    local_conductance,
    mc_gaussian_measure,
    ratio_second_moment,
    sample_truncated_gaussian,
    whole_space_second_moment,
)
from .errors import (
    EstimationError,
    NonFiniteAccumulationError,
    RejectionBudgetError,
    RetryBudgetError,
)
from .estimators import (
    GaussianVolumeEstimator,
    NotFittedError,
    RestrictedGaussianSampler,
)
from .gaussian import (
    DEFAULT_DELTA_SCALE,
    DEFAULT_STEP_SCALE,
    WORST_CASE_STEP_SCALE,
    CoolingSchedule,
    NoAnalyticOracleError,
    StepBudgetPolicy,
    exact_gaussian_measure,
    log_unnormalized_density,
    metropolis_acceptance,
    regularized_gamma_p,
    regularized_gamma_q,
    schedule_params,
    std_normal_cdf,
)
from .rng import RngStream
from .walk import (
    WalkState,
    ball_walk_step,
    gaussian_vector,
    initial_rejection_sample,
    run_chain_collect,
    run_sampler,
    speedy_step,
    uniform_in_ball,
)

__version__ = "0.1.0"

__all__ = [
    "AnnealOptions",
    "AxisBox",
    "Ball",
    "ConductanceReport",
    "ConvexBody",
    "CoolingSchedule",
    "DEFAULT_DELTA_SCALE",
    "DEFAULT_STEP_SCALE",
    "EstimationError",
    "GaussianVolumeEstimator",
    "Halfspace",
    "Intersection",
    "NoAnalyticOracleError",
    "NonFiniteAccumulationError",
    "NotFittedError",
    "WORST_CASE_STEP_SCALE",
    "Polytope",
    "RatioEstimate",
    "RejectionBudgetError",
    "RestrictedBody",
    "RestrictedGaussianSampler",
    "RetryBudgetError",
    "RngStream",
    "StepBudgetPolicy",
    "VolumeEstimate",
    "WalkState",
    "average_local_conductance",
    "ball_walk_step",
    "body_from_dict",
    "body_to_dict",
    "consecutive_warmness_factor",
    "contains",
    "estimate_phase_ratio",
    "exact_gaussian_measure",
    "gaussian_vector",
    "gaussian_volume",
    "initial_rejection_sample",
    "load_body",
    "local_conductance",
    "log_unnormalized_density",
    "mc_gaussian_measure",
    "median_boost",
    "metropolis_acceptance",
    "ratio_second_moment",
    "regularized_gamma_p",
    "regularized_gamma_q",
    "restrict_to_ball",
    "run_chain_collect",
    "run_sampler",
    "sample_gaussian_restricted",
    "sample_truncated_gaussian",
    "schedule_params",
    "speedy_step",
    "std_normal_cdf",
    "uniform_in_ball",
    "verify_unit_ball_containment",
    "whole_space_second_moment",
]
