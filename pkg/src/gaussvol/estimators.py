"""Estimator-style wrappers around the pipeline.

These follow the scikit-learn parameter protocol (constructor stores
hyperparameters verbatim, ``fit`` does the work, fitted attributes carry a
trailing underscore, ``get_params``/``set_params`` round-trip), so the
algorithms compose with that ecosystem's tooling without depending on it.
"""

from __future__ import annotations

import inspect
import math

import numpy as np

from .anneal import AnnealOptions, VolumeEstimate, gaussian_volume
from .bodies import ConvexBody, RestrictedBody, verify_unit_ball_containment
from .gaussian import (
    DEFAULT_DELTA_SCALE,
    DEFAULT_STEP_SCALE,
    StepBudgetPolicy,
    schedule_params,
)
from .rng import RngStream
from .walk import initial_rejection_sample, run_chain_collect, run_sampler

__all__ = [
    "NotFittedError",
    "ParamsMixin",
    "GaussianVolumeEstimator",
    "RestrictedGaussianSampler",
]


class NotFittedError(ValueError, AttributeError):
    """Raised when a method needs a fitted estimator."""


class ParamsMixin:
    """scikit-learn-compatible ``get_params``/``set_params``.

    Constructor keyword names are the parameter names; constructors must
    store each argument unmodified on an attribute of the same name.
    """

    @classmethod
    def _param_names(cls):
        sig = inspect.signature(cls.__init__)
        return sorted(p for p in sig.parameters if p != "self")

    def get_params(self, deep: bool = True) -> dict:
        return {name: getattr(self, name) for name in self._param_names()}

    def set_params(self, **params):
        valid = set(self._param_names())
        for name, value in params.items():
            if name not in valid:
                raise ValueError(
                    f"invalid parameter {name!r} for {type(self).__name__}; "
                    f"valid parameters are {sorted(valid)}"
                )
            setattr(self, name, value)
        return self

    def _check_fitted(self, *attrs):
        for attr in attrs:
            if not hasattr(self, attr):
                raise NotFittedError(
                    f"this {type(self).__name__} instance is not fitted yet; "
                    "call fit(body) first"
                )

    def __repr__(self):
        args = ", ".join(f"{k}={v!r}" for k, v in self.get_params().items())
        return f"{type(self).__name__}({args})"


def _check_body(body) -> ConvexBody:
    if not isinstance(body, ConvexBody):
        raise ValueError(
            f"expected a ConvexBody, got {type(body).__name__}; build one from "
            "gaussvol.bodies or load it from JSON"
        )
    return body


class GaussianVolumeEstimator(ParamsMixin):
    """Gaussian measure of a convex body, scikit-learn style.

    ``fit(body)`` runs the annealed pipeline; the results land in
    ``log_measure_``, ``measure_``, and ``result_``.

    Parameters mirror :func:`gaussvol.anneal.gaussian_volume`; ``seed`` and
    ``stream_id`` name the random stream, so refitting with equal parameters
    reproduces the estimate exactly.
    """

    def __init__(
        self,
        eps: float = 0.2,
        fail_prob: float = 0.1,
        seed: int = 0,
        stream_id: int = 0,
        step_scale: float = DEFAULT_STEP_SCALE,
        delta_scale: float = DEFAULT_DELTA_SCALE,
        lazy: bool = False,
        workers: int = 1,
        median_constant: float = 2.0,
        allow_unverified: bool = False,
    ):
        self.eps = eps
        self.fail_prob = fail_prob
        self.seed = seed
        self.stream_id = stream_id
        self.step_scale = step_scale
        self.delta_scale = delta_scale
        self.lazy = lazy
        self.workers = workers
        self.median_constant = median_constant
        self.allow_unverified = allow_unverified

    def fit(self, body, y=None):
        body = _check_body(body)
        result: VolumeEstimate = gaussian_volume(
            body,
            eps=self.eps,
            fail_prob=self.fail_prob,
            policy=StepBudgetPolicy(constant_scale=self.step_scale),
            rng=RngStream(self.seed, self.stream_id),
            options=AnnealOptions(
                delta_scale=self.delta_scale,
                lazy=self.lazy,
                median_constant=self.median_constant,
            ),
            workers=self.workers,
            allow_unverified=self.allow_unverified,
        )
        self.n_features_in_ = body.dim
        self.body_ = body
        self.result_ = result
        self.log_measure_ = result.log_measure
        self.measure_ = result.measure
        self.oracle_calls_ = result.total_oracle_calls
        return self

    def score(self, body=None, y=None) -> float:
        """The fitted log-measure (higher is more mass captured)."""
        self._check_fitted("log_measure_")
        return self.log_measure_


class RestrictedGaussianSampler(ParamsMixin):
    """Sampler for the standard Gaussian restricted to a convex body.

    ``fit(body)`` anneals a chain up to variance 1; each subsequent
    ``sample(count)`` continues that chain, emitting one point per
    per-sample step budget.  Sampling advances the internal chain, so
    consecutive calls return fresh (approximately independent) points while
    the whole sequence stays a deterministic function of the seed.
    """

    def __init__(
        self,
        eps: float = 0.1,
        seed: int = 0,
        stream_id: int = 0,
        step_scale: float = DEFAULT_STEP_SCALE,
        delta_scale: float = DEFAULT_DELTA_SCALE,
        lazy: bool = False,
        max_rejection_trials: int = 100_000,
        allow_unverified: bool = False,
    ):
        self.eps = eps
        self.seed = seed
        self.stream_id = stream_id
        self.step_scale = step_scale
        self.delta_scale = delta_scale
        self.lazy = lazy
        self.max_rejection_trials = max_rejection_trials
        self.allow_unverified = allow_unverified

    def fit(self, body, y=None):
        body = _check_body(body)
        verdict = verify_unit_ball_containment(body)
        if verdict is not True and not self.allow_unverified:
            what = "failed" if verdict is False else "could not be verified"
            raise ValueError(
                f"unit-ball containment {what}; set allow_unverified=True to "
                "run anyway"
            )
        schedule = schedule_params(body.dim, self.eps)
        options = AnnealOptions(delta_scale=self.delta_scale, lazy=self.lazy)
        gen = RngStream(self.seed, self.stream_id).generator()

        n = schedule.n
        sqrt_n = math.sqrt(n)
        sig = schedule.sigma_sq
        T = StepBudgetPolicy(constant_scale=self.step_scale).steps(schedule)
        cap1 = 4.0 * math.sqrt(sig[1]) * sqrt_n
        x, _ = initial_rejection_sample(
            body, sig[0], self.max_rejection_trials, gen, cap_radius=cap1
        )
        for i in range(1, schedule.s + 1):
            sigma_i_sq = float(sig[i])
            restricted = RestrictedBody(body, 4.0 * math.sqrt(sigma_i_sq) * sqrt_n)
            state = run_sampler(
                restricted, sigma_i_sq, x, T, options.delta(sigma_i_sq, n), self.lazy, gen
            )
            x = state.x

        self.n_features_in_ = n
        self.body_ = body
        self.schedule_ = schedule
        self.steps_per_sample_ = T
        self._restricted = RestrictedBody(body, 4.0 * sqrt_n)
        self._delta = options.delta(1.0, n)
        self._gen = gen
        self._x = x
        return self

    def sample(self, count: int = 1) -> np.ndarray:
        self._check_fitted("body_")
        if count < 1:
            raise ValueError("count must be >= 1")
        pts, _, _ = run_chain_collect(
            self._restricted,
            1.0,
            self._x,
            self.steps_per_sample_,
            count,
            self._delta,
            self.lazy,
            self._gen,
        )
        self._x = pts[-1].copy()
        return pts
