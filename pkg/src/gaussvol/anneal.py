"""The annealed volume pipeline and the restricted-Gaussian sampler.

A single volume run anneals one chain point through the cooling schedule.
At every checkpoint phase it detours: starting from the saved point of the
previous checkpoint phase ``d``, it continues that chain for ``k`` samples
(one every per-sample step budget) targeting the phase-``d`` density
restricted to its ball cap, and averages the density ratios into the
checkpoint weight.  The product of the weights, carried in log space behind
the closed-form starting integral, is the measure estimate.  Runs are
repeated and median-selected to reach the requested failure probability.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from ._validation import (
    check_in_open_unit_interval,
    check_positive,
    check_positive_int,
)
from .bodies import ConvexBody, RestrictedBody, verify_unit_ball_containment
from .errors import NonFiniteAccumulationError
from .gaussian import (
    DEFAULT_DELTA_SCALE,
    CoolingSchedule,
    StepBudgetPolicy,
    schedule_params,
)
from .rng import RngStream
from .walk import initial_rejection_sample, run_chain_collect, run_sampler

__all__ = [
    "RatioEstimate",
    "VolumeEstimate",
    "AnnealOptions",
    "estimate_phase_ratio",
    "median_boost",
    "gaussian_volume",
    "sample_gaussian_restricted",
]

_MEDIAN_RUN_NS = 1  # spawn-key namespace for per-run streams


@dataclass(frozen=True)
class RatioEstimate:
    """One checkpoint ratio ``W_alpha`` with its sample moments.

    Each term ``Y_j = exp(||X_j||^2/2 * (1/sigma_d^2 - 1/sigma_i^2))`` is at
    least 1 because the schedule variances increase, so ``W >= 1`` always.
    """

    alpha: int
    d: int
    i: int
    k: int
    sum_y: float
    sum_y_sq: float
    sigma_d_sq: float
    sigma_i_sq: float

    @property
    def W(self) -> float:
        return self.sum_y / self.k

    @property
    def log_w(self) -> float:
        return math.log(self.W)

    @property
    def second_moment_ratio(self) -> float:
        """Empirical E(Y^2)/E(Y)^2 for this checkpoint."""
        return self.k * self.sum_y_sq / (self.sum_y * self.sum_y)


@dataclass(frozen=True)
class VolumeEstimate:
    """Result of a (possibly median-boosted) volume computation.

    ``log_measure`` is authoritative; ``measure`` may underflow to zero in
    high dimension.  ``run_log_measures`` carries every boosted run for
    audit, with ``selected_run`` pointing at the median.
    """

    log_measure: float
    measure: float
    per_phase: tuple[RatioEstimate, ...]
    schedule: CoolingSchedule
    stream: RngStream | None
    steps_per_sample: int
    total_oracle_calls: int
    diagnostics: dict = field(repr=False)
    run_log_measures: tuple[float, ...] = ()
    selected_run: int | None = None


@dataclass(frozen=True)
class AnnealOptions:
    """Tuning knobs of the pipeline that are not part of the schedule.

    ``delta_scale`` multiplies the worst-case proposal radius
    ``sigma/(4096 sqrt(n))``; the calibrated default walks with steps of
    order ``sigma/sqrt(n)``.  ``checkpoint_chains > 1`` splits each
    checkpoint's samples across that many restarted chains instead of one
    continued chain (for variance studies).
    """

    delta_scale: float = DEFAULT_DELTA_SCALE
    lazy: bool = False
    max_rejection_trials: int = 100_000
    checkpoint_chains: int = 1
    median_constant: float = 2.0

    def delta(self, sigma_sq: float, n: int) -> float:
        return self.delta_scale * math.sqrt(sigma_sq) / (4096.0 * math.sqrt(n))


def estimate_phase_ratio(
    samples,
    sigma_d_sq: float,
    sigma_i_sq: float,
    *,
    norms_sq=None,
    alpha: int = 0,
    d: int = 0,
    i: int = 0,
    allow_equal: bool = False,
) -> RatioEstimate:
    """Average the telescoping density ratios over checkpoint samples.

    ``samples`` is an array of row points from the flatter-phase target;
    callers that already track squared norms can pass ``norms_sq`` instead.
    Requires ``sigma_i_sq > sigma_d_sq`` (equality only with
    ``allow_equal``, for degenerate-identity tests).
    """
    check_positive(sigma_d_sq, "sigma_d_sq")
    check_positive(sigma_i_sq, "sigma_i_sq")
    if sigma_i_sq < sigma_d_sq or (sigma_i_sq == sigma_d_sq and not allow_equal):
        raise ValueError("need sigma_i_sq > sigma_d_sq for a checkpoint ratio")
    if norms_sq is None:
        if samples is None:
            raise ValueError("provide samples or norms_sq")
        pts = np.asarray(samples, dtype=np.float64)
        if pts.ndim == 1:
            pts = pts.reshape(1, -1)
        if pts.shape[0] == 0:
            raise ValueError("samples must be nonempty")
        norms_sq = np.einsum("ij,ij->i", pts, pts)
    else:
        norms_sq = np.asarray(norms_sq, dtype=np.float64)
        if norms_sq.size == 0:
            raise ValueError("norms_sq must be nonempty")

    # One log-space exponent per sample; never a ratio of two exponentials.
    exponent = norms_sq * (0.5 / sigma_d_sq - 0.5 / sigma_i_sq)
    with np.errstate(over="ignore"):  # overflow is reported as our own error below
        y = np.exp(exponent)
    est = RatioEstimate(
        alpha=alpha,
        d=d,
        i=i,
        k=int(norms_sq.size),
        sum_y=float(np.sum(y)),
        sum_y_sq=float(np.sum(y * y)),
        sigma_d_sq=float(sigma_d_sq),
        sigma_i_sq=float(sigma_i_sq),
    )
    if not math.isfinite(est.sum_y) or not math.isfinite(est.sum_y_sq):
        raise NonFiniteAccumulationError(
            f"checkpoint ratio at phase {i} accumulated a non-finite moment"
        )
    return est


def _single_volume_run(
    body: ConvexBody,
    schedule: CoolingSchedule,
    policy: StepBudgetPolicy,
    stream: RngStream,
    options: AnnealOptions,
) -> VolumeEstimate:
    n = schedule.n
    gen = stream.generator()
    T = policy.steps(schedule)
    sqrt_n = math.sqrt(n)
    sig = schedule.sigma_sq

    cap1 = 4.0 * math.sqrt(sig[1]) * sqrt_n  # phase-1 cap, so the start is a valid walk start
    x, trials = initial_rejection_sample(
        body, sig[0], options.max_rejection_trials, gen, cap_radius=cap1
    )
    oracle_calls = trials
    accepted = proposals = wasted = 0

    saved = {0: x.copy()}
    ratios: list[RatioEstimate] = []
    checkpoints = set(schedule.checkpoints)

    for i in range(1, schedule.s + 1):
        sigma_i_sq = float(sig[i])
        cap_i = 4.0 * math.sqrt(sigma_i_sq) * sqrt_n
        restricted = RestrictedBody(body, cap_i)
        state = run_sampler(
            restricted,
            sigma_i_sq,
            x,
            T,
            options.delta(sigma_i_sq, n),
            options.lazy,
            gen,
        )
        x = state.x
        oracle_calls += state.oracle_calls
        proposals += state.proposals
        accepted += state.accepted
        wasted += state.out_of_body

        if i in checkpoints:
            alpha, dph = schedule.checkpoint_pair(i)
            sigma_d_sq = float(sig[dph])
            cap_d = 4.0 * math.sqrt(sigma_d_sq) * sqrt_n
            body_d = RestrictedBody(body, cap_d)
            delta_d = options.delta(sigma_d_sq, n)
            start_d = saved[dph]

            chains = max(1, int(options.checkpoint_chains))
            per_chain = [schedule.k // chains] * chains
            for extra in range(schedule.k - sum(per_chain)):
                per_chain[extra] += 1
            norm_parts = []
            for count in per_chain:
                if count == 0:
                    continue
                _, norms, st = run_chain_collect(
                    body_d, sigma_d_sq, start_d, T, count, delta_d, options.lazy, gen
                )
                oracle_calls += st.oracle_calls
                proposals += st.proposals
                accepted += st.accepted
                wasted += st.out_of_body
                norm_parts.append(norms)
            ratios.append(
                estimate_phase_ratio(
                    None,
                    sigma_d_sq,
                    sigma_i_sq,
                    norms_sq=np.concatenate(norm_parts),
                    alpha=alpha,
                    d=dph,
                    i=i,
                )
            )

        if i % schedule.sqrt_n_floor == 0:
            saved[i] = x.copy()

    # The raw telescoping product (2 pi sigma_0^2)^(n/2) W_1 ... W_m estimates
    # the unnormalized integral of exp(-||x||^2/2) over the body; dividing by
    # (2 pi)^(n/2) converts it to the probability measure reported here.
    log_measure = 0.5 * n * math.log(sig[0])
    for est in ratios:
        log_measure += est.log_w
    if not math.isfinite(log_measure):
        raise NonFiniteAccumulationError("log-measure accumulation is non-finite")
    measure = math.exp(log_measure) if log_measure < 700.0 else math.inf

    return VolumeEstimate(
        log_measure=log_measure,
        measure=measure,
        per_phase=tuple(ratios),
        schedule=schedule,
        stream=stream,
        steps_per_sample=T,
        total_oracle_calls=oracle_calls,
        diagnostics={
            "rejection_trials": trials,
            "acceptance_rate": accepted / proposals if proposals else 0.0,
            "wasted_fraction": wasted / proposals if proposals else 0.0,
            "delta_scale": options.delta_scale,
            "lazy": options.lazy,
        },
        run_log_measures=(log_measure,),
        selected_run=0,
    )


def median_boost(run, fail_prob: float, rng, c_med: float = 2.0, workers: int = 1) -> VolumeEstimate:
    """Repeat ``run`` over independent streams and keep the median run.

    Executes ``r = max(1, ceil(c_med * ln(1/fail_prob)))`` runs; the one
    whose log-measure is the (lower) median is returned, with every run's
    log-measure attached for audit.  ``run`` is called with one derived
    stream per run index, so results do not depend on ``workers``.
    """
    fail_prob = check_in_open_unit_interval(fail_prob, "fail_prob")
    check_positive(c_med, "c_med")
    base = rng if isinstance(rng, RngStream) else RngStream(int(rng))
    r = max(1, math.ceil(c_med * math.log(1.0 / fail_prob)))
    streams = [base.derive(_MEDIAN_RUN_NS, idx) for idx in range(r)]

    if workers > 1 and r > 1:
        with ThreadPoolExecutor(max_workers=min(workers, r)) as pool:
            runs = list(pool.map(run, streams))
    else:
        runs = [run(s) for s in streams]

    logs = [v.log_measure for v in runs]
    order = sorted(range(r), key=lambda idx: logs[idx])
    sel = order[(r - 1) // 2]
    total_calls = sum(v.total_oracle_calls for v in runs)
    return replace(
        runs[sel],
        run_log_measures=tuple(logs),
        selected_run=sel,
        total_oracle_calls=total_calls,
        stream=base,
    )


def _check_containment(body: ConvexBody, allow_unverified: bool):
    verdict = verify_unit_ball_containment(body)
    if verdict is True:
        return
    if not allow_unverified:
        what = "failed" if verdict is False else "could not be verified"
        raise ValueError(
            f"unit-ball containment {what} for this body; pass the explicit "
            "override to run anyway"
        )


def gaussian_volume(
    body: ConvexBody,
    eps: float,
    fail_prob: float = 0.1,
    policy: StepBudgetPolicy | None = None,
    rng=0,
    options: AnnealOptions | None = None,
    workers: int = 1,
    allow_unverified: bool = False,
) -> VolumeEstimate:
    """Estimate the standard Gaussian measure of ``body``.

    Runs the full annealing pipeline with median boosting to failure
    probability ``fail_prob``.  The returned estimate carries the log-space
    value (authoritative), the per-checkpoint ratios, and the total
    membership-oracle call count.
    """
    eps = check_in_open_unit_interval(eps, "eps")
    fail_prob = check_in_open_unit_interval(fail_prob, "fail_prob")
    check_positive_int(workers, "workers")
    _check_containment(body, allow_unverified)
    policy = policy or StepBudgetPolicy()
    options = options or AnnealOptions()
    schedule = schedule_params(body.dim, eps)

    def one(stream: RngStream) -> VolumeEstimate:
        return _single_volume_run(body, schedule, policy, stream, options)

    return median_boost(one, fail_prob, rng, c_med=options.median_constant, workers=workers)


def sample_gaussian_restricted(
    body: ConvexBody,
    eps: float,
    count: int,
    policy: StepBudgetPolicy | None = None,
    rng=0,
    options: AnnealOptions | None = None,
    allow_unverified: bool = False,
) -> np.ndarray:
    """Sample the standard Gaussian restricted to ``body``.

    Anneals one chain up to variance 1 (no checkpoint work), then keeps the
    variance-1 chain running, emitting a point every per-sample step budget.
    The first emitted point is the end of the annealing pass; all points are
    members of ``body``.
    """
    eps = check_in_open_unit_interval(eps, "eps")
    count = check_positive_int(count, "count")
    _check_containment(body, allow_unverified)
    policy = policy or StepBudgetPolicy()
    options = options or AnnealOptions()
    schedule = schedule_params(body.dim, eps)
    base = rng if isinstance(rng, RngStream) else RngStream(int(rng))
    gen = base.generator()

    n = schedule.n
    T = policy.steps(schedule)
    sqrt_n = math.sqrt(n)
    sig = schedule.sigma_sq

    cap1 = 4.0 * math.sqrt(sig[1]) * sqrt_n  # phase-1 cap, so the start is a valid walk start
    x, _ = initial_rejection_sample(
        body, sig[0], options.max_rejection_trials, gen, cap_radius=cap1
    )
    for i in range(1, schedule.s + 1):
        sigma_i_sq = float(sig[i])
        restricted = RestrictedBody(body, 4.0 * math.sqrt(sigma_i_sq) * sqrt_n)
        state = run_sampler(
            restricted, sigma_i_sq, x, T, options.delta(sigma_i_sq, n), options.lazy, gen
        )
        x = state.x

    out = np.empty((count, n))
    out[0] = x
    if count > 1:
        restricted = RestrictedBody(body, 4.0 * sqrt_n)
        pts, _, _ = run_chain_collect(
            restricted, 1.0, x, T, count - 1, options.delta(1.0, n), options.lazy, gen
        )
        out[1:] = pts
    return out
