"""The Metropolis ball walk and its supporting samplers.

``ball_walk_step`` is the reference single-step implementation; it works
with any membership oracle.  ``run_sampler`` and ``run_chain_collect`` run
the same chain through the compiled kernel for built-in bodies (falling back
to the oracle loop for foreign ones).  Both consume randomness in the exact
order documented in :mod:`gaussvol._kernels`, so a kernel run and the
equivalent sequence of single steps produce the same trajectory from the
same generator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from ._validation import as_float_vector, check_positive, check_nonnegative_int
from .bodies import ConvexBody, compile_constraints
from .errors import RejectionBudgetError, RetryBudgetError
from .rng import as_generator

__all__ = [
    "WalkState",
    "uniform_in_ball",
    "gaussian_vector",
    "ball_walk_step",
    "run_sampler",
    "run_chain_collect",
    "initial_rejection_sample",
    "speedy_step",
]


@dataclass
class WalkState:
    """Current chain point plus step accounting.

    The counters satisfy ``proposals == accepted + out_of_body +
    filter_rejections + lazy_holds`` after every step, and ``x`` is a member
    of the walk body at all times.
    """

    x: np.ndarray
    sigma_sq: float
    delta: float
    proposals: int = 0
    accepted: int = 0
    out_of_body: int = 0
    filter_rejections: int = 0
    lazy_holds: int = 0
    retries: int = field(default=0, repr=False)  # speedy walk only

    def counters_consistent(self) -> bool:
        return self.proposals == (
            self.accepted + self.out_of_body + self.filter_rejections + self.lazy_holds
        )

    @property
    def oracle_calls(self) -> int:
        """Membership queries consumed so far (lazy holds ask nothing)."""
        return self.proposals - self.lazy_holds + self.retries

    def counters(self) -> dict:
        return {
            "proposals": self.proposals,
            "accepted": self.accepted,
            "out_of_body": self.out_of_body,
            "filter_rejections": self.filter_rejections,
            "lazy_holds": self.lazy_holds,
        }


def _sqnorm(v) -> float:
    # sequential accumulation, matching the kernel's summation order exactly
    # (BLAS dot products can differ in the last ulp)
    total = 0.0
    for val in v:
        sq = val * val
        total += sq
    return total


def uniform_in_ball(n: int, delta: float, rng) -> np.ndarray:
    """A point uniform in the closed ball of radius ``delta``.

    Direction from a normalized standard Gaussian vector, radius
    ``delta * U^(1/n)`` with ``U`` uniform on (0, 1].
    """
    check_positive(delta, "delta")
    gen = as_generator(rng)
    g = gen.standard_normal(n)
    u = 1.0 - gen.random()
    g2 = _sqnorm(g)
    if g2 == 0.0:
        return np.zeros(n)
    return g * (delta * u ** (1.0 / n) / math.sqrt(g2))


def gaussian_vector(n: int, sigma: float, rng) -> np.ndarray:
    """A draw from N(0, sigma^2 I_n)."""
    check_positive(sigma, "sigma")
    gen = as_generator(rng)
    return sigma * gen.standard_normal(n)


def ball_walk_step(state: WalkState, body: ConvexBody, lazy: bool = False, rng=None) -> WalkState:
    """One Metropolis ball-walk step; mutates and returns ``state``.

    Exactly one counter besides ``proposals`` is incremented: a lazy hold,
    an out-of-body proposal, a filter rejection, or an accepted move.
    """
    gen = as_generator(rng)
    state.proposals += 1
    if lazy and gen.random() < 0.5:
        state.lazy_holds += 1
        return state
    y = state.x + uniform_in_ball(state.x.shape[0], state.delta, gen)
    if not body.contains(y):
        state.out_of_body += 1
        return state
    inv_two_sigma_sq = 1.0 / (2.0 * float(state.sigma_sq))
    log_ratio = (_sqnorm(state.x) - _sqnorm(y)) * inv_two_sigma_sq
    u = gen.random()
    if u == 0.0 or math.log(u) <= log_ratio:  # log(0) = -inf always accepts
        state.x = y
        state.accepted += 1
    else:
        state.filter_rejections += 1
    return state


def _start_state(body: ConvexBody, sigma_sq: float, x0, delta: float) -> WalkState:
    check_positive(sigma_sq, "sigma_sq")
    check_positive(delta, "delta")
    x0 = as_float_vector(x0, body.dim, "x0")
    if not body.contains(x0):
        raise ValueError("x0 is not a member of the walk body")
    return WalkState(x=x0.copy(), sigma_sq=sigma_sq, delta=delta)


def run_chain_collect(
    body: ConvexBody,
    sigma_sq: float,
    x0,
    steps_between: int,
    count: int,
    delta: float,
    lazy: bool = False,
    rng=None,
) -> tuple[np.ndarray, np.ndarray, WalkState]:
    """Run the chain, recording the point after every ``steps_between`` steps.

    Returns ``(points, norms_sq, state)`` with ``count`` collected rows.
    The compiled kernel is used whenever the body flattens to constraint
    arrays; otherwise the chain falls back to single oracle steps.
    """
    steps_between = check_nonnegative_int(steps_between, "steps_between")
    count = max(1, int(count))
    state = _start_state(body, sigma_sq, x0, delta)
    gen = as_generator(rng)

    out_points = np.empty((count, body.dim))
    out_norms = np.empty(count)
    try:
        A, b, lower, upper, centers, radii_sq, cap_sq = compile_constraints(body)
    except TypeError:
        for c in range(count):
            for _ in range(steps_between):
                ball_walk_step(state, body, lazy, gen)
            out_points[c] = state.x
            out_norms[c] = float(state.x @ state.x)
        return out_points, out_norms, state

    counters = np.zeros(5, dtype=np.int64)
    _kernels.walk_chain(
        gen,
        state.x,
        lazy,
        float(delta),
        1.0 / (2.0 * float(sigma_sq)),
        steps_between,
        count,
        A,
        b,
        lower,
        upper,
        centers,
        radii_sq,
        cap_sq,
        out_points,
        out_norms,
        counters,
    )
    state.proposals = int(counters[0])
    state.accepted = int(counters[1])
    state.out_of_body = int(counters[2])
    state.filter_rejections = int(counters[3])
    state.lazy_holds = int(counters[4])
    return out_points, out_norms, state


def run_sampler(
    body: ConvexBody,
    sigma_sq: float,
    x0,
    T: int,
    delta: float,
    lazy: bool = False,
    rng=None,
) -> WalkState:
    """Apply ``T`` ball-walk steps from ``x0``; returns the final state.

    ``state.x`` is the final position; the counters account for every step.
    ``x0`` must be a member of the body (the pipeline guarantees its starts
    are members, so a violation is an input error).
    """
    T = check_nonnegative_int(T, "T")
    _, _, state = run_chain_collect(body, sigma_sq, x0, T, 1, delta, lazy, rng)
    return state


def initial_rejection_sample(
    body: ConvexBody,
    sigma0_sq: float,
    max_trials: int = 100_000,
    rng=None,
    cap_radius: float | None = None,
) -> tuple[np.ndarray, int]:
    """Draw from N(0, sigma0^2 I) restricted to ``body`` by rejection.

    Returns ``(point, trials)``.  With the schedule's concentrated starting
    variance nearly all of the Gaussian lies inside the unit ball, so the
    expected number of trials is close to 1 for any valid body.  An optional
    ``cap_radius`` additionally enforces the first phase's ball restriction,
    so the returned point is a valid walk start.
    """
    check_positive(sigma0_sq, "sigma0_sq")
    if max_trials < 1:
        raise ValueError("max_trials must be >= 1")
    gen = as_generator(rng)
    sigma0 = math.sqrt(sigma0_sq)
    cap_sq = math.inf if cap_radius is None else float(cap_radius) ** 2
    for trial in range(1, max_trials + 1):
        x = sigma0 * gen.standard_normal(body.dim)
        if float(x @ x) <= cap_sq and body.contains(x):
            return x, trial
    raise RejectionBudgetError(
        f"no accepted point in {max_trials} trials from the concentrated start; "
        "the body most likely does not contain the unit ball"
    )


def speedy_step(
    state: WalkState,
    body: ConvexBody,
    rng=None,
    max_retries: int = 10**6,
) -> WalkState:
    """Diagnostic-only speedy-walk step: proposals conditioned to land inside.

    Resamples the ball proposal until it lands in the body, then applies the
    Metropolis filter.  This realizes by rejection the walk whose stationary
    density is proportional to ``local_conductance(x) * f(x)``; it is usable
    at desk scale even though conditioning cannot be implemented efficiently
    in general.
    """
    gen = as_generator(rng)
    n = state.x.shape[0]
    y = None
    for attempt in range(1, max_retries + 1):
        cand = state.x + uniform_in_ball(n, state.delta, gen)
        if body.contains(cand):
            y = cand
            break
    if y is None:
        raise RetryBudgetError(
            f"no in-body proposal in {max_retries} retries: local conductance "
            "at the current point is vanishingly small"
        )
    state.retries += attempt - 1  # extra membership queries beyond the first
    state.proposals += 1
    log_ratio = (_sqnorm(state.x) - _sqnorm(y)) / (2.0 * state.sigma_sq)
    u = gen.random()
    if u == 0.0 or math.log(u) <= log_ratio:
        state.x = y
        state.accepted += 1
    else:
        state.filter_rejections += 1
    return state
