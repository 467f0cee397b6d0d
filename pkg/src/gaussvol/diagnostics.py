"""Empirical estimators for the quantities the pipeline's analysis relies on.

These power the statistical test suites: Monte Carlo local conductance, the
target-weighted average local conductance, the consecutive-phase warm-start
factor, the checkpoint ratio second moment, and brute-force Gaussian measure
estimation.  Everything here is oracle-mode: independent draws, no Markov
chains, so the estimates are valid cross-checks for the chain-based pipeline.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._validation import check_positive, check_positive_int
from .bodies import AxisBox, ConvexBody, RestrictedBody
from .errors import RejectionBudgetError
from .rng import as_generator

__all__ = [
    "ConductanceReport",
    "local_conductance",
    "average_local_conductance",
    "consecutive_warmness_factor",
    "ratio_second_moment",
    "whole_space_second_moment",
    "mc_gaussian_measure",
    "sample_truncated_gaussian",
]

_CHUNK = 1 << 16


@dataclass(frozen=True)
class ConductanceReport:
    """Monte Carlo estimate of the local conductance at one point."""

    point: np.ndarray
    delta: float
    trials: int
    ell_hat: float
    stderr: float

    def to_dict(self) -> dict:
        return {
            "point": self.point.tolist(),
            "delta": self.delta,
            "trials": self.trials,
            "ell_hat": self.ell_hat,
            "stderr": self.stderr,
        }


def _ball_offsets(n: int, delta: float, count: int, gen) -> np.ndarray:
    g = gen.standard_normal((count, n))
    norms = np.sqrt(np.einsum("ij,ij->i", g, g))
    norms[norms == 0.0] = 1.0
    radii = delta * (1.0 - gen.random(count)) ** (1.0 / n)
    return g * (radii / norms)[:, None]


def local_conductance(
    body: ConvexBody, x, delta: float, trials: int, rng=None
) -> ConductanceReport:
    """Estimate the in-body fraction of the delta-ball around ``x``.

    ``x`` must be a member; the estimate is the hit rate of ``trials``
    uniform ball offsets, with the binomial standard error attached.
    """
    check_positive(delta, "delta")
    trials = check_positive_int(trials, "trials")
    x = np.asarray(x, dtype=np.float64)
    if not body.contains(x):
        raise ValueError("local conductance is defined only at member points")
    gen = as_generator(rng)
    hits = 0
    done = 0
    while done < trials:
        count = min(_CHUNK, trials - done)
        y = x + _ball_offsets(body.dim, delta, count, gen)
        hits += int(np.count_nonzero(body.contains_batch(y)))
        done += count
    ell = hits / trials
    return ConductanceReport(
        point=x.copy(),
        delta=delta,
        trials=trials,
        ell_hat=ell,
        stderr=math.sqrt(ell * (1.0 - ell) / trials),
    )


def sample_truncated_gaussian(
    body: ConvexBody,
    sigma_sq: float,
    count: int,
    rng=None,
    method: str = "auto",
    max_proposals: int = 500_000_000,
) -> np.ndarray:
    """i.i.d. draws from N(0, sigma^2 I) restricted to ``body``.

    ``method="direct"`` is plain rejection from the unrestricted Gaussian.
    For axis boxes (optionally inside a ball restriction) the exact same law
    factorizes per coordinate, which avoids exponentially small acceptance
    in high dimension; ``"auto"`` picks that route when available.
    """
    check_positive(sigma_sq, "sigma_sq")
    count = check_positive_int(count, "count")
    gen = as_generator(rng)
    sigma = math.sqrt(sigma_sq)

    if method not in ("auto", "direct", "factorized"):
        raise ValueError(f"unknown method {method!r}")

    box, cap = _as_box_and_cap(body)
    if method == "factorized" and box is None:
        raise ValueError("factorized sampling requires an axis-box body")
    use_factorized = box is not None and method in ("auto", "factorized")

    if use_factorized:
        return _sample_box_factorized(box, cap, sigma, count, gen)

    out = np.empty((count, body.dim))
    have = 0
    proposed = 0
    while have < count:
        batch = min(_CHUNK, max(1024, 4 * (count - have)))
        if proposed + batch > max_proposals:
            raise RejectionBudgetError(
                f"direct rejection exceeded {max_proposals} proposals at "
                f"acceptance ~{have / max(proposed, 1):.2e}"
            )
        pts = sigma * gen.standard_normal((batch, body.dim))
        proposed += batch
        good = pts[body.contains_batch(pts)]
        take = min(count - have, good.shape[0])
        out[have : have + take] = good[:take]
        have += take
    return out


def _as_box_and_cap(body: ConvexBody):
    if isinstance(body, AxisBox):
        return body, math.inf
    if isinstance(body, RestrictedBody) and isinstance(body.inner, AxisBox):
        return body.inner, body.radius_cap
    return None, None


def _sample_box_factorized(box: AxisBox, cap: float, sigma: float, count: int, gen):
    out = np.empty((count, box.dim))
    have = 0
    while have < count:
        batch = min(_CHUNK, max(1024, 2 * (count - have)))
        pts = np.empty((batch, box.dim))
        for j in range(box.dim):
            col = sigma * gen.standard_normal(batch)
            bad = (col < box.lower[j]) | (col > box.upper[j])
            while bad.any():
                col[bad] = sigma * gen.standard_normal(int(bad.sum()))
                bad = (col < box.lower[j]) | (col > box.upper[j])
            pts[:, j] = col
        if math.isfinite(cap):
            pts = pts[np.einsum("ij,ij->i", pts, pts) <= cap * cap]
        take = min(count - have, pts.shape[0])
        out[have : have + take] = pts[:take]
        have += take
    return out


def average_local_conductance(
    body: ConvexBody,
    sigma_sq: float,
    delta: float,
    samples: int,
    rng=None,
    trials: int = 1000,
) -> float:
    """Target-weighted mean of the local conductance.

    Averages ``local_conductance`` over i.i.d. draws from the restricted
    Gaussian target.  With the worst-case proposal radius
    ``sigma/(4096 sqrt(n))`` this average is at least one half for any body
    containing the unit ball.
    """
    samples = check_positive_int(samples, "samples")
    gen = as_generator(rng)
    pts = sample_truncated_gaussian(body, sigma_sq, samples, gen)
    total = 0.0
    for row in pts:
        total += local_conductance(body, row, delta, trials, gen).ell_hat
    return total / samples


def consecutive_warmness_factor(n: int) -> float:
    """Warm-start factor ``(1 - 1/n)^(-n/2)`` between consecutive phases.

    This is the exact whole-space value of the consecutive-phase warmness;
    restricting to a convex body containing the origin can only shrink it.
    It decreases strictly in ``n`` from 2 at ``n = 2`` toward ``sqrt(e)``.
    """
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    return math.exp(-0.5 * n * math.log1p(-1.0 / n))


def ratio_second_moment(
    body: ConvexBody,
    sigma_d_sq: float,
    sigma_i_sq: float,
    samples: int,
    rng=None,
) -> float:
    """Empirical ``E(Y^2)/E(Y)^2`` of the checkpoint ratio on ``body``.

    ``Y`` is the telescoping density ratio evaluated on i.i.d. draws from
    the concentrated phase (variance ``sigma_d_sq``) restricted to the body.
    For schedule checkpoint pairs this stays below the constant bound of the
    whole-space closed form.
    """
    check_positive(sigma_d_sq, "sigma_d_sq")
    check_positive(sigma_i_sq, "sigma_i_sq")
    if sigma_i_sq < sigma_d_sq:
        raise ValueError("need sigma_i_sq >= sigma_d_sq")
    samples = check_positive_int(samples, "samples")
    gen = as_generator(rng)
    pts = sample_truncated_gaussian(body, sigma_d_sq, samples, gen)
    norms_sq = np.einsum("ij,ij->i", pts, pts)
    y = np.exp(norms_sq * (0.5 / sigma_d_sq - 0.5 / sigma_i_sq))
    mean = float(np.mean(y))
    mean_sq = float(np.mean(y * y))
    return mean_sq / (mean * mean)


def whole_space_second_moment(n: int, sigma_d_sq: float, sigma_i_sq: float) -> float:
    """Closed-form ``E(Y^2)/E(Y)^2`` of the checkpoint ratio on all of R^n.

    With rates ``a_d = 1/(2 sigma_d^2)`` (sampling) and
    ``a_i = 1/(2 sigma_i^2)`` (target), the value is
    ``(a_i^2 / (a_d (2 a_i - a_d)))^(n/2)``, finite iff ``2 a_i > a_d``.
    Restriction to a convex body can only reduce the ratio, so this is the
    reference bound for :func:`ratio_second_moment`.
    """
    a_d = 1.0 / (2.0 * sigma_d_sq)
    a_i = 1.0 / (2.0 * sigma_i_sq)
    if 2.0 * a_i <= a_d:
        return math.inf
    return (a_i * a_i / (a_d * (2.0 * a_i - a_d))) ** (n / 2.0)


def mc_gaussian_measure(
    body: ConvexBody, n_samples: int, rng=None
) -> tuple[float, float]:
    """Brute-force standard Gaussian measure: hit rate of i.i.d. draws.

    Returns ``(p_hat, stderr)``.  This is the independent cross-check for
    the analytic oracles and the annealed estimator.
    """
    n_samples = check_positive_int(n_samples, "n_samples")
    gen = as_generator(rng)
    hits = 0
    done = 0
    while done < n_samples:
        batch = min(_CHUNK, n_samples - done)
        pts = gen.standard_normal((batch, body.dim))
        hits += int(np.count_nonzero(body.contains_batch(pts)))
        done += batch
    p = hits / n_samples
    return p, math.sqrt(p * (1.0 - p) / n_samples)
