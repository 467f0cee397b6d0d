"""Shared helpers for the test suite: quadrature oracles, batch-mean errors,
and a foreign membership oracle used to exercise the fallback paths."""

from __future__ import annotations

import math

import numpy as np
import pytest

from gaussvol.bodies import ConvexBody


def gauss_interval_integral(sigma_sq: float, lo: float, hi: float, npts: int = 96) -> float:
    """Gauss-Legendre quadrature of exp(-x^2 / (2 sigma_sq)) over [lo, hi].

    Independent of the package's normal-CDF implementation, so it can serve
    as an oracle for it.
    """
    nodes, weights = np.polynomial.legendre.leggauss(npts)
    x = 0.5 * (hi - lo) * nodes + 0.5 * (hi + lo)
    return 0.5 * (hi - lo) * float(np.sum(weights * np.exp(-x * x / (2.0 * sigma_sq))))


def box_phase_ratio(sigma_d_sq: float, sigma_i_sq: float, lo: float, hi: float, n: int) -> float:
    """Quadrature value of the telescoping ratio on the box [lo, hi]^n."""
    return (
        gauss_interval_integral(sigma_i_sq, lo, hi)
        / gauss_interval_integral(sigma_d_sq, lo, hi)
    ) ** n


def batch_mean_stderr(series, n_batches: int = 100) -> tuple[float, float]:
    """Mean and batch-means standard error of a (possibly correlated) series."""
    series = np.asarray(series, dtype=np.float64)
    usable = (series.size // n_batches) * n_batches
    batches = series[:usable].reshape(n_batches, -1).mean(axis=1)
    return float(series.mean()), float(batches.std(ddof=1) / math.sqrt(n_batches))


class DiskOracle(ConvexBody):
    """Membership-only body (a disk) that is foreign to the built-in variants,
    so containment verification reports unknown and the walk cannot compile it."""

    def __init__(self, radius: float, dim: int = 2):
        self.radius = float(radius)
        self.dim = dim

    def contains_batch(self, X):
        X = np.asarray(X, dtype=np.float64)
        return np.einsum("ij,ij->i", X, X) <= self.radius * self.radius


@pytest.fixture
def disk_oracle():
    return DiskOracle(radius=3.0, dim=2)
