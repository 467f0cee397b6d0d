"""Hot loop of the Metropolis ball walk.

One source function implements the chain; it is compiled with numba when
available and runs as plain Python otherwise.  Both paths draw from the same
``numpy.random.Generator`` in the same order (numba's generator support is
bit-compatible with numpy), so trajectories are identical either way.

Randomness consumed per step, in order:

1. lazy coin (one uniform, lazy mode only); a hold consumes nothing else,
2. ``n`` standard normals for the proposal direction,
3. one uniform for the proposal radius ``delta * (1 - u)^(1/n)``,
4. one uniform for the Metropolis filter coin, drawn only when the proposal
   lands inside the body (drawn even when the move is uphill).

Counter slots: 0 proposals, 1 accepted, 2 out_of_body, 3 filter_rejections,
4 lazy_holds.
"""

from __future__ import annotations

import os

import numpy as np

__all__ = ["walk_chain", "walk_chain_python", "jit_enabled"]


def _walk_chain_impl(
    gen,
    x,
    lazy,
    delta,
    inv_two_sigma_sq,
    steps_between,
    n_collect,
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
):
    n = x.shape[0]
    n_rows = A.shape[0]
    n_balls = centers.shape[0]
    inv_n = 1.0 / n
    gbuf = np.empty(n)

    xn2 = 0.0
    for j in range(n):
        xsq = x[j] * x[j]
        xn2 += xsq

    for c in range(n_collect):
        for _ in range(steps_between):
            counters[0] += 1
            if lazy:
                if gen.random() < 0.5:
                    counters[4] += 1
                    continue

            # multiply-add pairs stay two statements so the compiled path
            # cannot contract them into FMAs; the python path has none
            g2 = 0.0
            for j in range(n):
                gj = gen.standard_normal()
                gbuf[j] = gj
                gsq = gj * gj
                g2 += gsq
            u = 1.0 - gen.random()
            if g2 > 0.0:
                scale = delta * u**inv_n / np.sqrt(g2)
            else:
                scale = 0.0

            yn2 = 0.0
            inside = True
            for j in range(n):
                step = scale * gbuf[j]
                yj = x[j] + step
                gbuf[j] = yj
                ysq = yj * yj
                yn2 += ysq
                if yj < lower[j] or yj > upper[j]:
                    inside = False
            if inside and yn2 > cap_sq:
                inside = False
            if inside:
                for r in range(n_rows):
                    acc = 0.0
                    for j in range(n):
                        term = A[r, j] * gbuf[j]
                        acc += term
                    if acc > b[r]:
                        inside = False
                        break
            if inside:
                for r in range(n_balls):
                    acc = 0.0
                    for j in range(n):
                        d = gbuf[j] - centers[r, j]
                        dsq = d * d
                        acc += dsq
                    if acc > radii_sq[r]:
                        inside = False
                        break

            if not inside:
                counters[2] += 1
                continue

            if np.log(gen.random()) <= (xn2 - yn2) * inv_two_sigma_sq:
                for j in range(n):
                    x[j] = gbuf[j]
                xn2 = yn2
                counters[1] += 1
            else:
                counters[3] += 1

        for j in range(n):
            out_points[c, j] = x[j]
        out_norms[c] = xn2

    return xn2


walk_chain_python = _walk_chain_impl

_DISABLE = os.environ.get("GAUSSVOL_DISABLE_JIT", "") not in ("", "0", "false")

if not _DISABLE:
    try:
        from numba import njit

        walk_chain = njit(cache=True, nogil=True)(_walk_chain_impl)
        _JIT = True
    except ImportError:  # pragma: no cover - exercised only without numba
        walk_chain = _walk_chain_impl
        _JIT = False
else:
    walk_chain = _walk_chain_impl
    _JIT = False


def jit_enabled() -> bool:
    return _JIT
