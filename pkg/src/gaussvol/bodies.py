"""Convex body specifications and membership oracles.

Bodies are closed convex sets accessed through a membership predicate.  The
supported variants (halfspace, polytope, ball, axis-aligned box, and
intersections of these) all evaluate membership exactly, up to floating-point
evaluation of their defining inequalities.  Boundary points count as members:
every comparison is a ``<=``.  No tolerance band is applied, since a fuzzy
oracle would bias the random walks built on top of it.

The sampling and volume pipelines additionally require the body to contain
the unit ball centered at the origin; :func:`verify_unit_ball_containment`
checks this exactly for the built-in variants.
"""

from __future__ import annotations

import json
from typing import Sequence

import numpy as np

from ._validation import as_float_vector, as_points, check_positive

__all__ = [
    "ConvexBody",
    "Halfspace",
    "Polytope",
    "Ball",
    "AxisBox",
    "Intersection",
    "RestrictedBody",
    "contains",
    "restrict_to_ball",
    "verify_unit_ball_containment",
    "body_from_dict",
    "body_to_dict",
    "load_body",
]


def _frozen(a) -> np.ndarray:
    out = np.array(a, dtype=np.float64)
    out.setflags(write=False)
    return out


class ConvexBody:
    """Base class for membership oracles.

    Subclasses implement :meth:`contains_batch` over row points; scalar
    membership derives from it.  Instances are immutable after construction
    and membership queries are pure, so they are safe to share across
    threads.
    """

    dim: int

    def contains(self, x) -> bool:
        x = as_float_vector(x, self.dim, "x")
        return bool(self.contains_batch(x.reshape(1, -1))[0])

    def contains_batch(self, X) -> np.ndarray:
        raise NotImplementedError

    def __contains__(self, x) -> bool:
        return self.contains(x)


class Halfspace(ConvexBody):
    """Closed halfspace ``{x : a . x <= b}``."""

    def __init__(self, a, b):
        self.a = _frozen(as_float_vector(a, name="a"))
        if not np.any(self.a):
            raise ValueError("halfspace normal must be nonzero")
        self.b = float(b)
        self.dim = self.a.shape[0]

    def contains_batch(self, X) -> np.ndarray:
        X = as_points(X, self.dim)
        return X @ self.a <= self.b

    def __repr__(self):
        return f"Halfspace(a={self.a.tolist()}, b={self.b})"


class Polytope(ConvexBody):
    """Intersection of halfspaces ``{x : A x <= b}`` (H-representation).

    Rows are kept exactly as given; normalization happens on demand in the
    containment verifier so user input survives bit-exactly.
    """

    def __init__(self, A, b):
        A = np.asarray(A, dtype=np.float64)
        if A.ndim != 2 or A.shape[0] == 0:
            raise ValueError("A must be a nonempty 2-D array of constraint rows")
        self.A = _frozen(A)
        self.b = _frozen(as_float_vector(b, A.shape[0], "b"))
        if not np.all(np.linalg.norm(A, axis=1) > 0):
            raise ValueError("polytope rows must have nonzero normals")
        self.dim = A.shape[1]

    def contains_batch(self, X) -> np.ndarray:
        X = as_points(X, self.dim)
        return np.all(X @ self.A.T <= self.b, axis=1)

    def __repr__(self):
        return f"Polytope({self.A.shape[0]} rows, dim={self.dim})"


class Ball(ConvexBody):
    """Closed Euclidean ball of given center and radius."""

    def __init__(self, center, radius):
        self.center = _frozen(as_float_vector(center, name="center"))
        self.radius = check_positive(radius, "radius")
        self.dim = self.center.shape[0]

    def contains_batch(self, X) -> np.ndarray:
        X = as_points(X, self.dim)
        d = X - self.center
        return np.einsum("ij,ij->i", d, d) <= self.radius * self.radius

    def __repr__(self):
        return f"Ball(center={self.center.tolist()}, radius={self.radius})"


class AxisBox(ConvexBody):
    """Axis-aligned box ``{x : lower <= x <= upper}`` (componentwise)."""

    def __init__(self, lower, upper):
        self.lower = _frozen(as_float_vector(lower, name="lower"))
        self.upper = _frozen(as_float_vector(upper, self.lower.shape[0], "upper"))
        if np.any(self.lower > self.upper):
            raise ValueError("box has lower > upper in some coordinate")
        self.dim = self.lower.shape[0]

    @classmethod
    def cube(cls, dim: int, halfwidth: float = 1.0) -> "AxisBox":
        hw = check_positive(halfwidth, "halfwidth")
        return cls(np.full(dim, -hw), np.full(dim, hw))

    def contains_batch(self, X) -> np.ndarray:
        X = as_points(X, self.dim)
        return np.all((X >= self.lower) & (X <= self.upper), axis=1)

    def __repr__(self):
        return f"AxisBox(dim={self.dim})"


class Intersection(ConvexBody):
    """Intersection of several bodies of equal dimension."""

    def __init__(self, members: Sequence[ConvexBody]):
        members = tuple(members)
        if not members:
            raise ValueError("intersection needs at least one member")
        dims = {m.dim for m in members}
        if len(dims) != 1:
            raise ValueError(f"intersection members disagree on dimension: {sorted(dims)}")
        self.members = members
        self.dim = members[0].dim

    def contains_batch(self, X) -> np.ndarray:
        X = as_points(X, self.dim)
        out = np.ones(X.shape[0], dtype=bool)
        for m in self.members:
            if not out.any():
                break
            out &= m.contains_batch(X)
        return out

    def __repr__(self):
        return f"Intersection({len(self.members)} members, dim={self.dim})"


class RestrictedBody(ConvexBody):
    """A body intersected with the origin-centered ball of radius ``radius_cap``.

    The annealing pipeline restricts each phase to the inner body intersected
    with the ball of radius ``4 * sigma * sqrt(n)``; this wrapper realizes
    that conjunction while keeping the inner body untouched.
    """

    def __init__(self, inner: ConvexBody, radius_cap: float):
        self.inner = inner
        self.radius_cap = check_positive(radius_cap, "radius_cap")
        self.dim = inner.dim

    def contains_batch(self, X) -> np.ndarray:
        X = as_points(X, self.dim)
        within = np.einsum("ij,ij->i", X, X) <= self.radius_cap * self.radius_cap
        if not within.any():
            return within
        within &= self.inner.contains_batch(X)
        return within

    def __repr__(self):
        return f"RestrictedBody({self.inner!r}, radius_cap={self.radius_cap})"


def contains(body: ConvexBody, x) -> bool:
    """Membership oracle: is ``x`` in the closed set ``body``?"""
    return body.contains(x)


def restrict_to_ball(body: ConvexBody, radius: float) -> RestrictedBody:
    """Intersect ``body`` with the origin-centered ball of radius ``radius``."""
    return RestrictedBody(body, radius)


def verify_unit_ball_containment(body: ConvexBody) -> bool | None:
    """Exact check that ``body`` contains the unit ball ``B_n``.

    Per-variant criteria:

    * halfspace / polytope rows: ``b_i / ||a_i|| >= 1``
    * axis box: ``lower_i <= -1`` and ``upper_i >= +1``
    * ball: ``radius >= 1 + ||center||``
    * intersection: all members pass
    * restricted body: the inner body passes and ``radius_cap >= 1``

    Returns ``True``/``False`` for the built-in variants, or ``None``
    ("unknown") for foreign :class:`ConvexBody` subclasses, in which case the
    pipeline requires an explicit user override.
    """
    if isinstance(body, Halfspace):
        return bool(body.b / np.linalg.norm(body.a) >= 1.0)
    if isinstance(body, Polytope):
        margins = body.b / np.linalg.norm(body.A, axis=1)
        return bool(np.all(margins >= 1.0))
    if isinstance(body, AxisBox):
        return bool(np.all(body.lower <= -1.0) and np.all(body.upper >= 1.0))
    if isinstance(body, Ball):
        return bool(body.radius >= 1.0 + np.linalg.norm(body.center))
    if isinstance(body, Intersection):
        results = [verify_unit_ball_containment(m) for m in body.members]
        if any(r is False for r in results):
            return False
        if any(r is None for r in results):
            return None
        return True
    if isinstance(body, RestrictedBody):
        if body.radius_cap < 1.0:
            return False
        return verify_unit_ball_containment(body.inner)
    return None


# --- JSON interchange -------------------------------------------------------
#
# {"dim": n, "type": "halfspace"|"polytope"|"ball"|"box"|"intersection", ...}
# with numbers written as IEEE-754 doubles in decimal text.

def body_from_dict(doc: dict) -> ConvexBody:
    """Build a body from its JSON document form."""
    if not isinstance(doc, dict):
        raise ValueError("body document must be a JSON object")
    try:
        kind = doc["type"]
        dim = int(doc["dim"])
    except KeyError as exc:
        raise ValueError(f"body document missing required field {exc}") from exc
    if dim < 1:
        raise ValueError(f"dim must be >= 1, got {dim}")

    if kind == "halfspace":
        body = Halfspace(doc["a"], doc["b"])
    elif kind == "polytope":
        body = Polytope(doc["A"], doc["b"])
    elif kind == "ball":
        body = Ball(doc.get("center", [0.0] * dim), doc["radius"])
    elif kind == "box":
        body = AxisBox(doc["lower"], doc["upper"])
    elif kind == "intersection":
        members = [body_from_dict(m) for m in doc["members"]]
        body = Intersection(members)
    else:
        raise ValueError(f"unknown body type {kind!r}")
    if body.dim != dim:
        raise ValueError(f"declared dim {dim} does not match fields (got {body.dim})")
    return body


def body_to_dict(body: ConvexBody) -> dict:
    if isinstance(body, Halfspace):
        return {"dim": body.dim, "type": "halfspace", "a": body.a.tolist(), "b": body.b}
    if isinstance(body, Polytope):
        return {"dim": body.dim, "type": "polytope", "A": body.A.tolist(), "b": body.b.tolist()}
    if isinstance(body, Ball):
        return {"dim": body.dim, "type": "ball", "center": body.center.tolist(), "radius": body.radius}
    if isinstance(body, AxisBox):
        return {"dim": body.dim, "type": "box", "lower": body.lower.tolist(), "upper": body.upper.tolist()}
    if isinstance(body, Intersection):
        return {"dim": body.dim, "type": "intersection", "members": [body_to_dict(m) for m in body.members]}
    raise ValueError(f"cannot serialize body of type {type(body).__name__}")


def load_body(path) -> ConvexBody:
    """Read a body from a JSON file."""
    with open(path, "r", encoding="utf-8") as fh:
        return body_from_dict(json.load(fh))


# --- flattening for the compiled walk kernel --------------------------------

def compile_constraints(body: ConvexBody):
    """Flatten a built-in body into constraint arrays for the walk kernel.

    Returns ``(A, b, lower, upper, centers, radii_sq, cap_sq)`` where
    membership is the conjunction of ``A x <= b``, box bounds, the listed
    balls, and ``||x||^2 <= cap_sq``.  Raises ``TypeError`` for foreign body
    classes; callers then fall back to querying the membership oracle
    directly.
    """
    n = body.dim
    rows: list[np.ndarray] = []
    offs: list[float] = []
    lower = np.full(n, -np.inf)
    upper = np.full(n, np.inf)
    centers: list[np.ndarray] = []
    radii_sq: list[float] = []
    cap_sq = np.inf

    def visit(node: ConvexBody):
        nonlocal lower, upper, cap_sq
        if isinstance(node, Halfspace):
            rows.append(node.a)
            offs.append(node.b)
        elif isinstance(node, Polytope):
            rows.extend(node.A)
            offs.extend(node.b)
        elif isinstance(node, AxisBox):
            lower = np.maximum(lower, node.lower)
            upper = np.minimum(upper, node.upper)
        elif isinstance(node, Ball):
            if np.any(node.center):
                centers.append(node.center)
                radii_sq.append(node.radius * node.radius)
            else:
                cap_sq = min(cap_sq, node.radius * node.radius)
        elif isinstance(node, Intersection):
            for m in node.members:
                visit(m)
        elif isinstance(node, RestrictedBody):
            cap_sq = min(cap_sq, node.radius_cap * node.radius_cap)
            visit(node.inner)
        else:
            raise TypeError(f"cannot compile membership for {type(node).__name__}")

    visit(body)
    A = np.array(rows, dtype=np.float64) if rows else np.zeros((0, n))
    b = np.array(offs, dtype=np.float64)
    C = np.array(centers, dtype=np.float64) if centers else np.zeros((0, n))
    r2 = np.array(radii_sq, dtype=np.float64)
    return A, b, lower, upper, C, r2, float(cap_sq)
