import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gaussvol.bodies import (
    AxisBox,
    Ball,
    Halfspace,
    Intersection,
    Polytope,
    RestrictedBody,
    body_from_dict,
    body_to_dict,
    compile_constraints,
    contains,
    load_body,
    restrict_to_ball,
    verify_unit_ball_containment,
)


def test_contains_ball_center():
    assert contains(Ball([0.0, 0.0], 1.0), [0.0, 0.0])


def test_contains_box_coordinate_exceeds():
    assert not contains(AxisBox([-1.0, -1.0], [1.0, 1.0]), [2.0, 0.0])


def test_contains_halfspace_boundary_is_member():
    assert contains(Halfspace([1.0, 0.0], 1.0), [1.0, 0.0])


def test_contains_dimension_mismatch():
    with pytest.raises(ValueError):
        contains(Ball([0.0, 0.0], 1.0), [0.0, 0.0, 0.0])


def test_contains_batch_matches_scalar():
    rng = np.random.default_rng(0)
    bodies = [
        Halfspace([1.0, -2.0, 0.5], 0.7),
        Polytope(rng.normal(size=(4, 3)), rng.random(4) + 0.5),
        Ball([0.2, -0.1, 0.0], 1.5),
        AxisBox([-1.0, -2.0, -0.5], [1.0, 0.5, 2.0]),
    ]
    bodies.append(Intersection(bodies[:3]))
    bodies.append(RestrictedBody(bodies[0], 2.0))
    X = rng.normal(size=(200, 3))
    for body in bodies:
        batch = body.contains_batch(X)
        scalar = np.array([body.contains(x) for x in X])
        assert np.array_equal(batch, scalar)


def test_restrict_cap_dominates():
    r = restrict_to_ball(Ball([0.0, 0.0], 10.0), 2.0)
    assert not contains(r, [3.0, 0.0])


def test_restrict_satisfies_both():
    r = restrict_to_ball(Halfspace([1.0, 0.0], 1.0), 5.0)
    assert contains(r, [0.5, 0.0])


def test_restrict_norm_evaluation():
    r = restrict_to_ball(AxisBox([-1.0, -1.0], [1.0, 1.0]), 1.0)
    # (0.9, 0.9) is in the box but has norm ~1.27 > 1
    assert not contains(r, [0.9, 0.9])


def test_restrict_rejects_nonpositive_radius():
    with pytest.raises(ValueError):
        restrict_to_ball(Ball([0.0], 1.0), 0.0)


def test_restriction_monotone():
    rng = np.random.default_rng(1)
    body = Polytope(rng.normal(size=(5, 4)), rng.random(5) + 1.5)
    restricted = restrict_to_ball(body, 1.8)
    for x in rng.normal(size=(500, 4)):
        if restricted.contains(x):
            assert body.contains(x)
            assert np.linalg.norm(x) <= 1.8


@given(lam=st.floats(0.0, 1.0))
@settings(max_examples=40, deadline=None)
def test_convexity_spot_check(lam):
    rng = np.random.default_rng(7)
    bodies = [
        Halfspace([1.0, 1.0], 2.0),
        Ball([0.3, 0.0], 2.0),
        AxisBox([-1.0, -1.0], [1.0, 1.5]),
        Intersection([Ball([0.0, 0.0], 2.0), Halfspace([0.0, 1.0], 1.0)]),
    ]
    for body in bodies:
        members = [x for x in rng.normal(size=(300, 2)) if body.contains(x)]
        assert len(members) >= 2
        x, y = members[0], members[-1]
        assert body.contains(lam * x + (1.0 - lam) * y)


def test_verify_box_true():
    assert verify_unit_ball_containment(AxisBox([-1.0, -1.0], [1.0, 1.0])) is True


def test_verify_halfspace_margin():
    # b / ||a|| = 4/5 < 1
    assert verify_unit_ball_containment(Halfspace([3.0, 4.0], 4.0)) is False
    assert verify_unit_ball_containment(Halfspace([3.0, 4.0], 5.0)) is True


def test_verify_ball_criterion():
    # radius >= 1 + ||center||: 1.5 >= 1 + 0.5 holds with equality
    assert verify_unit_ball_containment(Ball([0.5, 0.0], 1.5)) is True
    assert verify_unit_ball_containment(Ball([0.5, 0.0], 1.4)) is False


def test_verify_polytope_and_intersection():
    good = Polytope([[1.0, 0.0], [0.0, 1.0]], [1.0, 2.0])
    bad = Polytope([[1.0, 0.0], [0.0, 2.0]], [1.0, 1.0])
    assert verify_unit_ball_containment(good) is True
    assert verify_unit_ball_containment(bad) is False
    assert verify_unit_ball_containment(Intersection([good, bad])) is False
    assert verify_unit_ball_containment(
        Intersection([good, AxisBox([-2.0, -2.0], [2.0, 2.0])])
    ) is True


def test_verify_unknown_for_foreign_body(disk_oracle):
    assert verify_unit_ball_containment(disk_oracle) is None
    # unknown member makes the intersection unknown unless another fails
    mix = Intersection([AxisBox([-2.0, -2.0], [2.0, 2.0]), disk_oracle])
    assert verify_unit_ball_containment(mix) is None


def test_verified_bodies_contain_unit_vectors():
    rng = np.random.default_rng(3)
    bodies = [
        AxisBox([-1.0, -1.0, -1.0], [1.0, 1.0, 1.0]),
        Ball([0.5, 0.0, 0.0], 1.5),
        Halfspace([3.0, 4.0, 0.0], 5.0),
        Polytope([[1.0, 0.0, 0.0], [-1.0, -1.0, -1.0]], [1.0, 2.0]),
    ]
    for body in bodies:
        assert verify_unit_ball_containment(body) is True
        for _ in range(200):
            v = rng.normal(size=3)
            v *= rng.random() / np.linalg.norm(v)
            assert body.contains(v)


def test_json_round_trip_all_variants():
    bodies = [
        Halfspace([1.0, 2.0], 0.5),
        Polytope([[1.0, 0.0], [0.0, 1.0]], [1.0, 1.0]),
        Ball([0.1, -0.2], 2.0),
        AxisBox([-1.0, -1.0], [1.0, 1.0]),
        Intersection([Ball([0.0, 0.0], 2.0), AxisBox([-1.0, -1.0], [1.0, 1.0])]),
    ]
    rng = np.random.default_rng(11)
    X = rng.normal(size=(100, 2))
    for body in bodies:
        doc = body_to_dict(body)
        clone = body_from_dict(json.loads(json.dumps(doc)))
        assert np.array_equal(body.contains_batch(X), clone.contains_batch(X))


def test_load_body_file(tmp_path):
    path = tmp_path / "b.json"
    path.write_text(json.dumps({"dim": 2, "type": "ball", "center": [0.0, 0.0], "radius": 1.5}))
    body = load_body(path)
    assert isinstance(body, Ball)
    assert body.radius == 1.5


@pytest.mark.parametrize(
    "doc",
    [
        {"type": "ball", "radius": 1.0},
        {"dim": 2, "type": "mystery"},
        {"dim": 3, "type": "ball", "center": [0.0, 0.0], "radius": 1.0},
        {"dim": 2, "type": "box", "lower": [-1.0, -1.0], "upper": [1.0]},
        {"dim": 0, "type": "ball", "center": [], "radius": 1.0},
    ],
)
def test_body_from_dict_rejects_bad_docs(doc):
    with pytest.raises(ValueError):
        body_from_dict(doc)


def test_invalid_constructions():
    with pytest.raises(ValueError):
        Halfspace([0.0, 0.0], 1.0)
    with pytest.raises(ValueError):
        AxisBox([1.0, 0.0], [0.0, 1.0])
    with pytest.raises(ValueError):
        Ball([0.0], -1.0)
    with pytest.raises(ValueError):
        Intersection([])
    with pytest.raises(ValueError):
        Intersection([Ball([0.0], 1.0), Ball([0.0, 0.0], 1.0)])


def test_compile_constraints_matches_membership():
    rng = np.random.default_rng(5)
    body = RestrictedBody(
        Intersection(
            [
                AxisBox([-1.5, -1.0, -2.0], [1.0, 1.5, 2.0]),
                Halfspace([1.0, 1.0, 0.0], 1.2),
                Ball([0.3, 0.0, 0.0], 1.9),
                Polytope(rng.normal(size=(3, 3)), rng.random(3) + 1.0),
            ]
        ),
        1.7,
    )
    A, b, lower, upper, centers, radii_sq, cap_sq = compile_constraints(body)
    X = rng.normal(size=(2000, 3))
    flat = (
        np.all(X >= lower, axis=1)
        & np.all(X <= upper, axis=1)
        & (np.einsum("ij,ij->i", X, X) <= cap_sq)
        & np.all(X @ A.T <= b, axis=1)
    )
    for c, r2 in zip(centers, radii_sq):
        d = X - c
        flat &= np.einsum("ij,ij->i", d, d) <= r2
    assert np.array_equal(flat, body.contains_batch(X))


def test_compile_constraints_rejects_foreign_body(disk_oracle):
    with pytest.raises(TypeError):
        compile_constraints(disk_oracle)


def test_bodies_are_immutable():
    box = AxisBox([-1.0, -1.0], [1.0, 1.0])
    with pytest.raises(ValueError):
        box.lower[0] = 5.0
