import math

import hypothesis.strategies as st
import numpy as np
import numpy.testing as npt
import pytest
from hypothesis import given, settings

from ncplay.errors import (
    AmbiguousProjection,
    DimensionMismatch,
    InvalidSet,
    NotMember,
    OutsideProxNeighborhood,
)
from ncplay.geometry import (
    Ball,
    Box,
    ComplementOfBall,
    Halfspace,
    Union,
    contains,
    distance,
    project,
    proximal_normal,
    set_from_config,
    verify_prox_regularity,
)

UNIT_BOX = Box([-1.0, -1.0], [1.0, 1.0])
HOLE = ComplementOfBall([0.0, 0.0], 1.0)
TWO_BALLS = Union((Ball([-2.0, 0.0], 1.0), Ball([2.0, 0.0], 1.0)), 2.0)
BOX_AND_BALL = Union((Box([-3.0, -1.0], [-1.0, 1.0]), Ball([2.0, 0.0], 1.0)), 2.0)

CATALOG = {
    "ball": Ball([0.5, -0.2], 1.3),
    "box": UNIT_BOX,
    "halfspace": Halfspace(np.array([3.0, 4.0]) / 5.0, 0.5),
    "complement": HOLE,
    "union": BOX_AND_BALL,
}

coord = st.floats(-4.0, 4.0, allow_nan=False)
points = st.tuples(coord, coord).map(np.array)


def test_contains_examples():
    assert contains(Ball([0, 0], 1), [0.5, 0])
    assert not contains(HOLE, [0.5, 0])
    assert contains(UNIT_BOX, [1, 1])


def test_distance_examples():
    assert distance(HOLE, [0.25, 0]) == pytest.approx(0.75, abs=1e-15)
    assert distance(Ball([0, 0], 1), [2, 0]) == 1.0
    assert distance(TWO_BALLS, [0, 0]) == 1.0


def test_project_examples():
    npt.assert_array_equal(project(HOLE, [0.5, 0]), [1.0, 0.0])
    npt.assert_array_equal(project(UNIT_BOX, [2, 3]), [1.0, 1.0])
    with pytest.raises(AmbiguousProjection):
        project(HOLE, [0, 0])
    with pytest.raises(AmbiguousProjection):
        project(TWO_BALLS, [0, 0.3])


def test_project_outside_prox_neighborhood():
    # union of two balls 6 apart with declared gap 2: midway but off-axis is far from both
    u = Union((Ball([-4.0, 0.0], 1.0), Ball([4.0, 0.0], 1.0)), 2.0)
    with pytest.raises(OutsideProxNeighborhood):
        project(u, [-1.5, 0.0])


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        contains(UNIT_BOX, [0.0])
    with pytest.raises(DimensionMismatch):
        project(HOLE, [1.0, 2.0, 3.0])


def test_prox_radius_per_variant():
    assert math.isinf(CATALOG["ball"].prox_radius)
    assert math.isinf(UNIT_BOX.prox_radius)
    assert math.isinf(CATALOG["halfspace"].prox_radius)
    assert HOLE.prox_radius == 1.0
    assert TWO_BALLS.prox_radius == 1.0


def test_invalid_sets():
    with pytest.raises(InvalidSet):
        Box([1.0], [0.0])
    with pytest.raises(InvalidSet):
        Halfspace([1.0, 1.0], 0.0)
    with pytest.raises(InvalidSet):
        Union((Ball([-2, 0], 1), Ball([1.5, 0], 1)), 2.0)
    with pytest.raises(InvalidSet):
        Union((HOLE, Ball([5, 0], 1)), 1.0)
    with pytest.raises(InvalidSet):
        set_from_config({"kind": "Torus"})


def test_union_gap_error_names_pair():
    with pytest.raises(InvalidSet, match="members 0 and 2"):
        Union((Ball([-5, 0], 1), Ball([5, 0], 1), Box([-4.5, 2.0], [-3.5, 3.0])), 2.0)


def test_proximal_normal_examples():
    (n,) = proximal_normal(HOLE, [1, 0], 0.5)
    npt.assert_allclose(n, [-1, 0])
    (n,) = proximal_normal(Ball([0, 0], 1), [1, 0], 0.5)
    npt.assert_allclose(n, [1, 0])
    normals = proximal_normal(UNIT_BOX, [1, 1], 0.5)
    npt.assert_array_equal(np.array(normals), [[1, 0], [0, 1]])


def test_proximal_normal_interior_and_errors():
    assert proximal_normal(UNIT_BOX, [0.2, 0.1], 0.5) == []
    assert proximal_normal(HOLE, [3.0, 0.0], 0.5) == []
    with pytest.raises(NotMember):
        proximal_normal(HOLE, [0.5, 0.0], 0.5)
    with pytest.raises(ValueError):
        proximal_normal(HOLE, [1.0, 0.0], 1.0)


@pytest.mark.parametrize("name", sorted(CATALOG))
def test_proximal_normals_reproject(name):
    s = CATALOG[name]
    rng = np.random.default_rng(11)
    probe = 0.5 if math.isinf(s.prox_radius) else 0.5 * s.prox_radius
    for _ in range(50):
        x = s._sample_boundary(rng)
        for n in proximal_normal(s, x, probe):
            npt.assert_allclose(project(s, x + probe * n), x, atol=1e-12)


def _brute_projection(s, p, boundary):
    d = np.linalg.norm(boundary - p, axis=1)
    return boundary[np.argmin(d)], d.min()


@pytest.mark.parametrize("name", ["complement", "union"])
def test_projection_against_dense_boundary(name):
    # oracle: nearest of 2e5 boundary samples (plus members' interiors are never nearer)
    s = CATALOG[name]
    rng = np.random.default_rng(5)
    boundary = np.array([s._sample_boundary(rng) for _ in range(200_000)])
    for _ in range(20):
        p = s._sample_boundary(rng) + rng.uniform(-0.4, 0.4, 2)
        if distance(s, p) == 0.0:
            continue
        q = project(s, p)
        q_ref, d_ref = _brute_projection(s, p, boundary)
        assert abs(np.linalg.norm(q - p) - d_ref) < 5e-3
        assert np.linalg.norm(q - q_ref) < 5e-2


@pytest.mark.parametrize("name", sorted(CATALOG))
@settings(max_examples=60, deadline=None)
@given(p=points)
def test_project_idempotent_and_realizes_distance(name, p):
    s = CATALOG[name]
    if distance(s, p) >= s.prox_radius or (name == "complement" and np.linalg.norm(p) < 1e-6):
        return
    if name == "union":
        d = sorted(float(m._dist(p)) for m in s.members)
        if d[1] - d[0] < 1e-9:
            return
    q = project(s, p)
    assert abs(np.linalg.norm(q - p) - distance(s, p)) <= 1e-12 * max(1.0, np.linalg.norm(p))
    npt.assert_allclose(project(s, q), q, atol=1e-12)
    assert contains(s, q)


@pytest.mark.parametrize("name", ["ball", "box", "halfspace"])
@settings(max_examples=60, deadline=None)
@given(p=points, q=points)
def test_convex_projection_nonexpansive(name, p, q):
    s = CATALOG[name]
    assert np.linalg.norm(project(s, p) - project(s, q)) <= np.linalg.norm(p - q) + 1e-12


@settings(max_examples=80, deadline=None)
@given(p=points)
def test_complement_prox_regularity_by_reprojection(p):
    d = distance(HOLE, p)
    if not 0 < d < HOLE.radius or np.linalg.norm(p) < 1e-6:
        return
    x = project(HOLE, p)
    direction = (p - x) / np.linalg.norm(p - x)
    # at the full radius the pushed point is the center: x is one of its nearest points
    far = x + HOLE.radius * direction
    assert abs(np.linalg.norm(far - x) - distance(HOLE, far)) <= 1e-12
    near = x + 0.999 * HOLE.radius * direction
    npt.assert_allclose(project(HOLE, near), x, atol=1e-12)


@settings(max_examples=80, deadline=None)
@given(p=points)
def test_union_unique_nearest_member(p):
    s = BOX_AND_BALL
    d = sorted(float(m._dist(p)) for m in s.members)
    if d[0] < s.gap / 2:
        assert d[1] - d[0] > 0


@pytest.mark.parametrize("name", sorted(CATALOG))
def test_verifier_passes_at_declared_radius(name):
    s = CATALOG[name]
    rep = verify_prox_regularity(s, s.prox_radius, 40, 60, seed=1)
    assert rep.passed, rep.rows


def test_verifier_fails_for_complement_at_twice_radius():
    rep = verify_prox_regularity(HOLE, 2.0, 40, 60, seed=1)
    assert not rep.passed
    assert rep.row("summary")["max_violation"] == pytest.approx(1.0, abs=1e-9)


def test_verifier_antipodal_algebra():
    # x=(1,0), n=(-1,0), z=(-1,0): <n, z-x> = 2 and |z-x|^2 / (2r) = 4 / (2r)
    x, n, z = np.array([1.0, 0]), np.array([-1.0, 0]), np.array([-1.0, 0])
    lhs = n @ (z - x)
    assert lhs - (z - x) @ (z - x) / 2.0 == 0.0
    assert lhs - (z - x) @ (z - x) / 4.0 == 1.0


def test_union_gap_half_is_sharp():
    # at r slightly above gap/2 the strip between two half-planes gives a violation
    strip = Union(
        (Halfspace([1.0, 0.0], -1.0), Halfspace([-1.0, 0.0], -1.0)),
        2.0,
    )
    assert verify_prox_regularity(strip, 1.0, 30, 60, seed=2).passed
    assert not verify_prox_regularity(strip, 1.5, 30, 60, seed=2).passed


def test_config_roundtrip():
    for s in CATALOG.values():
        again = set_from_config(s.to_config())
        assert again.kind == s.kind
        assert again.prox_radius == s.prox_radius
