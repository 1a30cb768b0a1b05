import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import random_rotation
from slicekit.bodies import (
    Ball,
    CrossPolytope,
    Cube,
    Ellipsoid,
    HPolytope,
    IntersectionBody,
    LpBall,
    RotatedBody,
    ScaledBody,
    TabulatedBody,
    body_from_spec,
    body_volume,
    check_star_body,
    intersection_body_of,
    minkowski_functional,
    random_hpolytope,
)
from slicekit.errors import DataError, DomainError
from slicekit.lab import mc_oracle
from slicekit.measures import BodyMeasure, Uniform
from slicekit.scalars import dimension_constants
from slicekit.sphere import sphere_grid

BODIES = [
    Ball(3, 1.5),
    LpBall(3, 4.0),
    LpBall(4, 1.5),
    CrossPolytope(3),
    Cube(3, 0.5),
    Ellipsoid.from_semi_axes([1.0, 0.5, 2.0]),
    random_hpolytope(3, seed=2),
]


def directions(n):
    return st.lists(st.floats(-1, 1), min_size=n, max_size=n).filter(lambda v: np.linalg.norm(v) > 1e-3)


@pytest.mark.parametrize("body", BODIES, ids=lambda b: b.tag)
def test_radial_and_gauge_are_reciprocal(body, rng):
    th = rng.standard_normal((50, body.dim))
    th /= np.linalg.norm(th, axis=1, keepdims=True)
    rho = body.radial(th)
    assert np.allclose(body.gauge(rho[:, None] * th), 1.0, atol=1e-12)
    assert np.array_equal(body.radial(th), body.radial(-th))


@pytest.mark.parametrize("body", BODIES, ids=lambda b: b.tag)
@given(v=directions(3), t=st.floats(0.01, 100))
def test_gauge_is_homogeneous(body, v, t):
    if body.dim != 3:
        return
    v = np.asarray(v)
    assert minkowski_functional(body, t * v) == pytest.approx(t * body.gauge(v), rel=1e-12)


def test_radial_values():
    assert Cube(2, 1.0).radial([1 / math.sqrt(2), 1 / math.sqrt(2)]) == pytest.approx(math.sqrt(2))
    assert CrossPolytope(3).radial(np.ones(3) / math.sqrt(3)) == pytest.approx(1 / math.sqrt(3))
    assert LpBall(3, 4).radial(np.ones(3) / math.sqrt(3)) == pytest.approx(math.sqrt(3) * 3**-0.25)
    e = Ellipsoid(np.diag([1.0, 4.0]))
    assert e.radial([0.0, 1.0]) == pytest.approx(0.5)


@pytest.mark.parametrize(
    "body,level",
    [(Ball(3, 2.0), 16), (LpBall(3, 1.0), 32), (LpBall(3, 3.0), 32), (Ellipsoid.from_semi_axes([1.0, 0.5, 2.0]), 64), (Cube(2, 0.5), 64), (LpBall(4, 4.0), 24)],
    ids=lambda x: getattr(x, "tag", str(x)),
)
def test_quadrature_volume_matches_closed_form(body, level):
    vol = body_volume(body, sphere_grid(body.dim, level))
    assert vol == pytest.approx(math.exp(body.exact_log_volume()), rel=1e-6)


def test_lp_volume_formula_against_monte_carlo():
    body = LpBall(3, 1.5)
    est, err = mc_oracle(BodyMeasure(body, Uniform()), 10**6, seed=3)
    assert abs(est - math.exp(body.exact_log_volume())) < 4 * err


def test_hpolytope_volume_against_monte_carlo():
    body = random_hpolytope(3, seed=4)
    est, err = mc_oracle(BodyMeasure(body, Uniform()), 10**6, seed=5)
    quad = body_volume(body, sphere_grid(3, 128))
    assert abs(est - quad) < 4 * err


def test_hpolytope_validation():
    a = np.vstack([np.eye(2), -np.eye(2)])
    with pytest.raises(DataError, match="mirror"):
        HPolytope(a[:3], np.ones(3))
    with pytest.raises(DataError, match="positive"):
        HPolytope(a, [1.0, 1.0, 0.0, 1.0])
    with pytest.raises(DataError, match="unbounded"):
        HPolytope([[1.0, 0.0], [-1.0, 0.0]], [1.0, 1.0])
    box = HPolytope(a, [1.0, 2.0, 1.0, 2.0])
    assert np.allclose(box.bounding_box(), [1.0, 2.0])


def test_ellipsoid_validation():
    with pytest.raises(DataError, match="symmetric"):
        Ellipsoid([[1.0, 0.5], [0.0, 1.0]])
    with pytest.raises(DataError, match="positive definite"):
        Ellipsoid([[1.0, 0.0], [0.0, -1.0]])


def test_scaled_and_rotated():
    q = random_rotation(3, seed=7)
    e = Ellipsoid.from_semi_axes([1.0, 0.5, 2.0])
    r = RotatedBody(e, q)
    th = np.array([[0.6, 0.0, 0.8]])
    assert r.radial(th)[0] == pytest.approx(e.radial(th @ q)[0])
    assert r.exact_log_volume() == pytest.approx(e.exact_log_volume())
    s = ScaledBody(e, 3.0)
    assert s.radial(th)[0] == pytest.approx(3.0 * e.radial(th)[0])
    assert s.exact_log_volume() == pytest.approx(e.exact_log_volume() + 3 * math.log(3.0))
    with pytest.raises(DomainError):
        ScaledBody(e, 0.0)


def test_contains_and_box():
    c = Cube(3, 0.5)
    assert c.contains([0.49, -0.49, 0.0])
    assert not c.contains([0.51, 0.0, 0.0])
    assert np.allclose(c.bounding_box(), 0.5)


def test_intersection_body_of_ball_is_ball():
    # |B_r^{n} ∩ xi^⊥| = |B_2^{n-1}| r^{n-1}
    r = 1.3
    ib = intersection_body_of(Ball(3, r), level=16)
    th = sphere_grid(3, 6).nodes
    expected = dimension_constants(3).ball_vol_prev * r**2
    assert np.allclose(ib.radial(th), expected, rtol=1e-13)


def test_intersection_body_memo_is_even():
    ib = IntersectionBody(LpBall(3, 4), level=16)
    xi = np.array([[0.36, 0.48, 0.8]])
    a = ib.radial(xi)
    b = ib.radial(-xi)
    assert np.array_equal(a, b)
    assert len(ib._memo) == 1


def test_tabulated_bodies_interpolate():
    for n, tol in [(2, 1e-3), (3, 1e-2)]:
        body = Ellipsoid(np.diag([1.0, 2.0, 3.0][:n]))
        tab = TabulatedBody.from_body(body, 64)
        th = sphere_grid(n, 8).nodes
        assert np.max(np.abs(tab.radial(th) / body.radial(th) - 1)) < tol
    tab4 = TabulatedBody.from_body(Ball(4), 2000)
    assert np.allclose(tab4.radial(sphere_grid(4, 6).nodes), 1.0)


def test_check_star_body():
    # max/min radial ratio on the grid; the cube's true value is sqrt(3)
    ratio = check_star_body(Cube(3), sphere_grid(3, 8))
    assert 1.0 < ratio <= math.sqrt(3)
    assert check_star_body(Ball(3, 2.0), sphere_grid(3, 8)) == pytest.approx(1.0)
    with pytest.raises(DataError, match="not even"):
        lopsided = Ball(3)
        lopsided._radial = lambda th: 1.0 + 0.5 * th[:, 0]
        check_star_body(lopsided, sphere_grid(3, 8))


def test_body_volume_dimension_mismatch():
    with pytest.raises(DomainError):
        body_volume(Ball(3), sphere_grid(4, 8))


def test_spec_roundtrip():
    for body in BODIES + [ScaledBody(Cube(2), 2.0), RotatedBody(Ball(2), random_rotation(2))]:
        back = body_from_spec(body.describe())
        th = sphere_grid(body.dim, 8).nodes
        assert np.allclose(back.radial(th), body.radial(th), rtol=1e-12)
    ib = body_from_spec({"type": "intersection-body", "level": 8, "source": {"type": "ball", "dim": 3}})
    assert isinstance(ib, IntersectionBody)


@pytest.mark.parametrize(
    "spec,field",
    [
        ('{"type":"lp-ball","dim":3}', "'p'"),
        ('{"type":"ball"}', "'dim'"),
        ('{"type":"ellipsoid","dim":2,"matrix":[1,0,0]}', "'matrix'"),
        ('{"type":"h-polytope","dim":2,"facets":[[1,0]]}', "'facets'"),
        ('{"type":"sphere","dim":2}', "'type'"),
        ('{"type":"ball","dim":"x"}', "'dim'"),
    ],
)
def test_spec_errors_name_the_field(spec, field):
    with pytest.raises(DataError, match=field):
        body_from_spec(spec)


def test_malformed_json_reports_position():
    with pytest.raises(DataError, match="line 1, column"):
        body_from_spec('{"type": "ball", ')


def test_describe_is_stable():
    d = Cube(3, 0.5).describe()
    assert d == json.dumps(json.loads(d), sort_keys=True, separators=(",", ":"))
