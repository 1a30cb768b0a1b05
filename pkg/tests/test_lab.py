import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import erf

from conftest import random_rotation
from slicekit.bodies import Ball, Cube, Ellipsoid, IntersectionBody, LpBall, RotatedBody, intersection_body_of, random_hpolytope
from slicekit.errors import CapabilityError, DataError, DomainError
from slicekit.lab import (
    EQ2,
    GridConfig,
    find_max_section,
    is_known_intersection_body,
    mc_oracle,
    section_mc_oracle,
    unit_ib_source,
    verify,
    verify_eq1,
    verify_eq2,
    verify_eq3,
    verify_stability,
    verify_thm1,
)
from slicekit.measures import BodyMeasure, Gaussian, Uniform, Zero, density_from_spec
from slicekit.scalars import dimension_constants


@pytest.fixture(scope="module")
def ib_l4():
    return intersection_body_of(LpBall(3, 4.0), level=32)


@pytest.mark.parametrize("n", [3, 4, 5])
def test_eq2_ball_is_equality(n):
    rep = verify_eq2(Ball(n))
    assert rep.ratio == pytest.approx(1.0, abs=1e-6)
    assert rep.passed and rep.equality and rep.details["equality"]


def test_eq2_ib_lp4_two_resolutions(ib_l4):
    cfg = GridConfig.for_dim(3)
    a = verify_eq2(ib_l4, cfg)
    b = verify_eq2(ib_l4, cfg.doubled())
    assert a.passed and b.passed
    assert a.ratio <= 1 + 1e-4 and b.ratio <= 1 + 1e-4
    assert a.ratio == pytest.approx(b.ratio, rel=1e-4)


def test_eq2_ellipsoid_rotation_invariant():
    m = np.diag([1.0, 0.5, 0.25])
    q = random_rotation(3, 11)
    a = verify_eq2(Ellipsoid(m))
    b = verify_eq2(Ellipsoid(q @ m @ q.T))
    assert a.passed and b.passed
    assert a.ratio == pytest.approx(b.ratio, abs=1e-6)
    # the worst section of an ellipsoid is orthogonal to its shortest axis
    assert abs(a.witness[0]) == pytest.approx(1.0, abs=1e-6)


def test_eq3_ball_uniform_reduces():
    for n in (3, 4):
        rep = verify_eq3(Ball(n), Uniform())
        assert rep.ratio == pytest.approx((n - 1) / n, abs=1e-6)


def test_eq3_ball_gaussian_against_mc():
    body, dens = Ball(3), Gaussian()
    rep = verify_eq3(body, dens)
    assert rep.passed
    est, err = mc_oracle(BodyMeasure(body, dens), samples=10**6, seed=1)
    assert abs(rep.lhs - est) <= 3 * err
    sec, serr = section_mc_oracle(BodyMeasure(body, dens), rep.witness, samples=10**6, seed=2)
    assert abs(rep.details["maxSection"] - sec) <= 3 * serr


def test_eq3_ib_ellipsoid_bump_drift():
    body = intersection_body_of(Ellipsoid(np.diag([1.0, 0.5, 0.25])), level=32)
    dens = density_from_spec("bump(2)")
    cfg = GridConfig.for_dim(3)
    a = verify_eq3(body, dens, cfg)
    b = verify_eq3(body, dens, cfg.doubled())
    assert a.passed and b.passed
    assert abs(a.slack - b.slack) <= 0.1 * abs(b.slack)


def test_thm1_ball_uniform_numbers():
    rep = verify_thm1(Ball(3), Uniform())
    c3 = dimension_constants(3).slicing_const
    assert rep.lhs == pytest.approx(4 * math.pi / 3, abs=1e-6)
    assert rep.rhs == pytest.approx(math.sqrt(3) * 1.5 * c3 * math.pi * (4 * math.pi / 3) ** (1 / 3), rel=1e-9)
    assert rep.rhs == pytest.approx(10.883, abs=1e-2)
    assert rep.passed
    d = rep.details
    assert d["lhsBelowMiddle"] and d["middleBelowRhs"]
    assert abs(d["compositeResidual"]) < 1e-9
    assert abs(d["compositeSectionResidual"]) < 1e-9


def test_thm1_zero_density():
    rep = verify_thm1(Ball(3), Zero())
    assert rep.lhs == 0.0 and rep.rhs == 0.0
    assert rep.passed and rep.ratio == 1.0


def test_thm1_cube_gaussian_two_resolutions():
    body, dens = Cube(4, 0.5), Gaussian()
    cfg = GridConfig.for_dim(4)
    a = verify_thm1(body, dens, cfg, check_pipeline=False)
    b = verify_thm1(body, dens, cfg.doubled(), check_pipeline=False)
    assert a.passed and b.passed and a.slack > 0 and b.slack > 0
    exact = (math.sqrt(math.pi) * erf(0.5)) ** 4
    est, err = mc_oracle(BodyMeasure(body, dens), samples=10**6, seed=3)
    assert abs(est - exact) <= 3 * err
    # kinks off the grid axes: the quadrature is only percent-level accurate here
    assert a.lhs == pytest.approx(exact, rel=2e-2)
    assert b.lhs == pytest.approx(exact, rel=2e-2)


def test_report_hierarchy_with_shared_section():
    body = LpBall(3, 3.0)
    n = 3
    cfg = GridConfig.for_dim(n)
    sec = find_max_section(body, Uniform(), cfg)
    r1 = verify_eq1(body, cfg, sec)
    r2 = verify_eq2(body, cfg, sec)
    r3 = verify_eq3(body, Uniform(), cfg, sec)
    r4 = verify_thm1(body, Uniform(), cfg, sec, check_pipeline=False)
    assert r1.lhs == pytest.approx(r2.lhs, rel=1e-14)
    assert r1.rhs == pytest.approx(math.sqrt(n) * n / (n - 1) * r2.rhs, rel=1e-12)
    assert r4.rhs == pytest.approx(math.sqrt(n) * r3.rhs, rel=1e-12)
    assert r4.rhs >= r3.rhs
    assert r4.lhs == pytest.approx(r3.lhs, rel=1e-14)


def test_thm1_rotation_invariant():
    q = random_rotation(3, 5)
    body = Ellipsoid.from_semi_axes([1.0, 0.7, 0.4])
    a = verify_thm1(body, Gaussian(), check_pipeline=False)
    b = verify_thm1(RotatedBody(body, q), Gaussian(), check_pipeline=False)
    assert a.ratio == pytest.approx(b.ratio, rel=1e-6)


def test_thm1_pipeline_on_polytope():
    rep = verify_thm1(random_hpolytope(3, seed=4), density_from_spec("sq-norm"))
    d = rep.details
    assert rep.passed and d["sandwich"]["pass"]
    assert d["lhsBelowMiddle"] and d["middleBelowRhs"]
    assert abs(d["compositeResidual"]) <= 1e-3 * rep.lhs


def test_capability_errors():
    with pytest.raises(CapabilityError):
        verify_eq2(Cube(5), GridConfig.for_dim(5))
    with pytest.raises(CapabilityError):
        verify_thm1(IntersectionBody(Cube(3), level=8), Uniform())
    with pytest.raises(CapabilityError):
        GridConfig.for_dim(7, "gauss")
    assert is_known_intersection_body(Cube(4)) and not is_known_intersection_body(Cube(5))
    assert not is_known_intersection_body(LpBall(3, 0.5))


def test_verify_dispatch():
    rep = verify(EQ2, Ball(3))
    assert rep.inequality_id == "eq2-ib-volume"
    d = rep.to_dict()
    assert d["pass"] is True and d["inequalityId"] == "eq2-ib-volume"


def test_stability_ball():
    rep = verify_stability(unit_ib_source(3), density_from_spec("1.1"))
    assert rep.epsilon == pytest.approx(0.1 * math.pi, abs=1e-6)
    assert rep.slack == pytest.approx(0.05 * 4 * math.pi / 3, abs=1e-6)
    assert rep.passed and rep.hypothesis_holds


def test_stability_flat_density_is_equality():
    rep = verify_stability(unit_ib_source(3), Uniform())
    assert abs(rep.epsilon) <= 1e-12
    assert abs(rep.slack) <= 1e-9
    assert not rep.hypothesis_holds
    assert not rep.to_dict()["hypothesisEpsilonPositive"]


def test_stability_precondition():
    with pytest.raises(DataError, match="f >= 1"):
        verify_stability(unit_ib_source(3), density_from_spec("0.5"))


def test_stability_ib_lp4_two_levels():
    dens = density_from_spec("1+0.2*bump(2)")
    cfg = GridConfig.for_dim(3)
    a = verify_stability(LpBall(3, 4.0), dens, cfg)
    b = verify_stability(LpBall(3, 4.0), dens, cfg.doubled())
    for rep in (a, b):
        assert all(v >= -1e-5 for v in rep.slacks.values()), rep.slacks
    for key in ("stability", "lowerBound", "holder"):
        assert abs(a.slacks[key] - b.slacks[key]) <= 0.1 * abs(b.slacks[key])


@pytest.mark.parametrize("spec", ["1", "1.3+0.2*bump(2)", "1+0.5*bump(1)", "2+0.1*sq-norm"])
def test_stability_chain_adds_up(spec):
    rep = verify_stability(LpBall(3, 3.0), density_from_spec(spec), GridConfig.for_dim(3, level=16, section_level=16))
    s = rep.slacks
    # the three steps telescope to the final estimate
    assert s["stability"] == pytest.approx(s["integrated"] + s["lowerBound"] + s["holder"], rel=1e-9, abs=1e-9)
    # the Hölder step on the sphere is an inequality between two numbers only
    assert rep.details["holderGap"] >= -1e-9


def test_mc_oracle_ball():
    est, err = mc_oracle(BodyMeasure(Ball(3), Uniform()), samples=10**7, seed=0)
    assert abs(est - 4 * math.pi / 3) <= 3 * err


def test_mc_oracle_cube():
    est, err = mc_oracle(BodyMeasure(Cube(5, 0.5), Uniform()), samples=10**5)
    assert est == 1.0 and err == 0.0


def test_mc_oracle_gaussian_ball():
    # int_{|x| <= 1} e^{-|x|^2} = pi^{3/2} erf(1) - 2 pi / e in R^3
    exact = math.pi**1.5 * erf(1.0) - 2 * math.pi / math.e
    est, err = mc_oracle(BodyMeasure(Ball(3), Gaussian()), samples=10**6, seed=4)
    assert abs(est - exact) <= 3 * err


def test_mc_oracle_is_deterministic_and_validated():
    m = BodyMeasure(Ball(4), Uniform())
    assert mc_oracle(m, samples=10**4, seed=9) == mc_oracle(m, samples=10**4, seed=9)
    with pytest.raises(DomainError):
        mc_oracle(m, samples=100)
    with pytest.raises(CapabilityError):
        section_mc_oracle(BodyMeasure(Ball(2), Uniform()), [1.0, 0.0])


@pytest.fixture(scope="module")
def ellipsoid_ratio():
    return verify_eq2(Ellipsoid(np.diag([1.0, 0.5, 0.25]))).ratio


@settings(max_examples=10)
@given(st.integers(0, 10**6))
def test_eq2_ratio_rotation_property(ellipsoid_ratio, seed):
    q = random_rotation(3, seed)
    m = np.diag([1.0, 0.5, 0.25])
    assert verify_eq2(Ellipsoid(q @ m @ q.T)).ratio == pytest.approx(ellipsoid_ratio, abs=1e-6)
