import math

import mpmath
import pytest
from hypothesis import given, strategies as st

from slicekit.errors import DomainError
from slicekit.scalars import (
    dimension_constants,
    format_constant,
    log_slicing_constant,
    log_sphere_area,
    log_unit_ball_volume,
    slicing_constant,
    sphere_area,
)

mpmath.mp.dps = 40


def mp_ball(n):
    return mpmath.pi ** (mpmath.mpf(n) / 2) / mpmath.gamma(1 + mpmath.mpf(n) / 2)


def mp_cn(n):
    return mp_ball(n) ** (mpmath.mpf(n - 1) / n) / mp_ball(n - 1)


def test_low_dimensional_balls():
    assert math.exp(log_unit_ball_volume(1)) == pytest.approx(2.0, rel=1e-15)
    assert math.exp(log_unit_ball_volume(2)) == pytest.approx(math.pi, rel=1e-15)
    assert math.exp(log_unit_ball_volume(3)) == pytest.approx(4 * math.pi / 3, rel=1e-15)
    assert sphere_area(1) == pytest.approx(2.0)
    assert sphere_area(2) == pytest.approx(2 * math.pi)
    assert sphere_area(3) == pytest.approx(4 * math.pi)


@pytest.mark.parametrize("n", [2, 3, 4, 7, 20, 101, 500, 3000])
def test_slicing_constant_matches_mpmath(n):
    assert log_slicing_constant(n) == pytest.approx(float(mpmath.log(mp_cn(n))), abs=1e-12)
    assert slicing_constant(n) == pytest.approx(float(mp_cn(n)), rel=1e-12)


def test_known_values():
    assert slicing_constant(2) == pytest.approx(math.sqrt(math.pi) / 2, rel=1e-14)
    # c_3 = (4 pi / 3)^(2/3) / pi
    assert slicing_constant(3) == pytest.approx((4 * math.pi / 3) ** (2 / 3) / math.pi, abs=1e-14)
    assert slicing_constant(3) == pytest.approx(0.8271339878658664, abs=1e-12)


def test_large_dimensions_stay_finite():
    # |B_2^n| underflows to 0.0 around n = 450; the log form does not
    assert math.isfinite(log_unit_ball_volume(10**6))
    assert math.exp(log_unit_ball_volume(1000)) == 0.0
    assert 0 < slicing_constant(10**6) < 1


def test_constant_is_below_one_and_decreasing():
    prev = slicing_constant(2)
    for n in range(3, 10001):
        cur = log_slicing_constant(n)
        assert cur < 0
        assert cur <= math.log(prev) + 1e-15
        prev = math.exp(cur)


def test_limit_is_exp_minus_half():
    # Stirling: c_n -> e^{-1/2}
    assert slicing_constant(10**7) == pytest.approx(math.exp(-0.5), rel=1e-6)


@given(st.integers(min_value=2, max_value=200))
def test_area_volume_relations(n):
    assert math.exp(log_sphere_area(n)) == pytest.approx(n * math.exp(log_unit_ball_volume(n)), rel=1e-12)
    c = dimension_constants(n)
    assert c.subsphere_area == pytest.approx((n - 1) * c.ball_vol_prev, rel=1e-12)
    # c_n |B_{n-1}| = |B_n|^{(n-1)/n}
    assert c.slicing_const * c.ball_vol_prev == pytest.approx(c.ball_vol ** ((n - 1) / n), rel=1e-12)


@pytest.mark.parametrize("bad", [0, -3, 2.5, True])
def test_domain_errors(bad):
    with pytest.raises(DomainError):
        log_unit_ball_volume(bad)


def test_slicing_constant_needs_n_at_least_two():
    with pytest.raises(DomainError):
        slicing_constant(1)


def test_format_constant():
    assert format_constant(slicing_constant(3)) == "0.827133987866"
