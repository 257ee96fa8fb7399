import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from smoothpen import (ConfigError, DomainError, InputError, custom, identity, linear,
                       parse_transform, power, rational_barrier, sqrt_double)

ALL = [identity(), linear(2.0), rational_barrier(), power(1.5), power(0.5), sqrt_double()]


@pytest.mark.parametrize("tr", ALL, ids=str)
def test_zero_at_zero(tr):
    assert tr.value(0.0) == 0.0


@pytest.mark.parametrize("tr", ALL, ids=str)
@given(a=st.floats(0, 0.99), b=st.floats(0, 0.99))
def test_nondecreasing(tr, a, b):
    lo, hi = min(a, b), max(a, b)
    assert tr.value(lo) <= tr.value(hi)


def test_rational_barrier_pole():
    tr = rational_barrier()
    assert tr.value(0.25) == pytest.approx(1.0 / 3.0)
    assert tr.value(1.0) == math.inf
    assert tr.domain_sup == 1.0
    with pytest.raises(DomainError):
        tr.derivative(1.0)


def test_right_derivatives():
    assert identity().right_derivative_at_0 == 1.0
    assert linear(3.0).right_derivative_at_0 == 3.0
    assert rational_barrier().right_derivative_at_0 == 1.0
    assert power(1.5).right_derivative_at_0 == 0.0
    assert power(0.5).right_derivative_at_0 == math.inf
    assert sqrt_double().right_derivative_at_0 == math.inf
    assert custom(lambda t: t).right_derivative_at_0 is None


@pytest.mark.parametrize("tr", ALL, ids=str)
@given(t=st.floats(0.01, 0.9))
def test_derivative_matches_difference_quotient(tr, t):
    h = 1e-6
    fd = (tr.value(t + h) - tr.value(t - h)) / (2 * h)
    assert tr.derivative(t) == pytest.approx(fd, rel=1e-5, abs=1e-7)


def test_sqrt_double_not_differentiable_at_zero():
    with pytest.raises(DomainError):
        sqrt_double().derivative(0.0)


def test_parse_round_trip():
    for tr in ALL:
        assert parse_transform(str(tr)) == tr
    assert parse_transform("power:1.5") == power(1.5)
    assert parse_transform("linear(2)") == linear(2.0)


@pytest.mark.parametrize("text", ["nope", "linear:abc", "power(-1)"])
def test_parse_errors(text):
    with pytest.raises((ConfigError, InputError)):
        parse_transform(text)


def test_convexity_flags():
    assert rational_barrier().is_convex()
    assert not sqrt_double().is_convex()
    assert power(2.0).is_convex() and not power(0.5).is_convex()
