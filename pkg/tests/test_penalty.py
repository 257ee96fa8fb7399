import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from smoothpen import (InputError, PenaltyConfig, Problem, UnsupportedError, distance_penalty,
                       get_benchmark, l1_penalty, minimize_eps, rational_barrier, reduced_form,
                       reduced_penalty, smooth_penalty_eval, smooth_penalty_grad, sqrt_double)
from smoothpen.penalty import Family, epsilon_argmin
from smoothpen.problem import feasibility_residual


@pytest.fixture
def pw():
    return get_benchmark("piecewise", c=0.0).problem


def test_eps_zero_branch(sphere2):
    p = sphere2.problem
    cfg = PenaltyConfig(1.0)
    assert smooth_penalty_eval(p, cfg, [0.1, 0.2], 0.0) == pytest.approx(0.3)
    assert smooth_penalty_eval(p, cfg, [1.0, 1.0], 0.0) == math.inf


def test_sphere_value(sphere2):
    assert smooth_penalty_eval(sphere2.problem, PenaltyConfig(1.0), [1.0, 1.0], 1.0) == 4.0


def test_half_factor_and_alpha(sphere2):
    p = sphere2.problem
    # 2 + lam^alpha * Delta / (k eps) + lam eps with Delta = 1
    assert smooth_penalty_eval(p, PenaltyConfig(4.0, alpha=1.0, half_factor=True),
                               [1.0, 1.0], 1.0) == pytest.approx(2 + 2 + 4)


def test_rational_barrier_value(pw):
    cfg = PenaltyConfig(0.0, phi=rational_barrier())
    assert smooth_penalty_eval(pw, cfg, [0.5], 1.0) == pytest.approx(-1.0 / 6.0)
    assert smooth_penalty_eval(pw, cfg, [1.5], 1.0) == math.inf


def test_negative_eps_rejected(sphere2):
    with pytest.raises(InputError):
        smooth_penalty_eval(sphere2.problem, PenaltyConfig(1.0), [0.0, 0.0], -1.0)


def test_gradient_feasible_interior(sphere2):
    cfg = PenaltyConfig(3.0, beta=sqrt_double())
    g = smooth_penalty_grad(sphere2.problem, cfg, [0.1, -0.2], 0.25)
    np.testing.assert_allclose(g, [1.0, 1.0, 3.0 / math.sqrt(0.25)])


def test_gradient_stationary_in_eps(sphere2):
    g = smooth_penalty_grad(sphere2.problem, PenaltyConfig(1.0), [1.0, 1.0], 1.0)
    np.testing.assert_allclose(g, [5.0, 5.0, 0.0], atol=1e-15)


def test_gradient_needs_positive_eps(sphere2):
    with pytest.raises(InputError):
        smooth_penalty_grad(sphere2.problem, PenaltyConfig(1.0), [1.0, 1.0], 0.0)


@pytest.mark.parametrize("lam, alpha, d, expected", [
    (4.0, 0.0, 0.0, 0.0), (4.0, 0.0, 2.0, 1.0), (4.0, 1.0, 2.0, 2.0)])
def test_epsilon_argmin(lam, alpha, d, expected):
    assert epsilon_argmin(PenaltyConfig(lam, alpha=alpha), d) == pytest.approx(expected)


def test_epsilon_argmin_matches_grid():
    cfg = PenaltyConfig(4.0, alpha=1.0)
    eps = np.linspace(1e-3, 5, 200001)
    vals = 4.0 * 4.0 / eps + 4.0 * eps
    assert epsilon_argmin(cfg, 2.0) == pytest.approx(eps[np.argmin(vals)], abs=1e-4)


def test_epsilon_argmin_unsupported():
    with pytest.raises(UnsupportedError):
        epsilon_argmin(PenaltyConfig(1.0, phi=rational_barrier()), 1.0)
    with pytest.raises(UnsupportedError):
        epsilon_argmin(PenaltyConfig(1.0, w=0.5), 1.0)


def test_reduced_sphere(sphere2):
    p = sphere2.problem
    for method in ("auto", "numeric", "closed_form"):
        assert reduced_penalty(p, PenaltyConfig(1.0), [1.0, 1.0], 10.0, method) == \
            pytest.approx(4.0, abs=1e-10)


def test_reduced_sqrt_double(sphere2):
    p = sphere2.problem
    cfg = PenaltyConfig(1.0, beta=sqrt_double())
    assert reduced_penalty(p, cfg, [1.0, 1.0], 10.0, "numeric") == pytest.approx(5.0, abs=1e-9)
    assert reduced_form(cfg).theta_equivalent == pytest.approx(3.0)


def test_reduced_negative_shift(sphere2):
    p = sphere2.problem
    rng = np.random.default_rng(5)
    for _ in range(20):
        x = rng.uniform(-1.5, 1.5, 2)
        if x @ x <= 1.0:
            continue
        expected = x.sum() + 2.0 * (math.sqrt(2.0) + 1.0) * (x @ x - 1.0)
        got = reduced_penalty(p, PenaltyConfig(1.0, w=-1.0), x, 1e3, "numeric")
        assert got == pytest.approx(expected, rel=1e-10, abs=1e-10)


def test_reduced_feasible_point_keeps_f(sphere2):
    eps, val = minimize_eps(sphere2.problem, PenaltyConfig(2.0), [0.1, 0.1], 10.0)
    assert (eps, val) == (0.0, pytest.approx(0.2))


def test_reduced_rejects_bad_bracket(sphere2):
    with pytest.raises(InputError):
        reduced_penalty(sphere2.problem, PenaltyConfig(1.0), [1.0, 1.0], 0.0)
    with pytest.raises(UnsupportedError):
        reduced_penalty(sphere2.problem, PenaltyConfig(1.0, phi=rational_barrier()),
                        [1.0, 1.0], 10.0, "closed_form")


@settings(max_examples=60, deadline=None)
@given(x0=st.floats(-1.5, 1.5), x1=st.floats(-1.5, 1.5), lam=st.floats(0.01, 50.0))
def test_reduction_closed_form_vs_numeric(x0, x1, lam):
    p = get_benchmark("sphere", n=2).problem
    cfg = PenaltyConfig(lam)
    a = reduced_penalty(p, cfg, [x0, x1], 1e4, "auto")
    b = reduced_penalty(p, cfg, [x0, x1], 1e4, "numeric")
    d = feasibility_residual(p, [x0, x1])
    assert abs(a - b) <= 1e-9 * (1 + abs(x0 + x1) + d)


def test_distance_penalty(sphere2, pw):
    p = sphere2.problem
    assert distance_penalty(p, 0.0, [1.0, 1.0]) == 2.0
    assert distance_penalty(p, 3.0, [1.0, 1.0]) == pytest.approx(5.0)
    val = distance_penalty(pw, 1.0, [0.6], phi=rational_barrier())
    assert val == pytest.approx(0.15)
    assert distance_penalty(p, 1.0, [1.0, 1.0], exponent=2.0 / 3.0) == pytest.approx(3.0)


def test_l1_penalty():
    p = Problem(2, lambda x: 0.0, equalities=[lambda x: x[0]], inequalities=[lambda x: x[1]])
    assert l1_penalty(p, 0.0, [3.0, 4.0]) == 0.0
    assert l1_penalty(p, 1.0, [3.0, 4.0]) == 7.0
    with pytest.raises(InputError):
        l1_penalty(p, -1.0, [0.0, 0.0])


@given(h=st.floats(-10, 10), g=st.floats(-10, 10), nu=st.floats(0, 10))
def test_l1_dominates_distance(h, g, nu):
    p = Problem(2, lambda x: 0.0, equalities=[lambda x: x[0]], inequalities=[lambda x: x[1]])
    assert l1_penalty(p, nu, [h, g]) >= distance_penalty(p, nu, [h, g]) - 1e-12


def test_family_symbols():
    assert Family("smooth").symbol == "lambda"
    assert Family("distance").symbol == "sigma"
    assert Family("distance", exponent=2 / 3).symbol == "theta"
    assert Family("l1").symbol == "nu"
    with pytest.raises(InputError):
        Family("nope")
