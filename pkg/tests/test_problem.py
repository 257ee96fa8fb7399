import math

import numpy as np
import pytest

from smoothpen import ConfigError, InputError, Problem, get_benchmark
from smoothpen.problem import ViolationKind, feasibility_residual, shifted_violation_sq


def toy():
    return Problem(2, lambda x: 0.0, equalities=[lambda x: x[0] - 3.0],
                   inequalities=[lambda x: x[1]])


def test_feasible_point_has_zero_residual(sphere2):
    p = sphere2.problem
    for kind in ViolationKind:
        assert feasibility_residual(p, [0.0, 0.0], kind) == 0.0


def test_residual_kinds():
    p = toy()
    assert feasibility_residual(p, [6.0, 4.0]) == pytest.approx(5.0)
    assert feasibility_residual(p, [6.0, 4.0], ViolationKind.L1) == pytest.approx(7.0)


def test_sphere_residual_outside(sphere2):
    assert feasibility_residual(sphere2.problem, [1.0, 1.0]) == pytest.approx(1.0)


def test_sphere_residual_matches_projection():
    # distance from g(x) to (-inf, 0] is max(0, g)
    p = get_benchmark("sphere", n=2).problem
    rng = np.random.default_rng(0)
    for x in rng.uniform(-1.5, 1.5, (50, 2)):
        assert feasibility_residual(p, x) == pytest.approx(max(0.0, x @ x - 1.0))


def test_shifted_violation_zero_shift_is_squared_residual(sphere2):
    p = sphere2.problem
    x = np.array([1.2, -0.4])
    for eps in (1e-3, 0.5, 3.0):
        assert shifted_violation_sq(p, x, eps, [0.0]) == pytest.approx(
            feasibility_residual(p, x) ** 2)


def test_shifted_violation_examples(sphere2):
    assert shifted_violation_sq(sphere2.problem, [1.0, 1.0], 0.5, [-1.0]) == pytest.approx(2.25)
    p = Problem(1, lambda x: 0.0, equalities=[lambda x: x[0]])
    assert shifted_violation_sq(p, [2.0], 1.0, [2.0]) == 0.0


def test_shifted_violation_needs_positive_eps(sphere2):
    with pytest.raises(InputError):
        shifted_violation_sq(sphere2.problem, [0.0, 0.0], 0.0)


def test_problem_validation():
    with pytest.raises(ConfigError):
        Problem(0, lambda x: 0.0, inequalities=[lambda x: x[0]])
    with pytest.raises(ConfigError):
        Problem(1, lambda x: 0.0)
    with pytest.raises(ConfigError):
        Problem(1, lambda x: 0.0, inequalities=[lambda x: x[0]], lower=[1.0], upper=[0.0])
    Problem(1, lambda x: x[0] ** 2, unconstrained=True)


def test_wrong_point_length(sphere2):
    from smoothpen import PenaltyConfig, smooth_penalty_eval

    with pytest.raises(InputError):
        feasibility_residual(sphere2.problem, [1.0, 2.0, 3.0])
    with pytest.raises(InputError):
        smooth_penalty_eval(sphere2.problem, PenaltyConfig(1.0), [1.0], 0.5)


def test_nan_objective_is_reported():
    from smoothpen import EvaluationError

    p = Problem(1, lambda x: math.nan, inequalities=[lambda x: x[0]])
    with pytest.raises(EvaluationError):
        p.f([0.0])


def test_fd_gradients_used_when_missing():
    p = Problem(2, lambda x: x[0] ** 2 + 3 * x[1], inequalities=[lambda x: x[0] * x[1]])
    np.testing.assert_allclose(p.grad_f([1.0, 2.0]), [2.0, 3.0], rtol=1e-6)
    np.testing.assert_allclose(p.jacobian([1.0, 2.0]), [[2.0, 1.0]], rtol=1e-6)
