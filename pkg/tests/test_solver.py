import math

import numpy as np
import pytest

from smoothpen import InputError, PenaltyConfig, SolveSettings, UnsupportedError, get_benchmark
from smoothpen.penalty import distance, l1
from smoothpen.solver import (grid_oracle, grid_oracle_merit, minimize_family, minimize_penalized,
                              probe_values, start_points)

FAST = SolveSettings(multistart=8)


def test_sphere_optimum(sphere2):
    rep = minimize_penalized(sphere2.problem, PenaltyConfig(1.0), SolveSettings(multistart=16))
    np.testing.assert_allclose(rep.x, [-1 / math.sqrt(2)] * 2, atol=1e-4)
    assert rep.eps <= 1e-4
    assert rep.best_value == pytest.approx(-math.sqrt(2), abs=1e-4)
    assert rep.converged


def test_not_exact_at_zero_lambda():
    inst = get_benchmark("piecewise", c=0.0)
    rep = minimize_penalized(inst.problem, PenaltyConfig(0.0), FAST)
    assert rep.best_value < inst.f_star


def test_feasible_start_above_threshold():
    inst = get_benchmark("piecewise", c=1.0)
    rep = minimize_penalized(inst.problem, PenaltyConfig(2.0), FAST, starts=[inst.x_star])
    assert rep.best_value >= inst.f_star - 1e-9


def test_stop_when_ends_early(sphere2):
    rep = minimize_penalized(sphere2.problem, PenaltyConfig(0.01), FAST,
                             stop_when=lambda z, v: v < sphere2.f_star - 1e-3)
    assert rep.status == "target"
    assert len(rep.runs) < FAST.multistart


def test_nonsmooth_families(sphere2):
    p = sphere2.problem
    for fam in (distance(), l1()):
        rep = minimize_family(p, fam, 2.0, FAST)
        assert rep.best_value == pytest.approx(-math.sqrt(2), abs=1e-5)
        assert rep.violation <= 1e-5
    with pytest.raises(InputError):
        minimize_family(p, l1(), -1.0, FAST)


def test_seed_determinism(sphere2):
    a = minimize_penalized(sphere2.problem, PenaltyConfig(0.5), SolveSettings(multistart=4, seed=9))
    b = minimize_penalized(sphere2.problem, PenaltyConfig(0.5), SolveSettings(multistart=4, seed=9))
    assert a.to_dict() == b.to_dict()


def test_trace_recording(sphere2):
    rep = minimize_penalized(sphere2.problem, PenaltyConfig(1.0),
                             SolveSettings(multistart=2, record_trace=True))
    rows = rep.trace_rows()
    assert rows and {"start", "iteration", "value"} <= set(rows[0])


def test_start_points_in_box(sphere2):
    pts = start_points(sphere2.problem, 32, 0)
    assert pts.shape == (32, 2)
    assert np.all(np.abs(pts) <= 1.5)
    np.testing.assert_array_equal(pts, start_points(sphere2.problem, 32, 0))


@pytest.mark.parametrize("kw", [{"multistart": 0}, {"shrink": 1.5}, {"armijo_c": 0.0},
                                {"max_iterations": 0}, {"eps_max": -1.0}])
def test_settings_validation(kw):
    with pytest.raises(InputError):
        SolveSettings(**kw)


def test_grid_oracle_close_to_solver(sphere2):
    p = sphere2.problem
    _, gv = grid_oracle(p, PenaltyConfig(1.0), resolution=201)
    rep = minimize_penalized(p, PenaltyConfig(1.0), FAST)
    assert abs(gv - rep.best_value) <= 1e-2


def test_grid_oracle_zero_slice():
    # with a huge lambda only the eps = 0 slice competes: min of f over feasible grid points
    p = get_benchmark("sphere", n=1).problem
    z, v = grid_oracle(p, PenaltyConfig(1e9), resolution=101)
    xs = np.linspace(-1.5, 1.5, 101)
    feas = xs[xs * xs <= 1.0]
    assert v == pytest.approx(feas.min())
    assert z[-1] == 0.0


def test_grid_oracle_piecewise_exact():
    p = get_benchmark("piecewise", c=3.0, half_width=5.0).problem
    z, v = grid_oracle(p, PenaltyConfig(5.0), resolution=201)
    np.testing.assert_allclose(z, [0.0, 0.0], atol=1e-12)
    assert v == 0.0


def test_grid_oracle_requirements():
    with pytest.raises(UnsupportedError):
        grid_oracle(get_benchmark("piecewise", c=0.0).problem, PenaltyConfig(1.0))
    with pytest.raises(UnsupportedError):
        grid_oracle(get_benchmark("sphere", n=4).problem, PenaltyConfig(1.0))


def test_grid_oracle_merit(sphere2):
    x, v = grid_oracle_merit(sphere2.problem, distance(), 2.0, resolution=201)
    assert v == pytest.approx(-math.sqrt(2), abs=2e-2)


def test_probe_values(sphere2):
    out = probe_values(sphere2.problem, distance(), 0.1, [[-1.0, -1.0]])
    assert out[0][1] == pytest.approx(-2.0 + 0.1)
