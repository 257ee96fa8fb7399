import math

import numpy as np
import pytest

from smoothpen import PenaltyConfig, SolveSettings, get_benchmark, smooth_penalty_eval
from smoothpen import lab
from smoothpen.lab import (ExactnessCheck, Relation, Target, as_target, demonstrate_nonexactness,
                           estimate_exact_parameter, is_exact_at, probe_points, verify_l1_bounds,
                           verify_transform_bounds)
from smoothpen.penalty import distance, l1, smooth
from smoothpen.problem import Problem
from smoothpen.transforms import power, rational_barrier, sqrt_double

FAST = SolveSettings(multistart=16)


def test_exactness_predicate_sphere(sphere2):
    assert is_exact_at(smooth(), 1.0, sphere2, FAST)
    chk = is_exact_at(smooth(), 0.05, sphere2, FAST)
    assert not chk and chk.status == "not_exact"
    assert chk.value < sphere2.f_star


@pytest.mark.parametrize("lam", [1.0, 10.0, 100.0])
def test_signsqrt_shifted_never_exact(lam):
    inst = get_benchmark("signsqrt")
    assert not is_exact_at(smooth(phi=power(0.5), w=1.0), lam, inst, FAST)


def test_signsqrt_unshifted_exact_above_quarter():
    inst = get_benchmark("signsqrt")
    assert is_exact_at(smooth(phi=power(0.5)), 1.0, inst, FAST)


def test_estimates_with_analytic_values():
    s4 = get_benchmark("sphere", n=4)
    rep = estimate_exact_parameter(distance(), s4, s=FAST)
    assert rep.status == "ok" and rep.estimate == pytest.approx(1.0, abs=5e-3)
    pw = get_benchmark("piecewise", c=3.0)
    rep = estimate_exact_parameter(smooth(phi=rational_barrier()), pw, s=FAST)
    assert rep.estimate == pytest.approx(0.25, abs=5e-3)
    assert rep.bracket[1] - rep.bracket[0] <= rep.tol


def test_exact_at_lower_end():
    s4 = get_benchmark("sphere", n=4)
    rep = estimate_exact_parameter(smooth(w=-0.5), s4, s=FAST)
    assert rep.estimate == 0.0
    assert is_exact_at(smooth(w=-0.5), 1e-4, s4, FAST)


def fake_predicate(monkeypatch, rule):
    def fake(family, param, target, s=None, **kw):
        ok = rule(param)
        return ExactnessCheck(param, "exact" if ok else "not_exact", 0.0, 0.0, 0.0)

    monkeypatch.setattr(lab, "is_exact_at", fake)


def test_bisection_widens_bracket(monkeypatch, sphere2):
    fake_predicate(monkeypatch, lambda x: x >= 5.3)
    rep = estimate_exact_parameter(smooth(), sphere2, (0.0, 1.0), 1e-3)
    assert rep.status == "ok"
    assert rep.estimate == pytest.approx(5.3, abs=1e-3)


def test_not_exact_beyond_cap(monkeypatch, sphere2):
    fake_predicate(monkeypatch, lambda x: False)
    rep = estimate_exact_parameter(smooth(), sphere2, (0.0, 1.0), 1e-3, cap=100.0)
    assert rep.status == "not_exact" and rep.estimate == math.inf


def test_inconsistent_predicate_flagged(monkeypatch, sphere2):
    # exact on [0.5, 0.6) and above 0.9 only
    fake_predicate(monkeypatch, lambda x: 0.5 <= x < 0.6 or x >= 0.9)
    rep = estimate_exact_parameter(smooth(), sphere2, (0.0, 1.0), 1e-3)
    assert rep.status == "predicate inconsistent"
    assert rep.inconsistency is not None


def test_indeterminate(monkeypatch, sphere2):
    def fake(family, param, target, s=None, **kw):
        return ExactnessCheck(param, "indeterminate", math.nan, 0.0, math.nan, None, "boom")

    monkeypatch.setattr(lab, "is_exact_at", fake)
    rep = estimate_exact_parameter(smooth(), sphere2, (0.0, 1.0), 1e-3)
    assert rep.status == "indeterminate"


def test_l1_equals_distance_with_one_constraint(sphere2):
    rows, reps = verify_l1_bounds(sphere2, FAST)
    sig, nu = reps[0].estimate, reps[1].estimate
    assert nu == pytest.approx(sig, abs=2e-3)
    assert all(r.passed is not False for r in rows)


def test_signsqrt_witness_curve():
    p = get_benchmark("signsqrt").problem
    cfg = PenaltyConfig(10.0, w=1.0, phi=power(0.5))
    assert smooth_penalty_eval(p, cfg, [1e-4], 1e-4) == pytest.approx(-0.01 + 0.001)
    ev = demonstrate_nonexactness("signsqrt_w", 10.0)
    assert ev.found and ev.best["value"] < -1e-4 and ev.best["eps"] <= 1e-2


def test_signsqrt_no_witness_when_exact():
    assert not demonstrate_nonexactness("signsqrt_w", 1.0, w=0.0).found


def test_power_phi_witness():
    ev = demonstrate_nonexactness("power_phi", 1e3)
    assert ev.found and ev.best["value"] < ev.f_star - 1e-8


def test_transform_bounds_sphere1():
    rows, reports = verify_transform_bounds(get_benchmark("sphere", n=1), FAST)
    assert len(rows) == 3 and len(reports) == 3
    assert all(r.passed for r in rows)


def test_sqrt_beta_transfer_needs_eps_below_one(sphere2):
    # lambda*(2 sqrt eps) ~ 0.11 on sphere(2): above lambda*/2 once eps may exceed 1
    assert not is_exact_at(smooth(beta=sqrt_double()), 0.1, sphere2, FAST)
    assert is_exact_at(smooth(beta=sqrt_double()), 0.1, sphere2,
                       SolveSettings(multistart=16, eps_max=1.0))


def test_relation_check():
    assert Relation.check("a", 1.0, 1.05, 0.1).passed
    assert not Relation.check("a", 1.0, 1.2, 0.1).passed
    assert Relation.check("a", 1.0, 0.5, 0.0, "<=").passed is False
    assert Relation.check("a", 1.0, 2.0, 0.0, "<=").passed
    assert Relation.check("a", 2.0, 1.0, 0.0, ">=").passed
    assert Relation.check("a", math.inf, 1.0, 0.1).passed is None


def test_probe_points_shape():
    pts = probe_points(np.zeros(3), scales=(1e-1, 1e-2))
    assert pts.shape == (2 * 8, 3)


def test_target_from_plain_problem():
    p = Problem(2, lambda x: float(x[0] + x[1]), inequalities=[lambda x: float(x @ x - 1.0)],
                lower=[-2, -2], upper=[2, 2])
    t = as_target(p, FAST)
    assert isinstance(t, Target)
    assert t.f_star == pytest.approx(-math.sqrt(2), abs=1e-6)
