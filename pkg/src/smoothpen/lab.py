"""Empirical exact penalty parameters and the relations between them.

The exactness predicate compares the best value found by a multistart solve
with the constrained optimum ``f*``.  A penalty member is declared *not
exact* when the solver certifies a point with

* value below ``f* - tol_exact``, or
* value below ``f* - tol_cert`` at a point that is clearly off the
  constrained set (``eps > tol_eps`` for the smooth family, violation
  ``> tol_eps`` for the nonsmooth ones).

Otherwise the global minimum is taken to be ``f*`` at ``eps = 0`` (the known
minimizer is always among the candidates).  Parameters are then estimated by
bisection on this predicate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .benchmarks import NOT_EXACT, BenchmarkInstance, get_benchmark
from .errors import InputError, SolverError, UnsupportedError
from .penalty import Family, PenaltyConfig, distance, l1, reduced_penalty, smooth, \
    smooth_penalty_eval
from .problem import Problem, feasibility_residual
from .solver import SolveReport, SolveSettings, minimize_family, probe_values
from .transforms import Transform, linear, power, rational_barrier, sqrt_double

TOL_EPS = 1e-6
PARAM_CAP = 1e6
PROBE_SCALES = tuple(10.0 ** -k for k in range(1, 13))


def tol_exact(f_star: float) -> float:
    return 1e-6 * (1.0 + abs(f_star))


def tol_cert(f_star: float) -> float:
    return 1e-12 * (1.0 + abs(f_star))


# --------------------------------------------------------------------------- targets

@dataclass
class Target:
    """A problem together with its constrained optimum."""

    problem: Problem
    f_star: float
    x_star: Optional[np.ndarray] = None
    name: str = ""
    oracle: Optional[object] = field(default=None, repr=False)


def as_target(obj, s: Optional[SolveSettings] = None) -> Target:
    if isinstance(obj, Target):
        return obj
    if isinstance(obj, BenchmarkInstance):
        return Target(obj.problem, obj.f_star, obj.x_star, obj.name, obj.oracle)
    if isinstance(obj, Problem):
        x, f = feasible_optimum(obj, s or SolveSettings())
        return Target(obj, f, x, obj.name)
    raise InputError(f"cannot use {type(obj).__name__} as a lab target")


def feasible_optimum(p: Problem, s: SolveSettings, starts: int = 16):
    """Best feasible point from multistart SLSQP, used when ``f*`` is unknown."""
    from scipy.optimize import minimize

    from .solver import start_points

    cons = [{"type": "eq", "fun": h} for h in p.equalities]
    cons += [{"type": "ineq", "fun": (lambda x, g=g: -g(x))} for g in p.inequalities]
    bounds = [(None if not math.isfinite(a) else a, None if not math.isfinite(b) else b)
              for a, b in zip(p.lower, p.upper)]
    best = None
    for x0 in start_points(p, starts, s.seed):
        res = minimize(p.f, x0, method="SLSQP", bounds=bounds, constraints=cons,
                       options={"maxiter": 500, "ftol": 1e-14})
        x = p.clip(res.x)
        if feasibility_residual(p, x) <= 1e-9:
            val = p.f(x)
            if best is None or val < best[1]:
                best = (x, val)
    if best is None:
        raise SolverError("no feasible point found for the constrained optimum")
    return best


# --------------------------------------------------------------------------- predicate

@dataclass
class ExactnessCheck:
    """Outcome of :func:`is_exact_at`; truthy iff the status is ``exact``."""

    param: float
    status: str
    value: float
    f_star: float
    offset: float
    evidence: Optional[SolveReport] = field(default=None, repr=False)
    reason: str = ""

    def __bool__(self):
        return self.status == "exact"

    def to_dict(self):
        d = {"param": self.param, "status": self.status, "value": self.value,
             "f_star": self.f_star, "offset": self.offset, "reason": self.reason}
        if self.evidence is not None:
            d["best_point"] = [float(v) for v in self.evidence.best_point]
            d["solver_status"] = self.evidence.status
        return d


def probe_points(x_star, scales=PROBE_SCALES) -> np.ndarray:
    """``x* + delta * u`` for ``u`` in ``+-e_i`` and ``+-(1, ..., 1)/sqrt(n)``."""
    x_star = np.asarray(x_star, float)
    n = x_star.size
    dirs = np.vstack([np.eye(n), -np.eye(n)])
    if n > 1:
        ones = np.full(n, 1.0 / math.sqrt(n))
        dirs = np.vstack([dirs, ones, -ones])
    return np.array([x_star + d * u for d in scales for u in dirs])


def _offset(report: SolveReport) -> float:
    return report.eps if report.kind == "smooth" else report.violation


def is_exact_at(family: Family, param: float, target, s: SolveSettings = SolveSettings(),
                tol_value: Optional[float] = None, tol_eps: float = TOL_EPS) -> ExactnessCheck:
    """Decide exactness of ``family`` at ``param`` from a multistart solve.

    Parameters
    ----------
    tol_value : float, optional
        Value tolerance; default ``1e-6 * (1 + |f*|)``.
    tol_eps : float
        Threshold on the minimizing ``eps`` (or on the violation for the
        nonsmooth families).
    """
    t = as_target(target, s)
    p, fs = t.problem, t.f_star
    tv = tol_exact(fs) if tol_value is None else tol_value
    tc = tol_cert(fs)
    smooth_kind = family.kind == "smooth"

    def certified(z, v):
        if v < fs - tv:
            return True
        if v < fs - tc:
            if smooth_kind:
                return float(z[-1]) > tol_eps
            return feasibility_residual(p, z[:p.n]) > tol_eps
        return False

    starts = None if t.x_star is None else np.atleast_2d(t.x_star)
    if t.x_star is not None:
        # dips below f* concentrate next to x*; scan there at several scales first
        for z, v in probe_values(p, family, param, probe_points(t.x_star), s):
            if certified(z, v):
                rep = SolveReport(family.kind, z, v, True, "probe", None,
                                  feasibility_residual(p, z[:p.n]), [])
                return ExactnessCheck(param, "not_exact", v, fs, _offset(rep), rep,
                                      "probe next to x* below f*")
    try:
        rep = minimize_family(p, family, param, s, stop_when=certified, starts=starts)
    except SolverError as exc:
        return ExactnessCheck(param, "indeterminate", math.nan, fs, math.nan, None, str(exc))
    off = _offset(rep)
    v = rep.best_value
    if rep.unbounded:
        return ExactnessCheck(param, "not_exact", v, fs, off, rep, "unbounded below")
    if certified(rep.best_point, v):
        return ExactnessCheck(param, "not_exact", v, fs, off, rep,
                              "value below f* away from the feasible set")
    if v >= fs:
        off = 0.0
    return ExactnessCheck(param, "exact", v, fs, off, rep, "")


# --------------------------------------------------------------------------- estimation

@dataclass
class Relation:
    """One checked relation ``lhs (op) rhs`` within ``tol``; ``passed`` is None if inapplicable."""

    name: str
    lhs: float
    rhs: float
    tol: float
    op: str = "="
    passed: Optional[bool] = None
    note: str = ""

    @classmethod
    def check(cls, name, lhs, rhs, tol, op="=", note=""):
        if lhs is None or rhs is None or not (math.isfinite(lhs) and math.isfinite(rhs)):
            return cls(name, _num(lhs), _num(rhs), tol, op, None, note or "inapplicable")
        if op == "=":
            ok = abs(lhs - rhs) <= tol
        elif op == "<=":
            ok = lhs <= rhs + tol
        else:
            ok = lhs >= rhs - tol
        return cls(name, lhs, rhs, tol, op, bool(ok), note)

    def to_dict(self):
        return {"relation": self.name, "lhs": self.lhs, "rhs": self.rhs, "op": self.op,
                "tol": self.tol, "pass": self.passed, "note": self.note}


def _num(v):
    return math.nan if v is None else float(v)


@dataclass
class ExactnessReport:
    """Estimated exact penalty parameter of one family on one problem."""

    problem: str
    family: str
    symbol: str
    estimate: float
    status: str
    f_star: float
    bracket: Tuple[float, float]
    tol: float
    evaluations: List[ExactnessCheck] = field(default_factory=list, repr=False)
    relations: List[Relation] = field(default_factory=list)
    inconsistency: Optional[Tuple] = None

    @property
    def exact(self) -> bool:
        return self.status == "ok"

    def to_dict(self):
        return {
            "problem": self.problem,
            "family": self.family,
            "symbol": self.symbol,
            "estimate": self.estimate,
            "status": self.status,
            "f_star": self.f_star,
            "bracket": list(self.bracket),
            "tol": self.tol,
            "inconsistency": None if self.inconsistency is None else list(self.inconsistency),
            "evaluations": [{k: v for k, v in e.to_dict().items()} for e in self.evaluations],
            "relations": [r.to_dict() for r in self.relations],
        }


def estimate_exact_parameter(family: Family, target, bracket: Tuple[float, float] = (0.0, 1.0),
                             tol: float = 1e-3, s: SolveSettings = SolveSettings(),
                             cap: float = PARAM_CAP) -> ExactnessReport:
    """Bisection on :func:`is_exact_at` down to bracket width ``tol``.

    ``hi`` is doubled until the family is exact there (up to ``cap``, beyond
    which the report says ``not_exact``).  The estimate is the bracket
    midpoint, or ``lo`` when the family is already exact at ``lo``.
    Monotonicity is spot-checked at the quartiles of the searched interval.
    """
    lo, hi = map(float, bracket)
    if not (0 <= lo < hi) or not tol > 0:
        raise InputError("need 0 <= lo < hi and tol > 0")
    t = as_target(target, s)
    cache: Dict[float, ExactnessCheck] = {}

    def pred(x):
        if x not in cache:
            cache[x] = is_exact_at(family, x, t, s)
            if cache[x].status == "indeterminate":
                raise SolverError(f"predicate indeterminate at {x}: {cache[x].reason}")
        return bool(cache[x])

    def report(est, status, blo, bhi, incons=None):
        evals = [cache[k] for k in sorted(cache)]
        return ExactnessReport(t.name, family.label, family.symbol, est, status, t.f_star,
                               (blo, bhi), tol, evals, [], incons)

    try:
        lo0 = lo
        while not pred(hi):
            lo = hi
            hi *= 2.0
            if hi > cap:
                return report(NOT_EXACT, "not_exact", lo, math.inf)
        if pred(lo):
            est, blo, bhi = lo, lo, lo
        else:
            while hi - lo > tol:
                mid = 0.5 * (lo + hi)
                if pred(mid):
                    hi = mid
                else:
                    lo = mid
            est, blo, bhi = 0.5 * (lo + hi), lo, hi
        span_hi = max(k for k in cache if cache[k])
        for q in (0.25, 0.5, 0.75):
            pred(lo0 + q * (span_hi - lo0))
    except SolverError as exc:
        return report(math.nan, "indeterminate", lo, hi, (str(exc),))
    incons = _monotonicity_violation(cache)
    status = "ok" if incons is None else "predicate inconsistent"
    return report(est, status, blo, bhi, incons)


def _monotonicity_violation(cache):
    keys = sorted(cache)
    for i, a in enumerate(keys):
        if cache[a]:
            for b in keys[i + 1:]:
                if not cache[b]:
                    return (a, "exact", b, "not_exact")
    return None


# --------------------------------------------------------------------------- relations

def _estimate(family, t, s, tol, bracket=None):
    """Estimate with a bracket hint from the oracle when one is known."""
    if bracket is None:
        bracket = (0.0, 1.0)
    return estimate_exact_parameter(family, t, bracket, tol, s)


def _oracle_row(t, fam, rep, tol):
    if t.oracle is None:
        return None
    val = t.oracle(fam)
    if val is None:
        return None
    if val == NOT_EXACT:
        return Relation.check(f"{fam.symbol}* vs analytic ({fam.label})",
                              1.0 if rep.estimate == NOT_EXACT else 0.0, 1.0, 0.0,
                              note="analytic: not exact")
    return Relation.check(f"{fam.symbol}* vs analytic ({fam.label})", rep.estimate, val, tol)


def verify_square_relation(target, s: SolveSettings = SolveSettings(), tol: float = 1e-3,
                           alpha: float = 0.0) -> Tuple[List[Relation], List[ExactnessReport]]:
    """``lambda* = sigma*^2 / 4`` (``alpha = 0``) or ``lambda* = sigma* / 2`` (``alpha = 1``)."""
    t = as_target(target, s)
    fs, fl = distance(), smooth(alpha=alpha)
    rs = _estimate(fs, t, s, tol)
    rl = _estimate(fl, t, s, tol)
    rows = []
    sig, lam = rs.estimate, rl.estimate
    if not (math.isfinite(sig) and math.isfinite(lam)):
        rows.append(Relation.check("lambda* = f(sigma*)", None, None, 0.0))
    elif alpha == 0:
        comb = rl.tol + 0.5 * sig * rs.tol
        rows.append(Relation.check("lambda* = sigma*^2/4", lam, sig * sig / 4.0, 2.0 * comb))
    elif alpha == 1:
        comb = rl.tol + 0.5 * rs.tol
        rows.append(Relation.check("lambda* = sigma*/2 (alpha=1)", lam, sig / 2.0, 2.0 * comb))
    else:
        rhs = (sig / 2.0) ** (2.0 / (alpha + 1.0))
        rows.append(Relation.check(f"lambda* = (sigma*/2)^(2/(alpha+1)) (alpha={alpha:g})",
                                   lam, rhs, 4.0 * max(rl.tol, rs.tol)))
    for fam, rep in ((fs, rs), (fl, rl)):
        row = _oracle_row(t, fam, rep, 5.0 * rep.tol)
        if row is not None:
            rows.append(row)
    return rows, [rs, rl]


def verify_w_bounds(target, w: float, s: SolveSettings = SolveSettings(), tol: float = 1e-3,
                    sigma_report: Optional[ExactnessReport] = None):
    """Sandwich ``max(0, s^2/4 - |w| s) <= lambda*(w) <= s^2/4 + |w| s`` for scalar ``w``.

    ``|w|`` is the euclidean norm of the shift vector.  The general upper bound
    ``(s/2 + |w|)^2`` is reported as a separate row.
    """
    t = as_target(target, s)
    rs = sigma_report or _estimate(distance(), t, s, tol)
    fw = smooth(w=w)
    rw = _estimate(fw, t, s, tol)
    sig, lam = rs.estimate, rw.estimate
    wn = float(np.linalg.norm(PenaltyConfig(1.0, w=w).shift(t.problem)))
    comb = rw.tol + (0.5 * sig + wn) * rs.tol if math.isfinite(sig) else 0.0
    rows = [
        Relation.check("lambda*(w) >= max(0, sigma*^2/4 - |w| sigma*)", lam,
                       max(0.0, sig * sig / 4.0 - wn * sig), comb, ">="),
        Relation.check("lambda*(w) <= sigma*^2/4 + |w| sigma*", lam,
                       sig * sig / 4.0 + wn * sig, comb, "<="),
        Relation.check("lambda*(w) <= (sigma*/2 + |w|)^2", lam, (sig / 2.0 + wn) ** 2, comb, "<="),
    ]
    row = _oracle_row(t, fw, rw, 5.0 * rw.tol)
    if row is not None:
        rows.append(row)
    return rows, [rs, rw]


def verify_l1_bounds(target, s: SolveSettings = SolveSettings(), tol: float = 1e-3):
    """``sigma*/sqrt(m+l) <= nu* <= sigma*`` and finiteness of both together."""
    t = as_target(target, s)
    rs = _estimate(distance(), t, s, tol)
    rn = _estimate(l1(), t, s, tol)
    sig, nu = rs.estimate, rn.estimate
    k = t.problem.m + t.problem.l
    comb = rs.tol + rn.tol
    rows = [
        Relation.check("nu* >= sigma*/sqrt(m+l)", nu, sig / math.sqrt(k), comb, ">="),
        Relation.check("nu* <= sigma*", nu, sig, comb, "<="),
        Relation.check("sigma* finite <=> nu* finite", float(math.isfinite(sig)),
                       float(math.isfinite(nu)), 0.0),
    ]
    for fam, rep in ((distance(), rs), (l1(), rn)):
        row = _oracle_row(t, fam, rep, 5.0 * rep.tol)
        if row is not None:
            rows.append(row)
    return rows, [rs, rn]


def verify_beta_reduction(target, s: SolveSettings = SolveSettings(), tol: float = 1e-3,
                          slope: float = 2.0):
    """``lambda*(beta) = lambda*/beta'(0)`` for a linear beta and the 2 sqrt(eps) example.

    The second relation compares ``lambda*`` under ``beta = 2 sqrt(eps)`` with
    ``(theta*/3)^(3/2)``, ``theta*`` being the parameter of
    ``f + theta d^(2/3)``.
    """
    t = as_target(target, s)
    r0 = _estimate(smooth(), t, s, tol)
    rb = _estimate(smooth(beta=linear(slope)), t, s, tol)
    rq = _estimate(smooth(beta=sqrt_double()), t, s, tol)
    rt = _estimate(distance(exponent=2.0 / 3.0), t, s, tol)
    lam, lb, lq, th = r0.estimate, rb.estimate, rq.estimate, rt.estimate
    rows = [
        Relation.check("lambda*(beta=identity) = lambda*", lam, lam / 1.0, 0.0),
        Relation.check(f"lambda*(beta=linear({slope:g})) = lambda*/{slope:g}", lb, lam / slope,
                       2.0 * (rb.tol + r0.tol / slope)),
        Relation.check("lambda*(beta=2sqrt) = (theta*/3)^(3/2)", lq, (th / 3.0) ** 1.5,
                       2.0 * (rq.tol + 0.5 * math.sqrt(max(th, 0.0) / 3.0) * rt.tol)),
    ]
    row = _oracle_row(t, smooth(beta=linear(slope)), rb, 5.0 * rb.tol)
    if row is not None:
        rows.append(row)
    return rows, [r0, rb, rq, rt]


def verify_transform_bounds(target, s: SolveSettings = SolveSettings(), tol: float = 1e-3,
                              phi: Optional[Transform] = None):
    """Convexity bound, comparison bound and the boolean transfer under a larger beta.

    * ``lambda*(phi) <= lambda* / phi'(0)`` for convex ``phi``;
    * ``lambda*(psi) <= lambda*(identity) / psi0`` for ``psi = linear(2)``, ``psi0 = 2``;
    * ``gamma = 2 sqrt(eps) >= 2 * eps`` on ``(0, 1)``, so the ``gamma`` penalty
      is exact above ``lambda*/2``; checked at ``0.75 * lambda* + 0.01``.  The
      comparison only holds for ``eps <= 1``, so this check restricts eps to
      ``(0, 1]``.  Without the restriction the minimizing eps exceeds 1 once
      ``d**2 > lambda`` and the transfer can fail.
    """
    t = as_target(target, s)
    phi = phi or rational_barrier()
    r0 = _estimate(smooth(), t, s, tol)
    rp = _estimate(smooth(phi=phi), t, s, tol)
    rl = _estimate(smooth(phi=linear(2.0)), t, s, tol)
    lam, lp, ll = r0.estimate, rp.estimate, rl.estimate
    d0 = phi.right_derivative_at_0
    rows = []
    if phi.is_convex() and d0:
        rows.append(Relation.check(f"lambda*({phi}) <= lambda*/phi'(0)", lp, lam / d0,
                                   rp.tol + r0.tol / d0, "<="))
    rows.append(Relation.check("lambda*(linear(2)) <= lambda*/2", ll, lam / 2.0,
                               rl.tol + r0.tol / 2.0, "<="))
    probe = 0.75 * lam + 0.01 if math.isfinite(lam) else None
    name = "gamma=2sqrt(eps) exact above lambda*(beta)/gamma0"
    if probe is not None:
        chk = is_exact_at(smooth(beta=sqrt_double()), probe, t, replace(s, eps_max=1.0))
        rows.append(Relation.check(name + " (eps <= 1)", 1.0 if chk else 0.0, 1.0, 0.0,
                                   note=f"lambda={probe:.6g}"))
    return rows, [r0, rp, rl]


# --------------------------------------------------------------------------- witnesses

@dataclass
class NonexactnessEvidence:
    case: str
    lam: float
    found: bool
    f_star: float
    witnesses: List[dict] = field(default_factory=list)

    @property
    def best(self) -> Optional[dict]:
        return min(self.witnesses, key=lambda w: w["value"]) if self.witnesses else None

    def to_dict(self):
        return {"case": self.case, "lambda": self.lam, "found": self.found,
                "f_star": self.f_star, "witnesses": self.witnesses}


def demonstrate_nonexactness(case: str, lam: float, w: float = 1.0, margin: float = 1e-8,
                             n_points: int = 2001) -> NonexactnessEvidence:
    """Exhibit points where a penalty drops below ``f*``.

    ``signsqrt_w``
        ``f = -sign(x) sqrt|x|`` with ``phi = sqrt(t)``: scans ``(eps w, eps)`` for
        ``eps`` in ``[1e-12, 1e-2]``.  With ``w = 0`` it scans an ``(x, eps)``
        grid instead and finds nothing when ``lam >= 1/4``.
    ``power_phi``
        The two-dimensional sphere problem with ``phi = t^1.5``: line search
        toward ``x*`` from outside on the eps-reduced penalty.
    """
    if case == "signsqrt_w":
        inst = get_benchmark("signsqrt")
        p = inst.problem
        cfg = PenaltyConfig(lam, w=w, phi=power(0.5))
        eps = np.geomspace(1e-12, 1e-2, n_points)
        if w != 0:
            pts = [(np.array([e * w]), e) for e in eps]
        else:
            xs = np.concatenate([-np.geomspace(1e-12, 1.0, 201), np.geomspace(1e-12, 1.0, 201)])
            pts = [(np.array([x]), e) for x in xs for e in eps[::20]]
        found = []
        for x, e in pts:
            v = smooth_penalty_eval(p, cfg, x, e)
            if v < inst.f_star - margin:
                found.append({"x": [float(x[0])], "eps": float(e), "value": float(v)})
        found.sort(key=lambda d: d["value"])
        return NonexactnessEvidence(case, lam, bool(found), inst.f_star, found[:5])
    if case == "power_phi":
        inst = get_benchmark("sphere", n=2)
        p = inst.problem
        cfg = PenaltyConfig(lam, phi=power(1.5))
        found = []
        for tt in np.geomspace(1e-12, 1e-1, n_points // 4):
            x = inst.x_star * (1.0 + tt)
            v = reduced_penalty(p, cfg, x, eps_max=10.0, method="numeric")
            if v < inst.f_star - margin:
                found.append({"x": [float(a) for a in x], "t": float(tt), "value": float(v)})
        found.sort(key=lambda d: d["value"])
        return NonexactnessEvidence(case, lam, bool(found), inst.f_star, found[:5])
    raise UnsupportedError(f"unknown non-exactness case {case!r}")


def nonexactness_rows(lams: Sequence[float] = (1.0, 10.0, 100.0)) -> List[Relation]:
    rows = []
    for lam in lams:
        ev = demonstrate_nonexactness("signsqrt_w", lam, w=1.0)
        best = ev.best
        rows.append(Relation.check(f"signsqrt w=1 lambda={lam:g}: min F on eps*w curve < f*",
                                   best["value"] if best else 0.0, ev.f_star - 1e-4, 0.0, "<=",
                                   note="" if best is None else f"eps={best['eps']:.3g}"))
    ev = demonstrate_nonexactness("signsqrt_w", 1.0, w=0.0)
    rows.append(Relation.check("signsqrt w=0 phi=sqrt lambda=1: no witness",
                               float(len(ev.witnesses)), 0.0, 0.0))
    ev = demonstrate_nonexactness("power_phi", 1e3)
    rows.append(Relation.check("power phi t^1.5 lambda=1e3: reduced penalty < f*",
                               ev.best["value"] if ev.best else 0.0, ev.f_star - 1e-8, 0.0,
                               "<="))
    return rows


def relation_csv_rows(problem: str, family: str, rows: Sequence[Relation]) -> List[dict]:
    return [{"problem": problem, "family": family, "relation": r.name, "lhs": r.lhs,
             "rhs": r.rhs, "tol": r.tol, "pass": r.passed} for r in rows]


__all__ = ["Target", "as_target", "feasible_optimum", "ExactnessCheck", "is_exact_at",
           "Relation", "ExactnessReport", "estimate_exact_parameter", "verify_square_relation",
           "verify_w_bounds", "verify_l1_bounds", "verify_beta_reduction",
           "verify_transform_bounds", "NonexactnessEvidence", "demonstrate_nonexactness",
           "nonexactness_rows", "relation_csv_rows"]
