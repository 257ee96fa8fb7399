"""Multistart projected-gradient minimization of penalty functions over a box.

The smooth penalty is minimized in the extended variable ``(x, eps)`` over
``box x [EPS_LO, eps_max]``.  After every accepted step the eps component is
re-optimized numerically at the new ``x`` (a one-dimensional profile search),
and at the end of each run the ``eps = 0`` branch is compared explicitly.
The nonsmooth families (distance, l1) are minimized over ``x`` alone with the
same line search.

Run statuses
------------
converged       projected-gradient norm below the tolerance
stalled         the line search found no decrease (typical at a kink)
stagnated       relative decrease below ``STALL_REL`` over ``stall_iterations`` iterations
max_iterations  iteration budget exhausted
unbounded       value fell below ``UNBOUNDED``
target          the caller's stop condition fired
failed          a user function raised; the run is excluded
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable, List, Optional, Sequence

import numpy as np
from scipy.stats import qmc

from . import _kernels
from .errors import EvaluationError, InputError, SolverError, UnsupportedError
from .penalty import (EPS_LO, N_GRID, REL_TOL, Family, PenaltyConfig, _distance_grad,
                      _distance_value, _gradient, _l1_grad, _l1_value, _value)
from .problem import Problem, active_residuals, fd_step

UNBOUNDED = -1e12
SAMPLE_CLIP = 1e3
STALL_REL = 1e-8
# eps lower bounds of the successive descent stages
EPS_FLOORS = (1e-2, 1e-4, 1e-6, 1e-8, 1e-10, EPS_LO)
STAGE_ITERATIONS = 200
_OK = ("converged", "stalled", "stagnated", "unbounded", "target")


@dataclass(frozen=True)
class SolveSettings:
    """Knobs of :func:`minimize_penalized`; ``eps_max=None`` means the default rule."""

    max_iterations: int = 5000
    armijo_c: float = 1e-4
    shrink: float = 0.5
    initial_step: float = 1.0
    tolerance: float = 1e-9
    multistart: int = 64
    seed: int = 0
    eps_max: Optional[float] = None
    stall_iterations: int = 50
    record_trace: bool = False

    def __post_init__(self):
        if int(self.max_iterations) < 1:
            raise InputError("max_iterations must be positive")
        if int(self.multistart) < 1:
            raise InputError("multistart must be at least 1")
        for name in ("armijo_c", "shrink", "initial_step", "tolerance"):
            if not getattr(self, name) > 0:
                raise InputError(f"{name} must be positive")
        if not self.shrink < 1 or not self.armijo_c < 1:
            raise InputError("shrink and armijo_c must lie in (0, 1)")
        if self.eps_max is not None and not self.eps_max > 0:
            raise InputError("eps_max must be positive")
        if int(self.stall_iterations) < 1:
            raise InputError("stall_iterations must be positive")


@dataclass
class RunSummary:
    start: int
    status: str
    iterations: int
    value: float
    point: List[float]
    start_point: List[float]
    trace: List[tuple] = field(default_factory=list, repr=False)


@dataclass
class SolveReport:
    """Outcome of a multistart solve.

    ``best_point`` is ``(x, eps)`` for the smooth family and ``x`` for the
    nonsmooth ones.  ``violation`` is the euclidean residual at the best ``x``.
    """

    kind: str
    best_point: np.ndarray
    best_value: float
    converged: bool
    status: str
    eps_max: Optional[float]
    violation: float
    runs: List[RunSummary]
    oracle_gap: Optional[float] = None

    @property
    def x(self) -> np.ndarray:
        return self.best_point[:-1] if self.kind == "smooth" else self.best_point

    @property
    def eps(self) -> float:
        return float(self.best_point[-1]) if self.kind == "smooth" else 0.0

    @property
    def unbounded(self) -> bool:
        return self.status == "unbounded"

    @property
    def n_failed(self) -> int:
        return sum(r.status == "failed" for r in self.runs)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "best_point": [float(v) for v in self.best_point],
            "best_value": float(self.best_value),
            "converged": self.converged,
            "status": self.status,
            "eps_max": self.eps_max,
            "violation": self.violation,
            "oracle_gap": self.oracle_gap,
            "runs": [{k: v for k, v in asdict(r).items() if k != "trace"} for r in self.runs],
        }

    def trace_rows(self) -> List[dict]:
        """One row per run, plus one per iteration when traces were recorded."""
        rows = []
        for r in self.runs:
            for it, value, step in r.trace:
                rows.append({"start": r.start, "iteration": it, "value": value, "step": step,
                             "status": ""})
            rows.append({"start": r.start, "iteration": r.iterations, "value": r.value,
                         "step": "", "status": r.status})
        return rows


# --------------------------------------------------------------------------- starts

def start_points(p: Problem, count: int, seed: int, extra_dims: int = 0) -> np.ndarray:
    """Scrambled Halton points over the box, infinite bounds clipped to ``+-1e3``.

    Extra dimensions are returned in ``[0, 1]`` for the caller to scale.
    """
    lo = np.maximum(p.lower, -SAMPLE_CLIP)
    up = np.minimum(p.upper, SAMPLE_CLIP)
    lo = np.where(lo > up, up, lo)
    u = qmc.Halton(d=p.n + extra_dims, scramble=True, seed=int(seed)).random(int(count))
    u[:, :p.n] = lo + u[:, :p.n] * (up - lo)
    return u


def default_eps_max(p: Problem, xs: Sequence[np.ndarray]) -> float:
    """``10 * (1 + max violation over the start set)``."""
    worst = 0.0
    for x in xs:
        r = active_residuals(p, p.constraints(x))
        worst = max(worst, math.sqrt(float(np.dot(r, r))))
    return 10.0 * (1.0 + worst)


# --------------------------------------------------------------------------- local search

class _Objective:
    """Value, gradient and eps polish of one penalty member."""

    def __init__(self, p, family, cfg, param, eps_max):
        self.p = p
        self.family = family
        self.cfg = cfg
        self.param = param
        self.eps_max = eps_max
        self.smooth = family.kind == "smooth"
        self.w = cfg.shift(p) if self.smooth else None
        self.dim = p.n + (1 if self.smooth else 0)
        lo = p.lower
        up = p.upper
        if self.smooth:
            lo = np.append(lo, EPS_LO)
            up = np.append(up, eps_max)
        self.lo, self.up = lo, up
        self.floor = EPS_LO

    def set_floor(self, floor):
        if self.smooth and floor is not None:
            self.floor = floor
            self.lo = self.lo.copy()
            self.lo[-1] = floor

    def project(self, z):
        return np.clip(z, self.lo, self.up)

    def value(self, z):
        p = self.p
        x = z[:p.n]
        fval = p.f(x)
        c = p.constraints(x)
        if self.smooth:
            return _value(p, self.cfg, fval, c, self.w, float(z[-1]))
        if self.family.kind == "l1":
            return _l1_value(p, self.param, fval, c)
        return _distance_value(p, self.param, fval, c, self.family.phi, self.family.exponent)

    def gradient(self, z):
        p = self.p
        x = z[:p.n]
        fval = p.f(x)
        c = p.constraints(x)
        gf = p.grad_f(x)
        jac = p.jacobian(x)
        if self.smooth:
            return _gradient(p, self.cfg, x, float(z[-1]), fval, c, gf, jac, self.w)
        if self.family.kind == "l1":
            return _l1_grad(p, self.param, gf, c, jac)
        return _distance_grad(p, self.param, gf, c, jac, self.family.phi, self.family.exponent)

    def polish(self, z, v):
        """Re-optimize eps at fixed x; returns the better of ``(z, v)`` and the polish."""
        if not self.smooth:
            return z, v
        p = self.p
        x = z[:p.n]
        fval = p.f(x)
        c = p.constraints(x)
        cfg = self.cfg
        e, pv = _kernels.profile_min(fval, c, p.m, self.w, cfg.coef, cfg.lam, cfg.phi, cfg.beta,
                                     self.floor, self.eps_max, N_GRID, REL_TOL)
        if pv < v:
            z = z.copy()
            z[-1] = e
            return z, pv
        return z, v

    def reduced(self, x):
        z, v = self.polish(np.append(x, self.eps_max) if self.smooth else x, math.inf)
        if self.smooth and v == math.inf:
            z = np.append(x, self.eps_max)
        return z, v

    def zero_branch(self, z, v):
        """Compare with ``F(x, 0)`` (smooth family only)."""
        if not self.smooth:
            return z, v
        x = z[:self.p.n]
        c = self.p.constraints(x)
        if not np.any(active_residuals(self.p, c)):
            fval = self.p.f(x)
            if fval <= v:
                z = z.copy()
                z[-1] = 0.0
                return z, fval
        return z, v


def _armijo(obj, z, v, g, t0, s):
    """Projected backtracking; returns ``(z_new, v_new, t)`` or ``None``."""
    t = t0
    for _ in range(200):
        zn = obj.project(z - t * g)
        dz = zn - z
        if not np.any(dz):
            return None
        vn = obj.value(zn)
        if vn <= v + s.armijo_c * float(np.dot(g, dz)):
            return zn, vn, t
        t *= s.shrink
        if t < 1e-300:
            break
    return None


def _fd_reduced_step(obj, z, v, s):
    """Central-difference projected step on the eps-reduced function."""
    p = obj.p
    x = z[:p.n].copy()
    h = fd_step(x)

    def red(xx):
        return obj.reduced(obj.project(np.append(xx, z[p.n:]))[:p.n])[1]

    g = np.empty(p.n)
    for i in range(p.n):
        xp = x.copy()
        xm = x.copy()
        xp[i] += h[i]
        xm[i] -= h[i]
        fp, fm = red(xp), red(xm)
        if not (math.isfinite(fp) and math.isfinite(fm)):
            return None
        g[i] = (fp - fm) / (2.0 * h[i])
    t = s.initial_step
    for _ in range(200):
        xn = obj.project(np.append(x - t * g, z[p.n:]))[:p.n]
        if not np.any(xn - x):
            return None
        zn, vn = obj.reduced(xn)
        if vn <= v + s.armijo_c * float(np.dot(g, xn - x)) and vn < v:
            return zn, vn
        t *= s.shrink
        if t < 1e-300:
            break
    return None


def _descend(obj, z, v, s, stop_when, budget, trace, it0):
    """Projected gradient with Armijo from ``z``; returns ``(z, v, status, iterations)``."""
    step = s.initial_step
    history = []
    it = 0
    status = "max_iterations"
    z_prev = g_prev = None
    while it < budget:
        if v < UNBOUNDED:
            return z, v, "unbounded", it
        if stop_when is not None and stop_when(z, v):
            return z, v, "target", it
        if not math.isfinite(v):
            return z, v, "stalled", it
        g = obj.gradient(z)
        if not np.all(np.isfinite(g)):
            return z, v, "stalled", it
        if float(np.linalg.norm(z - obj.project(z - g))) <= s.tolerance:
            return z, v, "converged", it
        if z_prev is not None:
            dz = z - z_prev
            sy = float(np.dot(dz, g - g_prev))
            if sy > 0:
                step = min(max(float(np.dot(dz, dz)) / sy, 1e-12), 32.0 * step)
        z_prev, g_prev = z, g
        it += 1
        res = _armijo(obj, z, v, g, step, s)
        if res is None:
            res = _fd_reduced_step(obj, z, v, s)
            if res is None:
                return z, v, "stalled", it
            z, v = res
            step = s.initial_step
            z_prev = None
        else:
            z, v, t = res
            step = 2.0 * t
        z, v = obj.polish(z, v)
        history.append(v)
        if s.record_trace:
            trace.append((it0 + it, float(v), float(step)))
        if len(history) > s.stall_iterations:
            old = history.pop(0)
            if old - v <= STALL_REL * (1.0 + abs(v)):
                return z, v, "stagnated", it
    return z, v, status, it


def _local_run(obj, z0, s, stop_when, start_index):
    """One start: descent stages with a decreasing eps floor, then the eps = 0 branch."""
    trace = []
    floors = EPS_FLOORS if obj.smooth else (None,)
    total = 0
    status = "max_iterations"
    z = np.asarray(z0, float)
    v = math.inf
    for floor in floors:
        obj.set_floor(floor)
        z = obj.project(z)
        v = min(v, obj.value(z)) if not obj.smooth else obj.value(z)
        z, v = obj.polish(z, v)
        budget = s.max_iterations - total
        last = floor is floors[-1]
        if not last:
            budget = min(budget, STAGE_ITERATIONS)
        z, v, status, used = _descend(obj, z, v, s, stop_when, budget, trace, total)
        total += used
        if status in ("unbounded", "target") or total >= s.max_iterations:
            break
    z, v = obj.zero_branch(z, v)
    if status not in ("unbounded", "target"):
        if v < UNBOUNDED:
            status = "unbounded"
        elif stop_when is not None and stop_when(z, v):
            status = "target"
    return RunSummary(start_index, status, total, float(v), [float(a) for a in z],
                      [float(a) for a in z0], trace)


def _pick_best(runs):
    ok = [r for r in runs if r.status != "failed"]
    if not ok:
        raise SolverError("every multistart run failed")
    return min(ok, key=lambda r: (r.value, tuple(r.point)))


def _solve(p, family, cfg, param, s, stop_when, starts=None):
    smooth = family.kind == "smooth"
    u = start_points(p, s.multistart, s.seed, extra_dims=1 if smooth else 0)
    xs = [row[:p.n] for row in u]
    eps_max = None
    if smooth:
        eps_max = s.eps_max if s.eps_max is not None else default_eps_max(p, xs)
        u[:, -1] = np.maximum(u[:, -1] * eps_max, EPS_LO)
    if starts is not None:
        extra = np.atleast_2d(np.asarray(starts, float))
        if smooth and extra.shape[1] == p.n:
            extra = np.column_stack([extra, np.full(len(extra), eps_max)])
        u = np.vstack([extra, u])
    obj = _Objective(p, family, cfg, param, eps_max)
    runs = []
    for i, z0 in enumerate(u):
        try:
            run = _local_run(obj, z0, s, stop_when, i)
        except (EvaluationError, ArithmeticError, ValueError) as exc:
            run = RunSummary(i, "failed", 0, math.inf, [float(a) for a in z0],
                             [float(a) for a in z0])
            run.trace = [("error", str(exc), 0.0)] if s.record_trace else []
        runs.append(run)
        if run.status in ("target", "unbounded"):
            break
    best = _pick_best(runs)
    point = np.array(best.point)
    x = point[:p.n]
    r = active_residuals(p, p.constraints(x))
    return SolveReport(
        kind=family.kind,
        best_point=point,
        best_value=best.value,
        converged=best.status in _OK,
        status=best.status,
        eps_max=eps_max,
        violation=math.sqrt(float(np.dot(r, r))),
        runs=runs,
    )


def minimize_penalized(p: Problem, cfg: PenaltyConfig, s: SolveSettings = SolveSettings(),
                       stop_when: Optional[Callable[[np.ndarray, float], bool]] = None,
                       starts=None) -> SolveReport:
    """Minimize the smooth penalty over ``box x [0, eps_max]``.

    Parameters
    ----------
    stop_when : callable, optional
        ``stop_when(point, value)``; once true the current run ends with
        status ``target`` and the remaining starts are skipped.
    starts : array_like, optional
        Extra start points, ``(x)`` or ``(x, eps)`` rows, run before the
        low-discrepancy ones.
    """
    fam = Family("smooth", cfg.phi, cfg.beta, cfg.w, cfg.alpha, cfg.half_factor)
    return _solve(p, fam, cfg, cfg.lam, s, stop_when, starts)


def minimize_merit(p: Problem, family: Family, param: float,
                   s: SolveSettings = SolveSettings(),
                   stop_when: Optional[Callable[[np.ndarray, float], bool]] = None,
                   starts=None) -> SolveReport:
    """Minimize a distance or l1 penalty over the box (``x`` only)."""
    if family.kind == "smooth":
        return minimize_penalized(p, family.config(param), s, stop_when, starts)
    if param < 0:
        raise InputError("penalty parameter must be nonnegative")
    return _solve(p, family, None, float(param), s, stop_when, starts)


def minimize_family(p: Problem, family: Family, param: float, s: SolveSettings = SolveSettings(),
                    stop_when=None, starts=None) -> SolveReport:
    """Dispatch on the family kind."""
    if family.kind == "smooth":
        return minimize_penalized(p, family.config(param), s, stop_when, starts)
    return minimize_merit(p, family, param, s, stop_when, starts)


def probe_values(p: Problem, family: Family, param: float, points, s: SolveSettings = SolveSettings()):
    """Eps-reduced penalty values at the given ``x`` points, no descent.

    Returns a list of ``(point, value)`` where ``point`` carries the
    minimizing ``eps`` for the smooth family.
    """
    xs = [p.clip(p.check_point(x)) for x in points]
    eps_max = None
    cfg = None
    if family.kind == "smooth":
        cfg = family.config(param)
        eps_max = s.eps_max if s.eps_max is not None else default_eps_max(p, xs)
    obj = _Objective(p, family, cfg, float(param), eps_max)
    out = []
    for x in xs:
        try:
            z, v = obj.reduced(x)
            z, v = obj.zero_branch(z, v)
            if not obj.smooth:
                v = obj.value(x)
        except (EvaluationError, ArithmeticError, ValueError):
            continue
        out.append((np.asarray(z, float), float(v)))
    return out


# --------------------------------------------------------------------------- grid oracle

def grid_oracle(p: Problem, cfg: PenaltyConfig, resolution: int = 101,
                eps_max: Optional[float] = None, backend: Optional[str] = None):
    """Exhaustive minimum of the smooth penalty on a tensor grid.

    ``x`` runs over ``resolution`` equispaced points per coordinate; ``eps``
    over ``resolution`` geometrically spaced points in ``[eps_max * 1e-8,
    eps_max]`` plus the ``eps = 0`` slice of feasible grid points.

    Returns
    -------
    point : ndarray
        ``(x, eps)`` of the best grid point.
    value : float
    """
    if p.n > 3:
        raise UnsupportedError("grid_oracle supports n <= 3")
    if not p.box_is_finite:
        raise UnsupportedError("grid_oracle needs a finite box")
    resolution = int(resolution)
    if resolution < 2:
        raise InputError("resolution must be at least 2")
    axes = [np.linspace(p.lower[i], p.upper[i], resolution) for i in range(p.n)]
    X = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, p.n)
    if eps_max is None:
        eps_max = default_eps_max(p, X)
    fvals = np.array([p.f(x) for x in X])
    K = p.m + p.l
    C = np.array([p.constraints(x) for x in X]).reshape(len(X), K)
    eps_grid = np.geomspace(eps_max * 1e-8, eps_max, resolution)
    w = cfg.shift(p)
    idx, vals = _kernels.grid_scan(fvals, C, p.m, w, cfg.coef, cfg.lam, cfg.phi, cfg.beta,
                                   eps_grid, backend=backend)
    eps_best = eps_grid[idx]
    feasible = np.array([not np.any(active_residuals(p, c)) for c in C]) if K else \
        np.ones(len(X), bool)
    zero_vals = np.where(feasible, fvals, np.inf)
    use_zero = zero_vals <= vals
    vals = np.where(use_zero, zero_vals, vals)
    eps_best = np.where(use_zero, 0.0, eps_best)
    k = int(np.argmin(vals))
    return np.append(X[k], eps_best[k]), float(vals[k])


def grid_oracle_merit(p: Problem, family: Family, param: float, resolution: int = 101):
    """Grid minimum of a distance or l1 penalty (``n <= 3``, finite box)."""
    if p.n > 3 or not p.box_is_finite:
        raise UnsupportedError("grid_oracle_merit needs n <= 3 and a finite box")
    axes = [np.linspace(p.lower[i], p.upper[i], int(resolution)) for i in range(p.n)]
    X = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, p.n)
    obj = _Objective(p, family, None, float(param), None)
    vals = np.array([obj.value(x) for x in X])
    k = int(np.argmin(vals))
    return X[k], float(vals[k])


__all__ = ["SolveSettings", "SolveReport", "RunSummary", "minimize_penalized", "minimize_merit",
           "minimize_family", "grid_oracle", "grid_oracle_merit", "start_points",
           "default_eps_max", "probe_values", "UNBOUNDED"]
