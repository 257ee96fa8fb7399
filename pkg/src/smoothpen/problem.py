"""Constrained problems and their constraint violation measures.

A :class:`Problem` is ``min f(x)`` subject to equalities ``h_i(x) = 0``,
inequalities ``g_k(x) <= 0`` and a box ``lower <= x <= upper``.  The box is
never folded into the violation measures below; it is enforced by the solver.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import ConfigError, EvaluationError, InputError

Func = Callable[[np.ndarray], float]
Grad = Callable[[np.ndarray], np.ndarray]


class ViolationKind(enum.Enum):
    EUCLIDEAN = "euclidean"
    L1 = "l1"


def fd_step(x):
    """Central-difference step used whenever an analytic gradient is missing."""
    return np.maximum(1e-6, 1e-8 * np.abs(x))


def fd_gradient(func, x):
    x = np.asarray(x, dtype=float)
    h = fd_step(x)
    g = np.empty_like(x)
    for i in range(x.size):
        xp = x.copy()
        xm = x.copy()
        xp[i] += h[i]
        xm[i] -= h[i]
        g[i] = (func(xp) - func(xm)) / (2.0 * h[i])
    return g


def _finite(value, what):
    value = float(value)
    if math.isnan(value):
        raise EvaluationError(f"{what} returned NaN")
    return value


@dataclass
class Problem:
    """An instance of ``min f(x)`` s.t. ``h(x) = 0``, ``g(x) <= 0``, ``x`` in a box.

    Parameters
    ----------
    n : int
        Dimension of ``x``.
    objective : callable
        ``f(x) -> float``; ``+inf`` is allowed, NaN is an error.
    equalities, inequalities : sequence of callable
        Scalar constraint functions.
    objective_gradient : callable, optional
        ``grad f``; central differences are used when omitted.
    equality_gradients, inequality_gradients : sequence of callable, optional
        One gradient per constraint, or ``None`` for finite differences.
    lower, upper : array_like, optional
        Box bounds, ``+-inf`` allowed.  Default is the whole space.
    unconstrained : bool
        Must be set to build a problem with no equality/inequality constraints.
    """

    n: int
    objective: Func
    equalities: Sequence[Func] = ()
    inequalities: Sequence[Func] = ()
    objective_gradient: Optional[Grad] = None
    equality_gradients: Optional[Sequence[Optional[Grad]]] = None
    inequality_gradients: Optional[Sequence[Optional[Grad]]] = None
    lower: Optional[np.ndarray] = None
    upper: Optional[np.ndarray] = None
    name: str = "problem"
    unconstrained: bool = False
    spec: object = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ConfigError(f"dimension must be a positive integer, got {self.n}", "dimension")
        self.n = int(self.n)
        self.equalities = tuple(self.equalities)
        self.inequalities = tuple(self.inequalities)
        lo = np.full(self.n, -np.inf) if self.lower is None else np.asarray(self.lower, float)
        up = np.full(self.n, np.inf) if self.upper is None else np.asarray(self.upper, float)
        if lo.shape != (self.n,) or up.shape != (self.n,):
            raise ConfigError("box bounds must have length n", "box")
        if np.any(np.isnan(lo)) or np.any(np.isnan(up)) or np.any(lo > up):
            raise ConfigError("box bounds must satisfy lower <= upper", "box")
        self.lower, self.upper = lo, up
        if self.m + self.l == 0 and not self.unconstrained:
            raise ConfigError("problem has no constraints; pass unconstrained=True", "constraints")
        for attr, funcs in (("equality_gradients", self.equalities),
                            ("inequality_gradients", self.inequalities)):
            grads = getattr(self, attr)
            if grads is None:
                grads = (None,) * len(funcs)
            grads = tuple(grads)
            if len(grads) != len(funcs):
                raise ConfigError(f"{attr} must match the number of constraints", attr)
            setattr(self, attr, grads)

    @property
    def m(self) -> int:
        return len(self.equalities)

    @property
    def l(self) -> int:  # noqa: E743
        return len(self.inequalities)

    @property
    def box_is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.lower)) and np.all(np.isfinite(self.upper)))

    def check_point(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float).reshape(-1)
        if x.size != self.n:
            raise InputError(f"expected a point of length {self.n}, got {x.size}")
        return x

    def f(self, x) -> float:
        return _finite(self.objective(x), "objective")

    def grad_f(self, x) -> np.ndarray:
        if self.objective_gradient is not None:
            g = np.asarray(self.objective_gradient(x), dtype=float)
        else:
            g = fd_gradient(self.objective, x)
        if np.any(np.isnan(g)):
            raise EvaluationError("objective gradient returned NaN")
        return g

    def constraints(self, x) -> np.ndarray:
        """Stacked residuals ``(h_1..h_m, g_1..g_l)``."""
        vals = [c(x) for c in self.equalities] + [c(x) for c in self.inequalities]
        out = np.array(vals, dtype=float)
        if np.any(np.isnan(out)):
            raise EvaluationError("constraint evaluation returned NaN")
        return out

    def jacobian(self, x) -> np.ndarray:
        """Rows are constraint gradients, same order as :meth:`constraints`."""
        funcs = self.equalities + self.inequalities
        grads = self.equality_gradients + self.inequality_gradients
        jac = np.empty((len(funcs), self.n))
        for j, (c, gc) in enumerate(zip(funcs, grads)):
            jac[j] = gc(x) if gc is not None else fd_gradient(c, x)
        if np.any(np.isnan(jac)):
            raise EvaluationError("constraint gradient returned NaN")
        return jac

    def clip(self, x) -> np.ndarray:
        return np.clip(x, self.lower, self.upper)

    def require_finite_objective(self, points) -> None:
        """Raise :class:`ConfigError` unless ``f`` is finite at some feasible point."""
        for x in points:
            x = self.check_point(x)
            if feasibility_residual(self, x) == 0 and np.isfinite(self.f(x)):
                return
        raise ConfigError(f"objective of {self.name} is not finite at any feasible point tried",
                          "objective")


def active_residuals(p: Problem, c: np.ndarray) -> np.ndarray:
    """Equality residuals as is, inequality residuals through ``max(0, .)``."""
    r = c.copy()
    r[p.m:] = np.maximum(r[p.m:], 0.0)
    return r


def feasibility_residual(p: Problem, x, kind: ViolationKind = ViolationKind.EUCLIDEAN) -> float:
    """Distance of the constraint values to the admissible set.

    ``euclidean`` gives ``sqrt(sum h^2 + sum max(0, g)^2)``; ``l1`` gives
    ``sum |h| + sum max(0, g)``.  The box does not contribute.
    """
    x = p.check_point(x)
    r = active_residuals(p, p.constraints(x))
    if ViolationKind(kind) is ViolationKind.L1:
        return float(np.sum(np.abs(r)))
    return float(math.sqrt(float(np.dot(r, r))))


def shifted_residuals(p: Problem, c: np.ndarray, eps: float, w: np.ndarray) -> np.ndarray:
    r = c - eps * w
    r[p.m:] = np.maximum(r[p.m:], 0.0)
    return r


def shifted_violation_sq(p: Problem, x, eps: float, w=None) -> float:
    """Squared distance from zero to ``Phi(x) - eps * w``.

    For equalities the shifted residual is ``h_i(x) - eps * w_i``; for
    inequalities ``max(0, g_k(x) - eps * w_{m+k})``.
    """
    if not eps > 0:
        raise InputError(f"eps must be positive, got {eps}")
    x = p.check_point(x)
    w = as_shift(p, w)
    r = shifted_residuals(p, p.constraints(x), eps, w)
    return float(np.dot(r, r))


def as_shift(p: Problem, w) -> np.ndarray:
    if w is None:
        return np.zeros(p.m + p.l)
    w = np.atleast_1d(np.asarray(w, dtype=float))
    if w.size == 1 and p.m + p.l > 1:
        w = np.full(p.m + p.l, float(w[0]))
    if w.shape != (p.m + p.l,):
        raise InputError(f"shift vector must have length {p.m + p.l}, got {w.size}")
    return w
