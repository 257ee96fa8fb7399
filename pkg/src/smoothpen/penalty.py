"""Penalty functions: the smooth penalty ``F`` and the classical nonsmooth ones.

The smooth penalty of a problem with constraint residuals ``c(x)`` is::

    F(x, eps) = f(x) + lam**alpha / (k * eps) * phi(Delta(x, eps)) + lam * beta(eps)

for ``eps > 0``, where ``Delta`` is the squared shifted violation and
``k`` is 1 (default) or 2 (``half_factor``).  At ``eps == 0`` the value is
``f(x)`` on feasible points and ``+inf`` elsewhere.

The nonsmooth families are the distance penalty
``f + sigma * phi(d**2) ** (exponent / 2)`` and the l1 penalty
``f + nu * (sum |h| + sum max(0, g))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Tuple

import numpy as np

from . import _kernels
from .errors import DomainError, InputError, UnsupportedError
from .problem import (Problem, ViolationKind, active_residuals, as_shift, feasibility_residual,
                      shifted_residuals)
from .transforms import Transform, identity

INF = math.inf
EPS_LO = 1e-12
N_GRID = 256
REL_TOL = 1e-12


@dataclass(frozen=True)
class PenaltyConfig:
    """One member of the smooth penalty family.

    ``w`` may be empty (meaning zero) or a scalar broadcast to every
    constraint; it is resolved against the problem at evaluation time.
    """

    lam: float
    w: Tuple[float, ...] = ()
    alpha: float = 0.0
    phi: Transform = field(default_factory=identity)
    beta: Transform = field(default_factory=identity)
    half_factor: bool = False

    def __post_init__(self):
        if not (self.lam >= 0 and math.isfinite(self.lam)):
            raise InputError(f"lambda must be a finite nonnegative number, got {self.lam}")
        if not self.alpha >= 0:
            raise InputError(f"alpha must be nonnegative, got {self.alpha}")
        w = self.w
        if np.isscalar(w):
            w = (float(w),)
        object.__setattr__(self, "w", tuple(float(v) for v in w))
        object.__setattr__(self, "lam", float(self.lam))
        object.__setattr__(self, "alpha", float(self.alpha))

    @property
    def coef(self) -> float:
        """Weight ``lam**alpha / k`` in front of ``phi(Delta) / eps``."""
        return self.lam**self.alpha / (2.0 if self.half_factor else 1.0)

    @property
    def unshifted(self) -> bool:
        return all(v == 0 for v in self.w)

    def shift(self, p: Problem) -> np.ndarray:
        return as_shift(p, self.w or None)

    def with_lambda(self, lam: float) -> "PenaltyConfig":
        return replace(self, lam=lam)


@dataclass(frozen=True)
class Family:
    """A penalty family with its parameter left free.

    ``kind`` is ``"smooth"`` (parameter ``lam``), ``"distance"`` (parameter
    ``sigma``, or ``theta`` when ``exponent != 1``) or ``"l1"`` (``nu``).
    """

    kind: str = "smooth"
    phi: Transform = field(default_factory=identity)
    beta: Transform = field(default_factory=identity)
    w: Tuple[float, ...] = ()
    alpha: float = 0.0
    half_factor: bool = False
    exponent: float = 1.0

    def __post_init__(self):
        if self.kind not in ("smooth", "distance", "l1"):
            raise InputError(f"unknown penalty family {self.kind!r}")
        w = (float(self.w),) if np.isscalar(self.w) else tuple(float(v) for v in self.w)
        object.__setattr__(self, "w", w)

    def config(self, lam: float) -> PenaltyConfig:
        if self.kind != "smooth":
            raise InputError(f"{self.kind} family has no smooth configuration")
        return PenaltyConfig(lam, self.w, self.alpha, self.phi, self.beta, self.half_factor)

    @property
    def unshifted(self) -> bool:
        return all(v == 0 for v in self.w)

    @property
    def symbol(self) -> str:
        if self.kind == "smooth":
            return "lambda"
        if self.kind == "l1":
            return "nu"
        return "sigma" if self.exponent == 1 else "theta"

    @property
    def label(self) -> str:
        if self.kind == "l1":
            return "l1"
        if self.kind == "distance":
            e = "" if self.exponent == 1 else f",exponent={self.exponent:g}"
            return f"distance[phi={self.phi}{e}]"
        w = ",".join(f"{v:g}" for v in self.w) or "0"
        h = ",half" if self.half_factor else ""
        return f"smooth[phi={self.phi},w={w},beta={self.beta},alpha={self.alpha:g}{h}]"


def smooth(**kw) -> Family:
    return Family("smooth", **kw)


def distance(phi: Optional[Transform] = None, exponent: float = 1.0) -> Family:
    return Family("distance", phi=phi or identity(), exponent=exponent)


def l1() -> Family:
    return Family("l1")


# --------------------------------------------------------------------------- smooth penalty

def _value(p, cfg, fval, c, w, eps):
    """Smooth penalty from precomputed ``f(x)`` and constraint values."""
    if eps == 0:
        return fval if not np.any(active_residuals(p, c)) else INF
    r = shifted_residuals(p, c, eps, w)
    delta = float(np.dot(r, r))
    if delta >= cfg.phi.domain_sup:
        return INF
    pv = cfg.phi.value(delta)
    if pv == INF:
        return INF
    return fval + cfg.coef * pv / eps + cfg.lam * cfg.beta.value(eps)


def smooth_penalty_eval(p: Problem, cfg: PenaltyConfig, x, eps: float) -> float:
    """Value of the smooth penalty at ``(x, eps)``; ``+inf`` is a legitimate result."""
    if eps < 0 or math.isnan(eps):
        raise InputError(f"eps must be nonnegative, got {eps}")
    x = p.check_point(x)
    return _value(p, cfg, p.f(x), p.constraints(x), cfg.shift(p), float(eps))


def _gradient(p, cfg, x, eps, fval, c, gf, jac, w):
    r = shifted_residuals(p, c, eps, w)
    delta = float(np.dot(r, r))
    if delta >= cfg.phi.domain_sup:
        raise DomainError(f"Delta={delta} is outside the domain of {cfg.phi}")
    a = cfg.coef
    pv = cfg.phi.value(delta)
    if delta > 0:
        dphi = cfg.phi.derivative(delta)
        gx = gf + (a / eps) * dphi * (2.0 * (jac.T @ r))
        ddelta = -2.0 * float(np.dot(w, r))
        ge = -(a / eps**2) * pv + (a / eps) * dphi * ddelta
    else:
        # Delta vanishes near here only if every shifted residual is zero or inactive
        gx = np.array(gf, dtype=float)
        ge = 0.0
    ge += cfg.lam * cfg.beta.derivative(eps)
    return np.append(gx, ge)


def smooth_penalty_grad(p: Problem, cfg: PenaltyConfig, x, eps: float) -> np.ndarray:
    """Gradient ``(dF/dx, dF/deps)`` at a point with ``eps > 0``.

    Raises :class:`DomainError` when ``Delta`` sits on the boundary of the
    domain of ``phi`` or where ``phi``/``beta`` are not differentiable.
    """
    if not eps > 0:
        raise InputError("the smooth penalty gradient needs eps > 0")
    x = p.check_point(x)
    return _gradient(p, cfg, x, float(eps), p.f(x), p.constraints(x), p.grad_f(x),
                     p.jacobian(x), cfg.shift(p))


# --------------------------------------------------------------------------- eps reduction

@dataclass(frozen=True)
class ReducedForm:
    """Closed form of ``min over eps`` of the smooth penalty, when it exists.

    For ``kind == "closed_form"`` and a linear ``beta`` the reduced function is
    the distance penalty with ``sigma_equivalent``; for ``beta = 2 sqrt(eps)``
    it is ``f + theta_equivalent * d**(2/3)``.
    """

    kind: str
    sigma_equivalent: Optional[float]
    epsilon_minimizer: Callable[[float], float]
    theta_equivalent: Optional[float] = None


def _linear_slope(tr: Transform) -> Optional[float]:
    if tr.kind == "identity":
        return 1.0
    if tr.kind == "linear":
        return tr.param
    return None


def reduced_form(cfg: PenaltyConfig) -> ReducedForm:
    """Describe how ``eps`` can be eliminated from ``cfg``."""
    kphi = _linear_slope(cfg.phi)
    kbeta = _linear_slope(cfg.beta)
    A = cfg.coef * (kphi or 0.0)
    if kphi is None or not cfg.unshifted or cfg.lam <= 0 or A <= 0:
        return ReducedForm("numeric", None, _no_closed_form)
    lam = cfg.lam
    if kbeta is not None:
        lb = lam * kbeta
        return ReducedForm("closed_form", 2.0 * math.sqrt(A * lb),
                           lambda d: d * math.sqrt(A / lb))
    if cfg.beta.kind == "sqrt_double":
        return ReducedForm("closed_form", None,
                           lambda d: (A * d * d / lam) ** (2.0 / 3.0),
                           theta_equivalent=3.0 * A ** (1.0 / 3.0) * lam ** (2.0 / 3.0))
    return ReducedForm("numeric", None, _no_closed_form)


def _no_closed_form(d):
    raise UnsupportedError("no closed-form eps minimizer; use reduced_penalty")


def epsilon_argmin(cfg: PenaltyConfig, d: float) -> float:
    """Minimizer in ``eps`` of ``f + a d**2 / eps + lam * eps`` (identity transforms, w = 0).

    With the default scaling this is ``lam**((alpha - 1) / 2) * d``.
    """
    if d < 0:
        raise InputError("violation must be nonnegative")
    if (cfg.phi.kind, cfg.beta.kind) != ("identity", "identity") or not cfg.unshifted:
        raise UnsupportedError("epsilon_argmin needs identity transforms and w = 0; "
                               "use reduced_penalty for the numeric path")
    if not cfg.lam > 0:
        raise UnsupportedError("epsilon_argmin needs lambda > 0")
    if d == 0:
        return 0.0
    return reduced_form(cfg).epsilon_minimizer(d)


def _minimize_eps(p, cfg, fval, c, w, eps_max, method="auto"):
    """``(eps, value)`` minimizing the penalty over ``eps`` in ``[0, eps_max]``."""
    feasible = not np.any(active_residuals(p, c))
    if method not in ("auto", "numeric", "closed_form"):
        raise InputError(f"unknown reduction method {method!r}")
    if method != "numeric":
        form = reduced_form(cfg)
        if form.kind == "closed_form":
            d = math.sqrt(float(np.sum(active_residuals(p, c) ** 2)))
            if d == 0:
                return 0.0, fval
            e = form.epsilon_minimizer(d)
            if 0 < e <= eps_max:
                return e, _value(p, cfg, fval, c, w, e)
        if method == "closed_form":
            raise UnsupportedError("closed form unavailable for this configuration or eps_max")
    e, v = _kernels.profile_min(fval, c, p.m, w, cfg.coef, cfg.lam, cfg.phi, cfg.beta,
                                EPS_LO, eps_max, N_GRID, REL_TOL)
    if feasible and fval <= v:
        return 0.0, fval
    return e, v


def reduced_penalty(p: Problem, cfg: PenaltyConfig, x, eps_max: float,
                    method: str = "auto") -> float:
    """Infimum of the smooth penalty over ``eps`` in ``(0, eps_max]``.

    ``method="auto"`` uses a closed form whenever one exists and its minimizer
    falls inside the bracket; ``"numeric"`` always runs the log-grid plus
    golden-section search; ``"closed_form"`` raises when none applies.  On
    feasible points the ``eps -> 0`` limit ``f(x)`` is included.
    """
    return minimize_eps(p, cfg, x, eps_max, method)[1]


def minimize_eps(p: Problem, cfg: PenaltyConfig, x, eps_max: float,
                 method: str = "auto") -> Tuple[float, float]:
    """Like :func:`reduced_penalty` but also returns the minimizing ``eps``."""
    if not eps_max > 0:
        raise InputError("eps_max must be positive")
    x = p.check_point(x)
    return _minimize_eps(p, cfg, p.f(x), p.constraints(x), cfg.shift(p), eps_max, method)


# --------------------------------------------------------------------------- nonsmooth

def distance_penalty(p: Problem, sigma: float, x, phi: Optional[Transform] = None,
                     exponent: float = 1.0) -> float:
    """``f(x) + sigma * phi(d(x)**2) ** (exponent / 2)`` with the euclidean violation ``d``."""
    if sigma < 0:
        raise InputError("sigma must be nonnegative")
    x = p.check_point(x)
    return _distance_value(p, sigma, p.f(x), p.constraints(x), phi or identity(), exponent)


def _distance_value(p, sigma, fval, c, phi, exponent):
    r = active_residuals(p, c)
    t = phi.value(float(np.dot(r, r)))
    if t == INF:
        return INF
    if sigma == 0:
        return fval
    return fval + sigma * t ** (exponent / 2.0)


def _distance_grad(p, sigma, gf, c, jac, phi, exponent):
    r = active_residuals(p, c)
    t = float(np.dot(r, r))
    if t == 0 or sigma == 0:
        return np.array(gf, dtype=float)
    pv = phi.value(t)
    scale = sigma * exponent * pv ** (exponent / 2.0 - 1.0) * phi.derivative(t)
    return gf + scale * (jac.T @ r)


def l1_penalty(p: Problem, nu: float, x) -> float:
    """``f(x) + nu * (sum |h_i(x)| + sum max(0, g_k(x)))``."""
    if nu < 0:
        raise InputError("nu must be nonnegative")
    x = p.check_point(x)
    return p.f(x) + nu * feasibility_residual(p, x, ViolationKind.L1)


def _l1_value(p, nu, fval, c):
    return fval + nu * float(np.sum(np.abs(active_residuals(p, c))))


def _l1_grad(p, nu, gf, c, jac):
    s = np.sign(active_residuals(p, c))
    return gf + nu * (jac.T @ s)
