"""Worked example problems with analytically known exact penalty parameters.

Each :class:`BenchmarkInstance` carries the known minimizer, the optimal value
and an oracle mapping a penalty :class:`~smoothpen.penalty.Family` to its
exact penalty parameter.  The oracle returns ``math.inf`` (:data:`NOT_EXACT`)
when the family is never exact and ``None`` when no closed form is known.

Registered problems
-------------------
sphere(n, half_width=1.5)
    ``min sum(x)`` s.t. ``|x|^2 <= 1``.  ``x* = -1/sqrt(n) * ones``,
    ``f* = -sqrt(n)``, ``sigma* = sqrt(n)/2``.  The box ``[-half_width,
    half_width]^n`` leaves every threshold unchanged as long as the
    near-threshold minimizers ``-1/(2 sigma) * ones`` stay inside, which holds
    for ``half_width >= 1``.  Pass ``half_width=None`` for the whole space.
piecewise(c)
    One-dimensional, ``Phi(x) = [x, inf)`` (i.e. ``x <= 0``), with the
    continuously differentiable piecewise objective below.  ``x* = 0``,
    ``f* = 0``, ``sigma* = c + 1`` and ``sigma*(t/(1-t)) = 1``.  Unbounded box.
signsqrt(half_width=1)
    ``f(x) = -sign(x) sqrt|x|``, equality ``x = 0``.  Exact under
    ``phi = sqrt(t)`` with ``w = 0`` (``lambda* = 1/4``), never exact for
    ``w > 0`` nor with ``phi = identity``.
two_constraint
    ``min -x1 - 2 x2`` s.t. ``x1 = 0``, ``x2 <= 0`` on ``[-2, 2]^2``.
    ``sigma* = sqrt(5)``, ``nu* = 2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional

import numpy as np

from .errors import ConfigError
from .penalty import Family, _linear_slope
from .problem import Problem

NOT_EXACT = math.inf


@dataclass
class BenchmarkInstance:
    name: str
    problem: Problem
    x_star: np.ndarray
    f_star: float
    oracle: Callable[[Family], Optional[float]] = field(repr=False)
    params: Dict[str, float] = field(default_factory=dict)


def _smooth_from_sigma(fam: Family, sigma_phi: Optional[float]) -> Optional[float]:
    """lambda* of an unshifted smooth family with linear beta, from sigma*(phi).

    Minimizing out eps turns ``a phi(d^2)/eps + k lam eps`` into
    ``2 sqrt(a k lam phi(d^2))`` with ``a = lam**alpha / h``, so the smooth
    family is exact exactly when ``2 sqrt(k/h) lam**((alpha+1)/2) >= sigma*(phi)``.
    """
    kb = _linear_slope(fam.beta)
    if sigma_phi is None or kb is None or not fam.unshifted:
        return None
    if sigma_phi == NOT_EXACT:
        return NOT_EXACT
    h = 2.0 if fam.half_factor else 1.0
    return (sigma_phi / (2.0 * math.sqrt(kb / h))) ** (2.0 / (fam.alpha + 1.0))


def _scalar_shift(fam: Family) -> Optional[float]:
    if not fam.w:
        return 0.0
    if len(set(fam.w)) == 1:
        return fam.w[0]
    return None


# --------------------------------------------------------------------------- sphere

def sphere(n: int = 2, half_width: Optional[float] = 1.5) -> BenchmarkInstance:
    n = int(n)
    box = None if half_width is None else np.full(n, float(half_width))
    p = Problem(
        n,
        objective=lambda x: float(np.sum(x)),
        objective_gradient=lambda x: np.ones(n),
        inequalities=[lambda x: float(np.dot(x, x)) - 1.0],
        inequality_gradients=[lambda x: 2.0 * np.asarray(x, float)],
        lower=None if box is None else -box,
        upper=box,
        name=f"sphere(n={n})",
    )
    sigma = math.sqrt(n) / 2.0

    def sigma_phi(phi):
        k = _linear_slope(phi)
        return None if k is None else sigma / math.sqrt(k)

    def oracle(fam: Family):
        if fam.kind == "l1":
            return sigma
        if fam.kind == "distance":
            return sigma_phi(fam.phi) if fam.exponent == 1 else None
        if fam.phi.kind == "power" and fam.phi.param > 1:
            return NOT_EXACT
        w = _scalar_shift(fam)
        if w is None:
            return None
        if w == 0:
            return _smooth_from_sigma(fam, sigma_phi(fam.phi))
        plain = (fam.phi.kind, fam.beta.kind) == ("identity", "identity")
        if not plain or fam.alpha != 0 or fam.half_factor:
            return None
        if w < 0:
            return max(0.0, n / 16.0 - abs(w) * math.sqrt(n) / 2.0)
        return n / 16.0 + w * math.sqrt(n) / 2.0

    x_star = np.full(n, -1.0 / math.sqrt(n))
    inst = BenchmarkInstance(p.name, p, x_star, -math.sqrt(n), oracle,
                             {"n": n, "half_width": half_width})
    return inst


# --------------------------------------------------------------------------- piecewise

def piecewise_objective(c: float):
    def f(x):
        t = float(x[0])
        if t <= 1.0:
            return -t
        if t < c + 1.0:
            return -0.5 * t * t - 0.5
        return -(c + 1.0) * t + 0.5 * c * c + c

    def df(x):
        t = float(x[0])
        if t <= 1.0:
            return np.array([-1.0])
        if t < c + 1.0:
            return np.array([-t])
        return np.array([-(c + 1.0)])

    return f, df


def piecewise(c: float = 0.0, half_width: Optional[float] = None) -> BenchmarkInstance:
    c = float(c)
    if c < 0:
        raise ConfigError("piecewise needs c >= 0", "c")
    f, df = piecewise_objective(c)
    box = None if half_width is None else np.array([float(half_width)])
    p = Problem(
        1, f, objective_gradient=df,
        inequalities=[lambda x: float(x[0])],
        inequality_gradients=[lambda x: np.array([1.0])],
        lower=None if box is None else -box, upper=box,
        name=f"piecewise(c={c:g})",
    )

    def sigma_phi(phi):
        k = _linear_slope(phi)
        if k is not None:
            return (c + 1.0) / math.sqrt(k)
        if phi.kind == "rational_barrier":
            return 1.0
        return None

    def oracle(fam: Family):
        if fam.kind == "l1":
            return c + 1.0
        if fam.kind == "distance":
            return sigma_phi(fam.phi) if fam.exponent == 1 else None
        return _smooth_from_sigma(fam, sigma_phi(fam.phi))

    return BenchmarkInstance(p.name, p, np.zeros(1), 0.0, oracle,
                             {"c": c, "half_width": half_width})


# --------------------------------------------------------------------------- signsqrt

def _signsqrt(x):
    t = float(x[0])
    return -math.copysign(math.sqrt(abs(t)), t) if t != 0 else 0.0


def _signsqrt_grad(x):
    t = float(x[0])
    if t == 0:
        return np.array([-math.inf])
    return np.array([-0.5 / math.sqrt(abs(t))])


def signsqrt(half_width: Optional[float] = 1.0) -> BenchmarkInstance:
    box = None if half_width is None else np.array([float(half_width)])
    p = Problem(
        1, _signsqrt, objective_gradient=_signsqrt_grad,
        equalities=[lambda x: float(x[0])],
        equality_gradients=[lambda x: np.array([1.0])],
        lower=None if box is None else -box, upper=box,
        name="signsqrt",
    )

    def sigma_phi(phi):
        if phi.kind == "power" and phi.param == 0.5:
            return 1.0
        if _linear_slope(phi) is not None:
            return NOT_EXACT
        return None

    def oracle(fam: Family):
        if fam.kind == "l1":
            return NOT_EXACT
        if fam.kind == "distance":
            return sigma_phi(fam.phi) if fam.exponent == 1 else None
        w = _scalar_shift(fam)
        if w is not None and w > 0:
            return NOT_EXACT
        return _smooth_from_sigma(fam, sigma_phi(fam.phi))

    return BenchmarkInstance(p.name, p, np.zeros(1), 0.0, oracle, {"half_width": half_width})


# --------------------------------------------------------------------------- two constraints

def two_constraint() -> BenchmarkInstance:
    p = Problem(
        2,
        objective=lambda x: -float(x[0]) - 2.0 * float(x[1]),
        objective_gradient=lambda x: np.array([-1.0, -2.0]),
        equalities=[lambda x: float(x[0])],
        equality_gradients=[lambda x: np.array([1.0, 0.0])],
        inequalities=[lambda x: float(x[1])],
        inequality_gradients=[lambda x: np.array([0.0, 1.0])],
        lower=np.full(2, -2.0), upper=np.full(2, 2.0),
        name="two_constraint",
    )
    sigma = math.sqrt(5.0)

    def oracle(fam: Family):
        if fam.kind == "l1":
            return 2.0
        if fam.kind == "distance":
            k = _linear_slope(fam.phi)
            return sigma / math.sqrt(k) if k is not None and fam.exponent == 1 else None
        k = _linear_slope(fam.phi)
        return _smooth_from_sigma(fam, None if k is None else sigma / math.sqrt(k))

    return BenchmarkInstance(p.name, p, np.zeros(2), 0.0, oracle)


_FACTORIES = {
    "sphere": sphere,
    "piecewise": piecewise,
    "signsqrt": signsqrt,
    "two_constraint": two_constraint,
}


def get_benchmark(name: str, **params) -> BenchmarkInstance:
    """Build a registered benchmark by name, e.g. ``get_benchmark("sphere", n=4)``."""
    try:
        factory = _FACTORIES[name]
    except KeyError:
        raise ConfigError(f"unknown benchmark {name!r}; known: {sorted(_FACTORIES)}",
                          "benchmark") from None
    try:
        inst = factory(**params)
    except TypeError as exc:
        raise ConfigError(f"bad parameters for benchmark {name}: {exc}", "benchmark") from None
    from .config import ProblemSpec

    clean = {k: v for k, v in params.items() if v is not None}
    inst.problem.spec = ProblemSpec(benchmark=name, params=clean)
    return inst


def benchmark_registry() -> List[BenchmarkInstance]:
    """The worked examples at the parameter values used by the test suite."""
    return [
        get_benchmark("sphere", n=1),
        get_benchmark("sphere", n=2),
        get_benchmark("sphere", n=4),
        get_benchmark("piecewise", c=0.0),
        get_benchmark("piecewise", c=1.0),
        get_benchmark("piecewise", c=3.0),
        get_benchmark("signsqrt"),
        get_benchmark("two_constraint"),
    ]
