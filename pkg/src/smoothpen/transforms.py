"""Scalar monotone transforms used inside the penalty terms.

A :class:`Transform` reshapes either the squared constraint violation (the
``phi`` slot of a penalty) or the auxiliary variable ``eps`` (the ``beta``
slot).  All transforms satisfy ``value(0) == 0``, are nondecreasing and
strictly positive on the interior of their domain.

The registered kinds map to small integer codes so the compiled kernels can
evaluate them without calling back into Python.  ``custom`` transforms carry
arbitrary callables and force the pure-Python kernel path.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Callable, Optional

from .errors import ConfigError, DomainError, InputError

INF = math.inf

# codes shared with the kernels (keep in sync with _kernels/_ckernels.pyx)
IDENTITY, LINEAR, RATIONAL_BARRIER, POWER, SQRT_DOUBLE = 0, 1, 2, 3, 4

_KINDS = {
    "identity": IDENTITY,
    "linear": LINEAR,
    "rational_barrier": RATIONAL_BARRIER,
    "power": POWER,
    "sqrt_double": SQRT_DOUBLE,
}


@dataclass(frozen=True)
class Transform:
    """A nondecreasing map ``t -> value(t)`` on ``[0, domain_sup)``.

    Use the module-level constructors (:func:`identity`, :func:`linear`, ...)
    rather than building instances directly.
    """

    kind: str
    param: float = 1.0
    func: Optional[Callable[[float], float]] = field(default=None, compare=False)
    dfunc: Optional[Callable[[float], float]] = field(default=None, compare=False)
    rd0: Optional[float] = None
    sup: float = INF

    @property
    def code(self) -> Optional[int]:
        return _KINDS.get(self.kind)

    @property
    def domain_sup(self) -> float:
        if self.kind == "rational_barrier":
            return 1.0
        return self.sup

    @property
    def right_derivative_at_0(self) -> Optional[float]:
        """Right derivative at zero; ``inf`` when unbounded, ``None`` if unknown."""
        k, p = self.kind, self.param
        if k in ("identity", "rational_barrier"):
            return 1.0
        if k == "linear":
            return p
        if k == "power":
            return INF if p < 1 else (1.0 if p == 1 else 0.0)
        if k == "sqrt_double":
            return INF
        return self.rd0

    def value(self, t: float) -> float:
        if t >= self.domain_sup:
            return INF
        k, p = self.kind, self.param
        if k == "identity":
            return t
        if k == "linear":
            return p * t
        if k == "rational_barrier":
            return t / (1.0 - t)
        if k == "power":
            return t**p if t > 0 else 0.0
        if k == "sqrt_double":
            return 2.0 * math.sqrt(t)
        return float(self.func(t))

    def derivative(self, t: float) -> float:
        """Derivative at ``t``; raises :class:`DomainError` where it does not exist."""
        if t >= self.domain_sup:
            raise DomainError(f"{self} evaluated at t={t} outside its domain")
        k, p = self.kind, self.param
        if k == "identity":
            return 1.0
        if k == "linear":
            return p
        if k == "rational_barrier":
            return 1.0 / (1.0 - t) ** 2
        if k == "power":
            if t > 0:
                return p * t ** (p - 1.0)
            if p < 1:
                raise DomainError(f"{self} is not differentiable at 0")
            return 1.0 if p == 1 else 0.0
        if k == "sqrt_double":
            if t <= 0:
                raise DomainError("sqrt_double is not differentiable at 0")
            return 1.0 / math.sqrt(t)
        if self.dfunc is not None:
            return float(self.dfunc(t))
        h = max(1e-7, 1e-7 * abs(t))
        lo = max(t - h, 0.0)
        return (self.value(t + h) - self.value(lo)) / (t + h - lo)

    def is_convex(self) -> Optional[bool]:
        k, p = self.kind, self.param
        if k in ("identity", "linear", "rational_barrier"):
            return True
        if k == "power":
            return p >= 1
        if k == "sqrt_double":
            return False
        return None

    def __str__(self) -> str:
        if self.kind in ("linear", "power"):
            return f"{self.kind}({self.param!r})"
        return self.kind


def identity() -> Transform:
    return Transform("identity")


def linear(slope: float) -> Transform:
    if not slope > 0:
        raise InputError(f"linear transform needs a positive slope, got {slope}")
    return Transform("linear", float(slope))


def rational_barrier() -> Transform:
    """``t / (1 - t)`` on ``[0, 1)`` and ``+inf`` beyond."""
    return Transform("rational_barrier")


def power(exponent: float) -> Transform:
    if not exponent > 0:
        raise InputError(f"power transform needs a positive exponent, got {exponent}")
    return Transform("power", float(exponent))


def sqrt_double() -> Transform:
    """``t -> 2 sqrt(t)``."""
    return Transform("sqrt_double")


def custom(func, right_derivative_at_0=None, domain_sup=INF, derivative=None):
    """Wrap an arbitrary nondecreasing callable with ``func(0) == 0``."""
    if func(0.0) != 0:
        raise InputError("custom transform must vanish at 0")
    return Transform("custom", 1.0, func, derivative, right_derivative_at_0, float(domain_sup))


_SPEC_RE = re.compile(r"^\s*([a-z_]+)\s*(?:[(:]\s*([^)]*?)\s*\)?)?\s*$")


def parse_transform(text: str) -> Transform:
    """Parse ``name``, ``name(param)`` or ``name:param``.

    >>> str(parse_transform("power:1.5"))
    'power(1.5)'
    """
    m = _SPEC_RE.match(text)
    if not m or m.group(1) not in _KINDS:
        raise ConfigError(f"unknown transform {text!r}; expected one of {sorted(_KINDS)}")
    name, arg = m.group(1), m.group(2)
    if name in ("linear", "power"):
        if not arg:
            raise ConfigError(f"transform {name} needs a parameter")
        try:
            value = float(arg)
        except ValueError:
            raise ConfigError(f"bad transform parameter {arg!r}") from None
        try:
            return linear(value) if name == "linear" else power(value)
        except InputError as exc:
            raise ConfigError(str(exc)) from None
    if arg:
        raise ConfigError(f"transform {name} takes no parameter")
    return {"identity": identity, "rational_barrier": rational_barrier,
            "sqrt_double": sqrt_double}[name]()
