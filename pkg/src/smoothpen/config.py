"""Structured text configuration shared by the library and the CLI.

The file is line oriented::

    # comment
    [problem]
    benchmark = sphere(n=4)

    [penalty]
    lambda = 0.5
    w = -0.1
    phi = identity

Blank lines and ``#`` comments are ignored; keys are unique within a section
except ``equality`` and ``inequality``, which may repeat.  The full grammar is
in ``docs/config_format.md``.  Serializing a parsed :class:`Config` and
parsing it again yields an equal object.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, fields, replace
from typing import Dict, List, Optional, Tuple

import numpy as np

from .errors import ConfigError, InputError
from .penalty import PenaltyConfig
from .problem import Problem
from .solver import SolveSettings
from .transforms import parse_transform

SECTIONS = ("problem", "penalty", "solver", "lab", "output")
_REPEATABLE = {("problem", "equality"), ("problem", "inequality")}
_SECTION_RE = re.compile(r"^\[\s*([A-Za-z_]+)\s*\]$")
_CALL_RE = re.compile(r"^\s*([A-Za-z_][A-Za-z0-9_]*)\s*(?:\((.*)\))?\s*$")


# --------------------------------------------------------------------------- scalars

def fmt_float(v: float) -> str:
    """Shortest text that parses back to the same double."""
    v = float(v)
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return repr(v)


def parse_float(text: str, key: str) -> float:
    try:
        v = float(text.strip())
    except ValueError:
        raise ConfigError(f"{key}: expected a number, got {text.strip()!r}", key) from None
    if math.isnan(v):
        raise ConfigError(f"{key}: NaN is not allowed", key)
    return v


def parse_floats(text: str, key: str) -> Tuple[float, ...]:
    text = text.strip()
    if not text:
        return ()
    return tuple(parse_float(t, key) for t in text.split(","))


def fmt_floats(vals) -> str:
    return ", ".join(fmt_float(v) for v in vals)


def parse_int(text: str, key: str) -> int:
    try:
        return int(text.strip())
    except ValueError:
        raise ConfigError(f"{key}: expected an integer, got {text.strip()!r}", key) from None


def parse_bool(text: str, key: str) -> bool:
    t = text.strip().lower()
    if t in ("true", "yes", "1", "on"):
        return True
    if t in ("false", "no", "0", "off"):
        return False
    raise ConfigError(f"{key}: expected true or false, got {text.strip()!r}", key)


def parse_call(text: str, key: str) -> Tuple[str, str]:
    """Split ``name(args)`` into ``(name, args)``; args may be empty."""
    m = _CALL_RE.match(text)
    if not m:
        raise ConfigError(f"{key}: cannot parse {text.strip()!r}", key)
    return m.group(1), (m.group(2) or "").strip()


# --------------------------------------------------------------------------- expressions

_EXPR_KEYS = {
    "affine": ("a", "b"),
    "quadratic": ("Q", "a", "b"),
    "piecewise": ("c",),
    "signsqrt": (),
}


@dataclass(frozen=True)
class Expr:
    """A catalog expression ``kind(key=v, v, ...; key=...)``.

    affine      ``a . x + b``
    quadratic   ``x' Q x + a . x + b`` with ``Q`` row-major ``n*n``
    piecewise   the one-dimensional piecewise objective with parameter ``c``
    signsqrt    ``-sign(x) sqrt|x|`` (one-dimensional)
    """

    kind: str
    coeffs: Tuple[Tuple[str, Tuple[float, ...]], ...] = ()

    def get(self, name, default=None):
        return dict(self.coeffs).get(name, default)

    @classmethod
    def parse(cls, text: str, key: str) -> "Expr":
        kind, args = parse_call(text, key)
        if kind not in _EXPR_KEYS:
            raise ConfigError(f"{key}: unknown expression {kind!r}; known: {sorted(_EXPR_KEYS)}",
                              key)
        coeffs = []
        for part in filter(None, (s.strip() for s in args.split(";"))):
            if "=" not in part:
                raise ConfigError(f"{key}: expected name=values in {part!r}", key)
            name, vals = (s.strip() for s in part.split("=", 1))
            if name not in _EXPR_KEYS[kind]:
                raise ConfigError(f"{key}: {kind} has no coefficient {name!r}", key)
            coeffs.append((name, parse_floats(vals, key)))
        order = {k: i for i, k in enumerate(_EXPR_KEYS[kind])}
        return cls(kind, tuple(sorted(coeffs, key=lambda kv: order[kv[0]])))

    def __str__(self) -> str:
        inner = "; ".join(f"{k}={fmt_floats(v)}" for k, v in self.coeffs)
        return f"{self.kind}({inner})"

    def build(self, n: int, key: str):
        """Return ``(func, grad)`` for dimension ``n``."""
        if self.kind == "affine":
            a = np.asarray(self.get("a", (0.0,) * n), float)
            b = self._scalar("b", key)
            if a.size != n:
                raise ConfigError(f"{key}: affine needs {n} coefficients in a", key)
            return (lambda x: float(np.dot(a, x)) + b), (lambda x: a.copy())
        if self.kind == "quadratic":
            Q = np.asarray(self.get("Q", (0.0,) * n * n), float)
            a = np.asarray(self.get("a", (0.0,) * n), float)
            b = self._scalar("b", key)
            if Q.size != n * n or a.size != n:
                raise ConfigError(f"{key}: quadratic needs Q of {n * n} and a of {n} entries",
                                  key)
            Q = Q.reshape(n, n)
            S = Q + Q.T
            return ((lambda x: float(x @ Q @ x + a @ x) + b),
                    (lambda x: S @ np.asarray(x, float) + a))
        if n != 1:
            raise ConfigError(f"{key}: {self.kind} is one-dimensional", key)
        if self.kind == "piecewise":
            from .benchmarks import piecewise_objective

            return piecewise_objective(self._scalar("c", key))
        from .benchmarks import _signsqrt, _signsqrt_grad

        return _signsqrt, _signsqrt_grad

    def _scalar(self, name, key):
        v = self.get(name, (0.0,))
        if len(v) != 1:
            raise ConfigError(f"{key}: coefficient {name} must be a single number", key)
        return float(v[0])


# --------------------------------------------------------------------------- problem spec

@dataclass(frozen=True)
class ProblemSpec:
    """Either a registered benchmark with parameters or an explicit catalog problem."""

    benchmark: Optional[str] = None
    params: Dict[str, float] = field(default_factory=dict)
    dimension: Optional[int] = None
    lower: Optional[Tuple[float, ...]] = None
    upper: Optional[Tuple[float, ...]] = None
    objective: Optional[Expr] = None
    equalities: Tuple[Expr, ...] = ()
    inequalities: Tuple[Expr, ...] = ()
    name: Optional[str] = None

    def __hash__(self):
        return hash((self.benchmark, tuple(sorted(self.params.items())), self.dimension))

    @classmethod
    def parse_benchmark(cls, text: str, key: str = "benchmark") -> "ProblemSpec":
        """``name`` or ``name(k=v, ...)``; also accepts the CLI form ``name=k=v,...``."""
        text = text.strip()
        if "(" not in text and "=" in text:
            name, rest = text.split("=", 1)
            text = f"{name}({rest})"
        name, args = parse_call(text, key)
        params = {}
        for part in filter(None, (s.strip() for s in args.split(","))):
            if "=" not in part:
                raise ConfigError(f"{key}: expected k=v in {part!r}", key)
            k, v = (s.strip() for s in part.split("=", 1))
            params[k] = _param_value(v, key)
        return cls(benchmark=name, params=params)

    def benchmark_text(self) -> str:
        inner = ", ".join(f"{k}={_fmt_param(v)}" for k, v in self.params.items())
        return f"{self.benchmark}({inner})" if inner else self.benchmark

    def build(self) -> Problem:
        return self.resolve()[0]

    def resolve(self):
        """``(problem, benchmark_instance_or_None)``."""
        if self.benchmark is not None:
            from .benchmarks import get_benchmark

            inst = get_benchmark(self.benchmark, **self.params)
            return inst.problem, inst
        if self.dimension is None or self.objective is None:
            raise ConfigError("problem needs either benchmark or dimension and objective",
                              "dimension" if self.dimension is None else "objective")
        n = self.dimension
        f, df = self.objective.build(n, "objective")
        eq = [e.build(n, "equality") for e in self.equalities]
        ineq = [e.build(n, "inequality") for e in self.inequalities]
        for key, bound in (("lower", self.lower), ("upper", self.upper)):
            if bound is not None and len(bound) not in (1, n):
                raise ConfigError(f"{key} must have 1 or {n} entries", key)
        lo = None if self.lower is None else np.broadcast_to(np.array(self.lower), (n,)).copy()
        up = None if self.upper is None else np.broadcast_to(np.array(self.upper), (n,)).copy()
        p = Problem(n, f, [e[0] for e in eq], [g[0] for g in ineq], df,
                    [e[1] for e in eq], [g[1] for g in ineq], lo, up,
                    name=self.name or "custom", spec=self)
        return p, None


def _param_value(text, key):
    t = text.strip().lower()
    if t == "none":
        return None
    v = parse_float(t, key)
    return int(v) if v.is_integer() and "." not in t and "e" not in t else v


def _fmt_param(v):
    if v is None:
        return "none"
    if isinstance(v, int):
        return str(v)
    return fmt_float(v)


# --------------------------------------------------------------------------- sections

@dataclass(frozen=True)
class OutputSettings:
    json: Optional[str] = None
    csv: Optional[str] = None


@dataclass(frozen=True)
class LabSettings:
    """Defaults for ``estimate`` and ``verify``.

    ``family`` is smooth, distance or l1; ``bracket`` is the initial
    bisection interval, widened upward when needed.
    """

    family: str = "smooth"
    exponent: float = 1.0
    bracket: Tuple[float, float] = (0.0, 1.0)
    tol: float = 1e-3
    group: Optional[str] = None

    def __post_init__(self):
        if self.family not in ("smooth", "distance", "l1"):
            raise ConfigError(f"family must be smooth, distance or l1, not {self.family!r}",
                              "family")
        lo, hi = self.bracket
        if not (0 <= lo < hi):
            raise ConfigError("bracket must satisfy 0 <= lo < hi", "bracket")
        if not self.tol > 0:
            raise ConfigError("tol must be positive", "tol")


@dataclass(frozen=True)
class Config:
    problem: Optional[ProblemSpec] = None
    penalty: PenaltyConfig = field(default_factory=lambda: PenaltyConfig(1.0))
    solver: SolveSettings = field(default_factory=SolveSettings)
    lab: LabSettings = field(default_factory=LabSettings)
    output: OutputSettings = field(default_factory=OutputSettings)


def parse_sections(text: str) -> Dict[str, List[Tuple[str, str]]]:
    """Raw ``{section: [(key, value), ...]}`` with duplicate checks."""
    out: Dict[str, List[Tuple[str, str]]] = {}
    section = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _SECTION_RE.match(line)
        if m:
            section = m.group(1).lower()
            if section not in SECTIONS:
                raise ConfigError(f"line {lineno}: unknown section [{section}]", section)
            out.setdefault(section, [])
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value", line)
        key, value = (s.strip() for s in line.split("=", 1))
        if section is None:
            raise ConfigError(f"line {lineno}: key {key!r} outside any section", key)
        if (section, key) not in _REPEATABLE and any(k == key for k, _ in out[section]):
            raise ConfigError(f"line {lineno}: duplicate key {key!r} in [{section}]", key)
        out[section].append((key, value))
    return out


def _check_keys(section, items, allowed):
    for k, _ in items:
        if k not in allowed:
            raise ConfigError(f"unknown key {k!r} in [{section}]", k)


def _problem_from(items) -> ProblemSpec:
    _check_keys("problem", items, ("benchmark", "name", "dimension", "lower", "upper",
                                   "objective", "equality", "inequality"))
    d = dict(items)
    if "benchmark" in d:
        extra = set(d) - {"benchmark"}
        if extra:
            key = sorted(extra)[0]
            raise ConfigError(f"{key} cannot be combined with benchmark", key)
        return ProblemSpec.parse_benchmark(d["benchmark"])
    if "dimension" not in d:
        raise ConfigError("problem needs benchmark or dimension", "dimension")
    if "objective" not in d:
        raise ConfigError("problem needs an objective", "objective")
    n = parse_int(d["dimension"], "dimension")
    if n < 1:
        raise ConfigError("dimension must be positive", "dimension")
    return ProblemSpec(
        dimension=n,
        lower=parse_floats(d["lower"], "lower") if "lower" in d else None,
        upper=parse_floats(d["upper"], "upper") if "upper" in d else None,
        objective=Expr.parse(d["objective"], "objective"),
        equalities=tuple(Expr.parse(v, "equality") for k, v in items if k == "equality"),
        inequalities=tuple(Expr.parse(v, "inequality") for k, v in items if k == "inequality"),
        name=d.get("name"),
    )


def _problem_to(spec: ProblemSpec) -> List[Tuple[str, str]]:
    if spec.benchmark is not None:
        return [("benchmark", spec.benchmark_text())]
    rows = []
    if spec.name is not None:
        rows.append(("name", spec.name))
    rows.append(("dimension", str(spec.dimension)))
    if spec.lower is not None:
        rows.append(("lower", fmt_floats(spec.lower)))
    if spec.upper is not None:
        rows.append(("upper", fmt_floats(spec.upper)))
    rows.append(("objective", str(spec.objective)))
    rows += [("equality", str(e)) for e in spec.equalities]
    rows += [("inequality", str(e)) for e in spec.inequalities]
    return rows


def penalty_from_items(items, base: Optional[PenaltyConfig] = None) -> PenaltyConfig:
    _check_keys("penalty", items, ("lambda", "alpha", "w", "phi", "beta", "half_factor"))
    d = dict(items)
    cfg = base or PenaltyConfig(1.0)
    kw = {}
    if "lambda" in d:
        kw["lam"] = parse_float(d["lambda"], "lambda")
    if "alpha" in d:
        kw["alpha"] = parse_float(d["alpha"], "alpha")
    if "w" in d:
        kw["w"] = parse_floats(d["w"], "w")
    for key in ("phi", "beta"):
        if key in d:
            try:
                kw[key] = parse_transform(d[key])
            except ConfigError as exc:
                raise ConfigError(f"{key}: {exc}", key) from None
    if "half_factor" in d:
        kw["half_factor"] = parse_bool(d["half_factor"], "half_factor")
    try:
        return replace(cfg, **kw)
    except InputError as exc:
        key = "lambda" if "lambda" in str(exc) else "alpha"
        raise ConfigError(str(exc), key) from None


def penalty_to_items(cfg: PenaltyConfig) -> List[Tuple[str, str]]:
    for tr in (cfg.phi, cfg.beta):
        if tr.kind == "custom":
            raise ConfigError("custom transforms cannot be serialized", "phi")
    return [("lambda", fmt_float(cfg.lam)), ("alpha", fmt_float(cfg.alpha)),
            ("w", fmt_floats(cfg.w)), ("phi", str(cfg.phi)), ("beta", str(cfg.beta)),
            ("half_factor", "true" if cfg.half_factor else "false")]


_SOLVER_INT = ("max_iterations", "multistart", "seed", "stall_iterations")
_SOLVER_FLOAT = ("armijo_c", "shrink", "initial_step", "tolerance")


def solver_from_items(items, base: Optional[SolveSettings] = None) -> SolveSettings:
    allowed = _SOLVER_INT + _SOLVER_FLOAT + ("eps_max", "record_trace")
    _check_keys("solver", items, allowed)
    kw = {}
    for k, v in items:
        if k in _SOLVER_INT:
            kw[k] = parse_int(v, k)
        elif k in _SOLVER_FLOAT:
            kw[k] = parse_float(v, k)
        elif k == "eps_max":
            kw[k] = None if v.strip().lower() == "auto" else parse_float(v, k)
        else:
            kw[k] = parse_bool(v, k)
    try:
        return replace(base or SolveSettings(), **kw)
    except InputError as exc:
        key = next((k for k in kw if k in str(exc)), next(iter(kw), "solver"))
        raise ConfigError(str(exc), key) from None


def solver_to_items(s: SolveSettings) -> List[Tuple[str, str]]:
    rows = []
    for f in fields(s):
        v = getattr(s, f.name)
        if f.name == "eps_max":
            rows.append((f.name, "auto" if v is None else fmt_float(v)))
        elif isinstance(v, bool):
            rows.append((f.name, "true" if v else "false"))
        elif isinstance(v, int):
            rows.append((f.name, str(v)))
        else:
            rows.append((f.name, fmt_float(v)))
    return rows


def lab_from_items(items, base: Optional[LabSettings] = None) -> LabSettings:
    _check_keys("lab", items, ("family", "exponent", "bracket", "tol", "group"))
    kw = {}
    for k, v in items:
        if k == "bracket":
            b = parse_floats(v, k)
            if len(b) != 2:
                raise ConfigError("bracket needs two numbers", k)
            kw[k] = b
        elif k in ("exponent", "tol"):
            kw[k] = parse_float(v, k)
        else:
            kw[k] = v.strip()
    return replace(base or LabSettings(), **kw)


def lab_to_items(s: LabSettings) -> List[Tuple[str, str]]:
    rows = [("family", s.family), ("exponent", fmt_float(s.exponent)),
            ("bracket", fmt_floats(s.bracket)), ("tol", fmt_float(s.tol))]
    if s.group is not None:
        rows.append(("group", s.group))
    return rows


def output_from_items(items) -> OutputSettings:
    _check_keys("output", items, ("json", "csv"))
    d = dict(items)
    return OutputSettings(d.get("json"), d.get("csv"))


def parse_config(text: str) -> Config:
    """Parse configuration text into a :class:`Config`."""
    sec = parse_sections(text)
    cfg = Config()
    if "problem" in sec:
        cfg = replace(cfg, problem=_problem_from(sec["problem"]))
    if "penalty" in sec:
        cfg = replace(cfg, penalty=penalty_from_items(sec["penalty"]))
    if "solver" in sec:
        cfg = replace(cfg, solver=solver_from_items(sec["solver"]))
    if "lab" in sec:
        cfg = replace(cfg, lab=lab_from_items(sec["lab"]))
    if "output" in sec:
        cfg = replace(cfg, output=output_from_items(sec["output"]))
    return cfg


def load_config(path) -> Config:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}", "config") from None
    return parse_config(text)


def serialize_config(cfg: Config) -> str:
    """Inverse of :func:`parse_config`."""
    blocks = []
    if cfg.problem is not None:
        blocks.append(("problem", _problem_to(cfg.problem)))
    blocks.append(("penalty", penalty_to_items(cfg.penalty)))
    blocks.append(("solver", solver_to_items(cfg.solver)))
    blocks.append(("lab", lab_to_items(cfg.lab)))
    out = [(k, v) for k, v in (("json", cfg.output.json), ("csv", cfg.output.csv))
           if v is not None]
    if out:
        blocks.append(("output", out))
    lines = []
    for name, rows in blocks:
        lines.append(f"[{name}]")
        lines += [f"{k} = {v}" for k, v in rows]
        lines.append("")
    return "\n".join(lines)
