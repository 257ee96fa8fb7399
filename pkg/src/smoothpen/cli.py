"""Command line front end.

Exit status: 0 success, 1 a checked relation failed, 2 configuration error,
3 solver failure.  Flags override values read from ``--config``.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import replace
from typing import List, Optional

import numpy as np

from . import reporting
from .config import (Config, LabSettings, OutputSettings, ProblemSpec, fmt_float, load_config,
                     parse_float, parse_floats)
from .errors import ConfigError, InputError, SmoothPenError, SolverError, UnsupportedError
from .penalty import Family, PenaltyConfig, _linear_slope, minimize_eps, reduced_form
from .transforms import parse_transform

EXIT_OK, EXIT_FAILED, EXIT_CONFIG, EXIT_SOLVER = 0, 1, 2, 3
GROUPS = ("square", "w_bounds", "l1_bounds", "beta", "nonexactness", "transforms")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH")
    common.add_argument("--problem", metavar="NAME[=params]",
                        help="registered benchmark, e.g. sphere=n=4 or 'sphere(n=4)'")
    common.add_argument("--lambda", dest="lam", metavar="VALUE",
                        help="penalty parameter (sigma/nu for the nonsmooth families)")
    common.add_argument("--w", metavar="LIST", help="shift vector, comma separated")
    common.add_argument("--alpha", metavar="VALUE")
    common.add_argument("--phi", metavar="NAME[:param]")
    common.add_argument("--beta", metavar="NAME[:param]")
    common.add_argument("--half-factor", action="store_true", default=None)
    common.add_argument("--seed", metavar="INT")
    common.add_argument("--multistart", metavar="INT")
    common.add_argument("--eps-max", metavar="VALUE")
    common.add_argument("--tol", metavar="VALUE", help="bisection tolerance")
    common.add_argument("--family", choices=("smooth", "distance", "l1"))
    common.add_argument("--exponent", metavar="VALUE", help="distance penalty exponent")
    common.add_argument("--bracket", metavar="LO,HI")
    common.add_argument("--json", metavar="PATH")
    common.add_argument("--csv", metavar="PATH")

    parser = argparse.ArgumentParser(prog="smoothpen",
                                     description="Smooth exact penalty functions toolkit")
    sub = parser.add_subparsers(dest="command", required=True)
    ev = sub.add_parser("eval", parents=[common], help="penalty value at one point")
    ev.add_argument("--x", required=True, metavar="LIST")
    ev.add_argument("--eps", default="0", metavar="VALUE")
    rd = sub.add_parser("reduce", parents=[common], help="minimum over eps, closed vs numeric")
    rd.add_argument("--x", required=True, metavar="LIST")
    sub.add_parser("solve", parents=[common], help="multistart penalized solve")
    sub.add_parser("estimate", parents=[common], help="estimate the exact penalty parameter")
    vf = sub.add_parser("verify", parents=[common], help="check one group of relations")
    vf.add_argument("group", nargs="?", choices=GROUPS,
                    help="relation group; defaults to [lab] group in the config")
    bn = sub.add_parser("bench", parents=[common], help="run the acceptance suite")
    bn.add_argument("--only", metavar="LIST", help="comma separated criterion numbers")
    return parser


def _resolve(args) -> Config:
    cfg = load_config(args.config) if args.config else Config()
    if args.problem:
        cfg = replace(cfg, problem=ProblemSpec.parse_benchmark(args.problem, "problem"))
    pen = cfg.penalty
    kw = {}
    if args.lam is not None:
        kw["lam"] = parse_float(args.lam, "lambda")
    if args.w is not None:
        kw["w"] = parse_floats(args.w, "w")
    if args.alpha is not None:
        kw["alpha"] = parse_float(args.alpha, "alpha")
    for key in ("phi", "beta"):
        val = getattr(args, key)
        if val is not None:
            try:
                kw[key] = parse_transform(val)
            except ConfigError as exc:
                raise ConfigError(str(exc), key) from None
    if args.half_factor:
        kw["half_factor"] = True
    try:
        pen = replace(pen, **kw)
    except InputError as exc:
        raise ConfigError(str(exc), "lambda" if "lambda" in str(exc) else "alpha") from None
    sol = cfg.solver
    skw = {}
    if args.seed is not None:
        skw["seed"] = _int(args.seed, "seed")
    if args.multistart is not None:
        skw["multistart"] = _int(args.multistart, "multistart")
    if args.eps_max is not None:
        skw["eps_max"] = parse_float(args.eps_max, "eps_max")
    try:
        sol = replace(sol, **skw)
    except InputError as exc:
        raise ConfigError(str(exc), next(iter(skw))) from None
    lab = cfg.lab
    lkw = {}
    if args.family is not None:
        lkw["family"] = args.family
    if args.exponent is not None:
        lkw["exponent"] = parse_float(args.exponent, "exponent")
    if args.tol is not None:
        lkw["tol"] = parse_float(args.tol, "tol")
    if args.bracket is not None:
        b = parse_floats(args.bracket, "bracket")
        if len(b) != 2:
            raise ConfigError("bracket needs two numbers", "bracket")
        lkw["bracket"] = b
    lab = replace(lab, **lkw) if lkw else lab
    out = OutputSettings(args.json or cfg.output.json, args.csv or cfg.output.csv)
    return Config(cfg.problem, pen, sol, lab, out)


def _int(text, key):
    try:
        return int(text)
    except ValueError:
        raise ConfigError(f"{key}: expected an integer, got {text!r}", key) from None


def _target(cfg: Config):
    if cfg.problem is None:
        raise ConfigError("no problem given; use --problem or a [problem] section", "problem")
    p, inst = cfg.problem.resolve()
    return p, inst


def _family(cfg: Config) -> Family:
    lab: LabSettings = cfg.lab
    pen = cfg.penalty
    if lab.family == "smooth":
        return Family("smooth", pen.phi, pen.beta, pen.w, pen.alpha, pen.half_factor)
    if lab.family == "distance":
        return Family("distance", phi=pen.phi, exponent=lab.exponent)
    return Family("l1")


def _penalty_dict(pen: PenaltyConfig) -> dict:
    return {"lambda": pen.lam, "alpha": pen.alpha, "w": list(pen.w), "phi": str(pen.phi),
            "beta": str(pen.beta), "half_factor": pen.half_factor}


def _problem_name(cfg, p):
    return cfg.problem.benchmark_text() if cfg.problem.benchmark else p.name


def _emit(cfg: Config, command: str, payload: dict, csv_rows=None, csv_fields=None,
          table: Optional[List[str]] = None):
    doc = reporting.envelope(command, payload)
    if cfg.output.json:
        reporting.write_text(cfg.output.json, reporting.dumps(doc))
    if cfg.output.csv and csv_rows is not None:
        reporting.write_text(cfg.output.csv, reporting.csv_text(csv_rows, csv_fields))
    for line in table or []:
        print(line)


def _table(rows, headers):
    cells = [[str(c) for c in r] for r in rows]
    widths = [max(len(h), *(len(r[i]) for r in cells)) if cells else len(h)
              for i, h in enumerate(headers)]
    line = "  ".join(h.ljust(w) for h, w in zip(headers, widths))
    out = [line, "  ".join("-" * w for w in widths)]
    out += ["  ".join(c.ljust(w) for c, w in zip(r, widths)) for r in cells]
    return out


def _g(v):
    return "-" if v is None else f"{v:.10g}"


# --------------------------------------------------------------------------- commands

def cmd_eval(cfg, args):
    from .penalty import distance_penalty, l1_penalty, smooth_penalty_eval

    p, _ = _target(cfg)
    x = np.array(parse_floats(args.x, "x"))
    eps = parse_float(args.eps, "eps")
    fam = cfg.lab.family
    try:
        if fam == "smooth":
            val = smooth_penalty_eval(p, cfg.penalty, x, eps)
        elif fam == "distance":
            val = distance_penalty(p, cfg.penalty.lam, x, cfg.penalty.phi, cfg.lab.exponent)
        else:
            val = l1_penalty(p, cfg.penalty.lam, x)
    except InputError as exc:
        raise ConfigError(str(exc), "x") from None
    payload = {"problem": _problem_name(cfg, p), "family": fam, "penalty": _penalty_dict(cfg.penalty),
               "x": list(x), "eps": eps, "value": val}
    _emit(cfg, "eval", payload, table=[f"value = {reporting.fmt17(val)}"])
    return EXIT_OK


def cmd_reduce(cfg, args):
    p, _ = _target(cfg)
    x = np.array(parse_floats(args.x, "x"))
    pen = cfg.penalty
    eps_max = cfg.solver.eps_max or 1e3
    try:
        e_num, v_num = minimize_eps(p, pen, x, eps_max, method="numeric")
    except InputError as exc:
        raise ConfigError(str(exc), "x") from None
    try:
        e_cf, v_cf = minimize_eps(p, pen, x, eps_max, method="closed_form")
    except UnsupportedError:
        e_cf = v_cf = None
    form = reduced_form(pen)
    diff = None if v_cf is None else abs(v_cf - v_num)
    payload = {"problem": _problem_name(cfg, p), "penalty": _penalty_dict(pen), "x": list(x),
               "eps_max": eps_max, "closed_form_value": v_cf, "closed_form_eps": e_cf,
               "numeric_value": v_num, "numeric_eps": e_num, "difference": diff,
               "sigma_equivalent": form.sigma_equivalent,
               "theta_equivalent": form.theta_equivalent}
    rows = [("closed form", _g(v_cf), _g(e_cf)), ("numeric", _g(v_num), _g(e_num))]
    _emit(cfg, "reduce", payload, table=_table(rows, ("route", "value", "eps"))
          + [f"difference = {_g(diff)}"])
    return EXIT_OK


def cmd_solve(cfg, args):
    from .solver import minimize_family

    p, inst = _target(cfg)
    fam = _family(cfg)
    rep = minimize_family(p, fam, cfg.penalty.lam, cfg.solver)
    payload = {"problem": _problem_name(cfg, p), "family": fam.label,
               "parameter": cfg.penalty.lam, "settings": _settings_dict(cfg.solver),
               "report": rep.to_dict()}
    rows = rep.trace_rows()
    table = [f"best value = {reporting.fmt17(rep.best_value)}",
             "best point = " + ", ".join(reporting.fmt17(v) for v in rep.best_point),
             f"status = {rep.status}  converged = {rep.converged}"]
    _emit(cfg, "solve", payload, rows, ("start", "iteration", "value", "step", "status"), table)
    return EXIT_OK


def _settings_dict(s):
    from dataclasses import asdict

    return asdict(s)


def cmd_estimate(cfg, args):
    from .lab import Relation, as_target, estimate_exact_parameter, relation_csv_rows

    p, inst = _target(cfg)
    fam = _family(cfg)
    t = as_target(inst if inst is not None else p, cfg.solver)
    rep = estimate_exact_parameter(fam, t, cfg.lab.bracket, cfg.lab.tol, cfg.solver)
    if t.oracle is not None:
        val = t.oracle(fam)
        if val is not None and math.isfinite(val):
            rep.relations.append(Relation.check(f"{fam.symbol}* vs analytic", rep.estimate, val,
                                                5.0 * rep.tol))
    payload = {"problem": _problem_name(cfg, p), "report": rep.to_dict()}
    table = [f"{fam.symbol}* estimate = {_g(rep.estimate)}  ({rep.status})",
             f"bracket = [{_g(rep.bracket[0])}, {_g(rep.bracket[1])}]  tol = {rep.tol:g}"]
    table += [f"{r.name}: {_g(r.lhs)} vs {_g(r.rhs)} -> {r.passed}" for r in rep.relations]
    _emit(cfg, "estimate", payload, relation_csv_rows(payload["problem"], fam.label,
                                                      rep.relations),
          reporting.RELATION_FIELDS, table)
    if rep.status == "indeterminate":
        return EXIT_SOLVER
    return EXIT_FAILED if any(r.passed is False for r in rep.relations) else EXIT_OK


def cmd_verify(cfg, args):
    from . import lab

    group = args.group or cfg.lab.group
    if group not in GROUPS:
        raise ConfigError(f"verify needs a group, one of {', '.join(GROUPS)}", "group")
    s = cfg.solver
    tol = cfg.lab.tol
    reports = []
    if group == "nonexactness":
        rows = lab.nonexactness_rows()
        name = "signsqrt / sphere(n=2)"
    else:
        p, inst = _target(cfg)
        t = lab.as_target(inst if inst is not None else p, s)
        name = _problem_name(cfg, p)
        if group == "square":
            rows, reports = lab.verify_square_relation(t, s, tol, alpha=cfg.penalty.alpha)
        elif group == "w_bounds":
            w = cfg.penalty.w
            if len(w) != 1:
                raise ConfigError("verify w_bounds needs a scalar --w", "w")
            rows, reports = lab.verify_w_bounds(t, w[0], s, tol)
        elif group == "l1_bounds":
            rows, reports = lab.verify_l1_bounds(t, s, tol)
        elif group == "beta":
            slope = _linear_slope(cfg.penalty.beta) or 2.0
            rows, reports = lab.verify_beta_reduction(t, s, tol, slope if slope != 1 else 2.0)
        else:
            rows, reports = lab.verify_transform_bounds(t, s, tol)
    payload = {"problem": name, "group": group,
               "relations": [r.to_dict() for r in rows],
               "estimates": [r.to_dict() for r in reports]}
    table = _table([(r.name, _g(r.lhs), r.op, _g(r.rhs), f"{r.tol:.3g}",
                     {True: "pass", False: "FAIL", None: "n/a"}[r.passed]) for r in rows],
                   ("relation", "lhs", "op", "rhs", "tol", "result"))
    _emit(cfg, "verify", payload, lab.relation_csv_rows(name, group, rows),
          reporting.RELATION_FIELDS, table)
    if any(r.status == "indeterminate" for r in reports):
        return EXIT_SOLVER
    return EXIT_FAILED if any(r.passed is False for r in rows) else EXIT_OK


def cmd_bench(cfg, args):
    from .acceptance import CRITERIA, run_criterion

    only = None
    if args.only:
        only = {int(v) for v in parse_floats(args.only, "only")}
    results = [run_criterion(k) for k in sorted(CRITERIA) if only is None or k in only]
    rows = [(r.number, r.title, "pass" if r.passed else "FAIL", f"{r.seconds:.1f}s")
            for r in results]
    table = _table(rows, ("#", "criterion", "result", "time"))
    table.append(f"{sum(r.passed for r in results)}/{len(results)} criteria passed")
    payload = {"results": [r.to_dict() for r in results]}
    csv_rows = [{"problem": "acceptance", "family": "", "relation": f"{r.number}: {r.title}",
                 "lhs": float(r.passed), "rhs": 1.0, "tol": 0.0, "pass": r.passed}
                for r in results]
    _emit(cfg, "bench", payload, csv_rows, reporting.RELATION_FIELDS, table)
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAILED


COMMANDS = {"eval": cmd_eval, "reduce": cmd_reduce, "solve": cmd_solve,
            "estimate": cmd_estimate, "verify": cmd_verify, "bench": cmd_bench}


def run(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        cfg = _resolve(args)
        return COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        key = f" [key: {exc.key}]" if exc.key else ""
        print(f"configuration error{key}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SolverError, UnsupportedError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except SmoothPenError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def main() -> None:
    sys.exit(run())


__all__ = ["run", "main", "build_parser", "fmt_float"]
