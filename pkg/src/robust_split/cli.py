"""Command-line interface: ``robust-split <command> --problem FILE [options]``.

Exit codes: 0 success, 1 failed assertion or numerical failure, 2 usage or
schema error.  ``--problem builtin:NAME`` loads a built-in instance.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

import numpy as np

from .certify import (check_nominal_conditions, check_slater, core_error_bound, estimate_c_hat)
from .errors import NoSamplesError, PreconditionError, ProjectionError, SchemaError, UnsupportedOperation
from .instances import BUILTINS, run_pipeline
from .io import dump_problem, load_problem
from .oracle import empirical_tau
from .residual import residual, subgradient
from .solver import SolveConfig, solve, solve_auto
from .uncertainty import sur_inf_estimate

log = logging.getLogger("robust_split")

SEED_ENV = "ROBUST_SPLIT_SEED"


class UsageError(Exception):
    pass


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


def _problem(spec: str):
    if spec.startswith("builtin:"):
        name = spec.split(":", 1)[1]
        if name not in BUILTINS:
            raise UsageError(f"unknown built-in {name!r}; choose from {', '.join(BUILTINS)}")
        return BUILTINS[name].build()
    return load_problem(spec)


def _vector(text: str) -> np.ndarray:
    try:
        return np.array([float(t) for t in text.replace(" ", "").split(",") if t], dtype=float)
    except ValueError:
        raise UsageError(f"cannot parse point {text!r}; use comma-separated numbers") from None


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if np.isfinite(v) else ("inf" if v > 0 else ("-inf" if v < 0 else "nan"))
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _emit(args, payload: dict, lines: list[str]):
    if args.json:
        print(json.dumps(_jsonable(payload), indent=2))
    else:
        for line in lines:
            if line:
                print(line)


def _fmt(v) -> str:
    if v is None:
        return "-"
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.10g}"
    return str(v)


# -- commands ------------------------------------------------------------------


def cmd_solve(args) -> int:
    P = _problem(args.problem)
    cfg = SolveConfig(max_iter=args.max_iter, seed=args.seed, nontrivial=args.nontrivial,
                      x0=_vector(args.x0) if args.x0 else None)
    if args.step == "polyak":
        rep = solve_auto(P, cfg, multistart=args.multistart)
    else:
        if not args.step.startswith("dim:"):
            raise UsageError("--step must be 'polyak' or 'dim:S0'")
        try:
            cfg.s0 = float(args.step[4:])
        except ValueError:
            raise UsageError(f"bad step size in {args.step!r}") from None
        if not cfg.s0 > 0:
            raise UsageError("step size must be positive")
        cfg.step_rule = "diminishing"
        rep = min((solve(P, SolveConfig(**{**cfg.__dict__, "seed": cfg.seed + s,
                                            "nontrivial": cfg.nontrivial or s > 0}))
                   for s in range(max(1, args.multistart))), key=lambda r: r.p_best)
    verdict = ("feasible" if rep.feasible
               else f"residual-floor (p_floor = {_fmt(rep.p_floor)})")
    _emit(args, rep.to_json(), [
        f"verdict: {verdict}",
        f"x_best: {np.array2string(rep.x_best, precision=8)}",
        f"p_best: {_fmt(rep.p_best)} ({rep.region_best.value}) after {rep.iterations} iterations",
    ])
    return 0


def cmd_residual(args) -> int:
    P = _problem(args.problem)
    x = P.point(_vector(args.point))
    r = residual(P, x)
    g = subgradient(P, x)
    payload = {"point": x, "value": r.value, "excess_part": r.excess_part, "dist_part": r.dist_part,
               "region": r.region.value, "subgradient": g}
    _emit(args, payload, [
        f"value: {_fmt(r.value)}  (excess {_fmt(r.excess_part)} + dist {_fmt(r.dist_part)})",
        f"region: {r.region.value}",
        f"subgradient: {np.array2string(g, precision=8)}",
    ])
    return 0


def cmd_check_slater(args) -> int:
    P = _problem(args.problem)
    rep = check_slater(P)
    _emit(args, rep.to_json(), [
        f"found: {rep.found}" + (f"  ({rep.reason})" if rep.reason else ""),
        f"eta: {_fmt(rep.eta)}",
        f"u: {np.array2string(rep.u, precision=8)}",
    ])
    return 0


def cmd_certify(args) -> int:
    P = _problem(args.problem)
    rep = check_slater(P)
    payload = {"slater": rep.to_json()}
    lines = [f"slater direction found: {rep.found}" + (f"  ({rep.reason})" if rep.reason else "")]
    if args.sur_grid_density:
        val, lam = sur_inf_estimate(P.U, args.sur_grid_density, seed=args.seed)
        payload["sur_inf_estimate"] = {"value": val, "weights": lam, "scope": "heuristic-sampled"}
        lines.append(f"sur over U (sampled upper bound): {_fmt(val)} at weights {np.round(lam, 6)}")
    if not rep.found:
        payload["certificate"] = None
        _emit(args, payload, lines + ["no certificate"])
        return 1
    cert = core_error_bound(P, rep)
    payload["certificate"] = cert.to_json()
    lines += [f"eta: {_fmt(cert.eta)}  tau = 1/eta = {_fmt(cert.tau)}",
              f"scope: {cert.scope}; {cert.details['statement']}"]
    _emit(args, payload, lines)
    return 0


def cmd_estimate_bound(args) -> int:
    P = _problem(args.problem)
    cert = estimate_c_hat(P, samples=args.samples, box_radius=args.radius, seed=args.seed)
    meta = cert.sample_meta
    _emit(args, cert.to_json(), [
        f"c_hat: {_fmt(cert.c_hat)}  tau: {_fmt(cert.tau)}  scope: {cert.scope}",
        f"accepted {meta['accepted']} of {meta['count']} samples; regions {meta['region_counts']}",
        f"minimum at {np.round(meta['argmin_point'], 6).tolist()} ({meta['argmin_region']})",
    ])
    return 0


def cmd_check_nominal(args) -> int:
    P = _problem(args.problem)
    cert = check_nominal_conditions(P)
    d = cert.details
    _emit(args, cert.to_json(), [
        f"condition (ii): {d['condition_ii']['verdict']} ({d['condition_ii']['reason']})",
        f"condition (iii): {d['condition_iii']['verdict']} ({d['condition_iii']['reason']})",
        f"overall: {d['overall']}  scope: {cert.scope}",
    ])
    return 0


def cmd_empirical_tau(args) -> int:
    P = _problem(args.problem)
    res = empirical_tau(P, samples=args.samples, box_radius=args.radius, seed=args.seed)
    _emit(args, res.to_json(), [
        f"sup ratio dist/p: {_fmt(res.sup_ratio)} over {res.samples} samples",
        f"at {np.array2string(res.argmax_point, precision=8)}",
        "solution set looks empty" if res.solv_empty_suspected else "",
    ])
    return 0


def cmd_examples(args) -> int:
    if not args.name:
        _emit(args, {"instances": {k: b.description for k, b in BUILTINS.items()}},
              [f"{k:18s} {b.description}" for k, b in BUILTINS.items()])
        return 0
    if args.name not in BUILTINS:
        raise UsageError(f"unknown built-in {args.name!r}; choose from {', '.join(BUILTINS)}")
    P, checks, extra = run_pipeline(args.name, seed=args.seed, samples=args.samples)
    if args.write_problem:
        dump_problem(P, args.write_problem)
    ok = all(c.passed for c in checks)
    lines = []
    for c in checks:
        exp = ""
        if c.expected is not None:
            e = c.expected
            tol = f" +- {e.tol:g}" if e.tol else ""
            exp = f"  expected {e.relation} {e.value:.10g}{tol}  [{e.note}]"
        lines.append(f"{'PASS' if c.passed else 'FAIL'}  {c.name} = {_fmt(c.value)}{exp}")
    lines.append(f"{args.name}: {'all checks passed' if ok else 'some checks FAILED'}")
    _emit(args, {"instance": args.name, "passed": ok, "checks": [c.to_json() for c in checks],
                 "details": extra}, lines)
    return 0 if ok else 1


# -- parser ----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="emit the report as JSON")
    common.add_argument("--seed", type=int, default=None, help=f"random seed (default ${SEED_ENV} or 0)")
    common.add_argument("-v", "--verbose", action="store_true")

    prob = argparse.ArgumentParser(add_help=False)
    prob.add_argument("--problem", required=True, help="problem JSON file or builtin:NAME")

    sampling = argparse.ArgumentParser(add_help=False)
    sampling.add_argument("--samples", type=int, default=10_000)
    sampling.add_argument("--radius", type=float, default=10.0)

    p = argparse.ArgumentParser(prog="robust-split",
                                description="Robust split feasibility with polytopic matrix uncertainty.")
    sub = p.add_subparsers(dest="command", metavar="command")
    sub.required = True

    s = sub.add_parser("solve", parents=[common, prob], help="find a robust feasible point")
    s.add_argument("--step", default="polyak", help="polyak (default) or dim:S0")
    s.add_argument("--max-iter", type=int, default=100_000)
    s.add_argument("--multistart", type=int, default=1)
    s.add_argument("--x0", default=None, help="start point, comma-separated")
    s.add_argument("--nontrivial", action="store_true", help="avoid a feasible origin as start point")
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("residual", parents=[common, prob], help="evaluate the residual at a point")
    s.add_argument("--point", required=True, help="comma-separated coordinates")
    s.set_defaults(func=cmd_residual)

    s = sub.add_parser("certify", parents=[common, prob], help="Slater direction and core error bound")
    s.add_argument("--sur-grid-density", type=int, default=0,
                   help="also estimate the smallest covering bound over U on this grid")
    s.set_defaults(func=cmd_certify)

    s = sub.add_parser("check-slater", parents=[common, prob], help="Slater direction only")
    s.set_defaults(func=cmd_check_slater)

    s = sub.add_parser("estimate-bound", parents=[common, prob, sampling], help="sampled c-hat estimate")
    s.set_defaults(func=cmd_estimate_bound, samples=20_000)

    s = sub.add_parser("check-nominal", parents=[common, prob], help="cone conditions for a single matrix")
    s.set_defaults(func=cmd_check_nominal)

    s = sub.add_parser("empirical-tau", parents=[common, prob, sampling], help="sampled dist/residual ratio")
    s.set_defaults(func=cmd_empirical_tau)

    s = sub.add_parser("examples", parents=[common], help="run a built-in instance and check its constants")
    s.add_argument("name", nargs="?", help="instance name; omit to list")
    s.add_argument("--samples", type=int, default=2000)
    s.add_argument("--write-problem", default=None, help="also write the instance as a problem file")
    s.set_defaults(func=cmd_examples)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.seed is None:
            args.seed = _default_seed()
        return args.func(args)
    except (UsageError, SchemaError, FileNotFoundError, PreconditionError) as exc:
        return _fail(args, exc, 2)
    except (UnsupportedOperation, ProjectionError, NoSamplesError) as exc:
        return _fail(args, exc, 1)


def _fail(args, exc, code: int) -> int:
    print(f"robust-split: error: {exc}", file=sys.stderr)
    if args.json:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc), "exit_code": code}))
    return code


if __name__ == "__main__":
    sys.exit(main())
