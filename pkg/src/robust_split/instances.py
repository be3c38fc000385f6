"""Built-in problem instances with known constants, and their check pipelines."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import permutations
from typing import Callable

import numpy as np

from .certify import (check_nominal_conditions, check_slater, core_error_bound, estimate_c_hat,
                      validate_core_bound)
from .geometry.linalg import sur
from .geometry.sets import Halfspaces, NonnegOrthant, NonposOrthant, WholeSpace
from .oracle import empirical_tau, solv_distance
from .residual import Problem
from .solver import SolveConfig, solve_auto
from .uncertainty import UncertaintySet, birkhoff_map, sur_inf_estimate

SQRT2 = float(np.sqrt(2.0))


@dataclass(frozen=True)
class Expected:
    """A reference constant: its value, how it is compared and where it comes from."""

    value: float
    relation: str  # "<=", ">=", "~"
    note: str
    tol: float = 0.0

    def holds(self, got: float) -> bool:
        if self.relation == "<=":
            return got <= self.value + self.tol
        if self.relation == ">=":
            return got >= self.value - self.tol
        return abs(got - self.value) <= self.tol


@dataclass
class Builtin:
    name: str
    description: str
    build: Callable[[], Problem]
    expected: dict[str, Expected] = field(default_factory=dict)


def _permutation_matrices(n):
    eye = np.eye(n)
    return np.array([eye[list(p)] for p in permutations(range(n))])


def ex2_1_birkhoff() -> Problem:
    """Every 3x3 permutation matrix as a vertex; ``A x <= 0`` for all doubly stochastic A."""
    return Problem(WholeSpace(3), NonposOrthant(3), UncertaintySet(_permutation_matrices(3)),
                   name="ex2_1_birkhoff")


def ex3_1_infeasible() -> Problem:
    """``x >= 1`` with ``(x, w x)`` in ``[0, inf) x {0}`` for all w in [-1, 1]; no solution."""
    C = Halfspaces([[-1.0]], [-1.0])
    Q = Halfspaces([[-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]], [0.0, 0.0, 0.0])
    U = UncertaintySet([[[1.0], [-1.0]], [[1.0], [1.0]]])
    return Problem(C, Q, U, name="ex3_1_infeasible")


def ex3_2_tau1() -> Problem:
    """``x >= 0`` with ``w x <= 0`` for all w in [0, 1]; the solution set is {0}."""
    Q = Halfspaces([[0.0, 1.0]], [0.0])
    U = UncertaintySet([[[1.0], [0.0]], [[1.0], [1.0]]])
    return Problem(NonnegOrthant(1), Q, U, name="ex3_2_tau1")


def ex3_3_sqrt2() -> Problem:
    """2x2 doubly stochastic matrices, Q the nonpositive orthant, C the plane."""
    U = UncertaintySet([[[0.0, 1.0], [1.0, 0.0]], np.eye(2)])
    return Problem(WholeSpace(2), NonposOrthant(2), U, name="ex3_3_sqrt2")


def ex4_1_sur_fail() -> Problem:
    """Same data as ``ex3_3_sqrt2``; the midpoint matrix is singular."""
    P = ex3_3_sqrt2()
    return Problem(P.C, P.Q, P.U, name="ex4_1_sur_fail")


def ex4_2_polyhedral() -> Problem:
    """Vertices ``[[1, -1], [0, 1]]`` and I, C the nonnegative and Q the nonpositive orthant."""
    U = UncertaintySet([[[1.0, -1.0], [0.0, 1.0]], np.eye(2)])
    return Problem(NonnegOrthant(2), NonposOrthant(2), U, name="ex4_2_polyhedral")


BUILTINS: dict[str, Builtin] = {
    "ex2_1_birkhoff": Builtin(
        "ex2_1_birkhoff", "3x3 Birkhoff polytope as uncertainty set", ex2_1_birkhoff,
        {"birkhoff_sum_error": Expected(1e-12, "<=", "rows and columns of every image sum to 1"),
         "birkhoff_min_entry": Expected(-1e-12, ">=", "images are entrywise nonnegative")},
    ),
    "ex3_1_infeasible": Builtin(
        "ex3_1_infeasible", "infeasible instance whose subgradients cancel on (0, 1)", ex3_1_infeasible,
        {"c_hat": Expected(1e-9, "<=", "the two unit subgradients cancel on (0, 1)"),
         "p_floor": Expected(1.0, "~", "the residual equals 1 on [0, 1] and exceeds it elsewhere", 0.05)},
    ),
    "ex3_2_tau1": Builtin(
        "ex3_2_tau1", "error bound with tau = 1 on the line", ex3_2_tau1,
        {"c_hat": Expected(1e-9, "<=", "published constant; see README for the sampled value"),
         "sup_ratio": Expected(1.0, "<=", "dist(x, {0}) = |x| = p(x)", 1e-6)},
    ),
    "ex3_3_sqrt2": Builtin(
        "ex3_3_sqrt2", "2x2 Birkhoff uncertainty with the nonpositive orthant", ex3_3_sqrt2,
        {"c_hat": Expected(1.0 / SQRT2, ">=", "published lower bound 1/sqrt(2)", 1e-6),
         "sup_ratio": Expected(SQRT2, "<=", "dist(x, Solv) <= sqrt(2) p(x)", 1e-6)},
    ),
    "ex4_1_sur_fail": Builtin(
        "ex4_1_sur_fail", "same data; covering bound vanishes at the midpoint", ex4_1_sur_fail,
        {"sur_inf": Expected(1e-3, "<=", "the midpoint matrix has all entries 1/2"),
         "witness_weight": Expected(0.5, "~", "minimiser at equal weights", 1e-2)},
    ),
    "ex4_2_polyhedral": Builtin(
        "ex4_2_polyhedral", "polyhedral instance with a Slater direction", ex4_2_polyhedral,
        {"sur_inf": Expected(0.5, ">=", "published lower bound 1/2"),
         "eta": Expected(0.0, ">=", "a Slater direction exists", -1e-12),
         "sup_ratio": Expected(SQRT2, "<=", "error bound with tau = sqrt(2)", 1e-6),
         "solv_distance_11": Expected(SQRT2, "~", "Solv = {0}", 1e-8)},
    ),
}


@dataclass
class CheckResult:
    name: str
    value: float
    expected: Expected | None
    passed: bool

    def to_json(self) -> dict:
        exp = None
        if self.expected is not None:
            exp = {"value": self.expected.value, "relation": self.expected.relation,
                   "tol": self.expected.tol, "note": self.expected.note}
        v = self.value if np.isfinite(self.value) else str(self.value)
        return {"name": self.name, "value": v, "expected": exp, "passed": self.passed}


def _check(out, spec, name, value):
    exp = spec.expected.get(name)
    ok = True if exp is None else bool(exp.holds(value))
    out.append(CheckResult(name, float(value), exp, ok))


def run_pipeline(name: str, seed: int = 0, samples: int = 2000) -> tuple[Problem, list[CheckResult], dict]:
    """Build a built-in instance, compute its constants and compare them with the reference values."""
    if name not in BUILTINS:
        raise KeyError(f"unknown instance {name!r}; choose from {', '.join(BUILTINS)}")
    spec = BUILTINS[name]
    P = spec.build()
    checks: list[CheckResult] = []
    extra: dict = {}
    rng = np.random.default_rng(seed)

    if name == "ex2_1_birkhoff":
        errs, mins = [], []
        while len(errs) < 100:
            w = rng.uniform(0, 1, 4)
            from .uncertainty import in_birkhoff_omega

            if not in_birkhoff_omega(w):
                continue
            B = birkhoff_map(w)
            errs.append(max(np.abs(B.sum(0) - 1).max(), np.abs(B.sum(1) - 1).max()))
            mins.append(B.min())
        _check(checks, spec, "birkhoff_sum_error", max(errs))
        _check(checks, spec, "birkhoff_min_entry", min(mins))
        rep = solve_auto(P, SolveConfig(seed=seed, x0=np.ones(3)))
        extra["solve"] = rep.to_json()
        _check(checks, spec, "p_best", rep.p_best)
    elif name == "ex3_1_infeasible":
        cert = estimate_c_hat(P, samples=samples, box_radius=10.0, seed=seed)
        extra["c_hat_certificate"] = cert.to_json()
        _check(checks, spec, "c_hat", cert.c_hat)
        rep = solve_auto(P, SolveConfig(seed=seed))
        extra["solve"] = rep.to_json()
        _check(checks, spec, "p_floor", rep.p_floor if rep.p_floor is not None else 0.0)
        d = solv_distance(P, [0.5])
        checks.append(CheckResult("solv_empty", float(np.isinf(d)), None, bool(np.isinf(d))))
    elif name in ("ex3_2_tau1", "ex3_3_sqrt2"):
        cert = estimate_c_hat(P, samples=samples, box_radius=10.0, seed=seed)
        extra["c_hat_certificate"] = cert.to_json()
        _check(checks, spec, "c_hat", cert.c_hat)
        tau = empirical_tau(P, samples=10_000, box_radius=10.0, seed=seed)
        extra["empirical_tau"] = tau.to_json()
        _check(checks, spec, "sup_ratio", tau.sup_ratio)
    elif name == "ex4_1_sur_fail":
        val, lam = sur_inf_estimate(P.U, grid_density=1000, refine_iters=50, seed=seed)
        extra["witness"] = lam.tolist()
        _check(checks, spec, "sur_inf", val)
        _check(checks, spec, "witness_weight", float(lam[0]))
    elif name == "ex4_2_polyhedral":
        grid = np.linspace(0.0, 1.0, 1001)
        s = min(sur(P.U.combine([t, 1 - t])) for t in grid)
        _check(checks, spec, "sur_inf", s)
        sl = check_slater(P)
        extra["slater"] = sl.to_json()
        _check(checks, spec, "eta", sl.eta)
        checks[-1].passed = sl.found and sl.eta > 0
        if sl.found:
            cert = core_error_bound(P, sl)
            X = rng.uniform(-10, 10, size=(samples, 2))
            worst, ok = validate_core_bound(P, cert, X)
            extra["core_bound"] = cert.to_json()
            checks.append(CheckResult("core_bound_ratio", worst, Expected(1.0, "<=", "core bound", 1e-6), ok))
        tau = empirical_tau(P, samples=10_000, box_radius=10.0, seed=seed)
        extra["empirical_tau"] = tau.to_json()
        _check(checks, spec, "sup_ratio", tau.sup_ratio)
        _check(checks, spec, "solv_distance_11", solv_distance(P, [1.0, 1.0]))
    return P, checks, extra


def nominal_examples() -> dict[str, tuple[Problem, str]]:
    """Single-matrix instances for the nominal cone checks with their verdicts."""
    I2 = np.eye(2)
    return {
        "onto_unconstrained": (Problem(WholeSpace(2), NonposOrthant(2), UncertaintySet(I2)), "pass"),
        "kernel_hits_polar": (Problem(WholeSpace(2), NonposOrthant(2),
                                      UncertaintySet([[1.0, 0.0], [0.0, 0.0]])), "fail"),
        "orthants": (Problem(NonposOrthant(2), NonposOrthant(2), UncertaintySet(I2)), "pass"),
        "cancellation": (Problem(Halfspaces([[0.0, -1.0]], [0.0]),
                                 Halfspaces([[1.0, 0.0], [-1.0, 0.0]], [0.0, 0.0]),
                                 UncertaintySet(I2)), "indeterminate"),
    }


def run_nominal(name: str):
    P, verdict = nominal_examples()[name]
    cert = check_nominal_conditions(P)
    return cert, verdict
