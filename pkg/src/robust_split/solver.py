"""Subgradient descent on the robust residual and exact polyhedral polishing."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import UnsupportedOperation
from .geometry.polyhedral import project_polyhedron
from .residual import Problem, Region, residual, residual_and_subgradient


@dataclass
class SolveConfig:
    """Parameters of :func:`solve`.

    ``step_rule`` is ``"polyak"`` (target value 0) or ``"diminishing"`` with
    step ``s0 / sqrt(t + 1)`` along the normalised subgradient.  The run
    stops early when the best value has not improved for ``patience``
    iterations (``None`` disables this).  With ``nontrivial=True`` and no
    ``x0``, a feasible origin is replaced by a seeded random unit vector.
    """

    max_iter: int = 100_000
    tol_feas: float | None = None
    step_rule: str = "polyak"
    s0: float = 1.0
    seed: int = 0
    x0: np.ndarray | None = None
    patience: int | None = 1000
    nontrivial: bool = False

    def __post_init__(self):
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if self.step_rule not in ("polyak", "diminishing"):
            raise ValueError(f"unknown step rule {self.step_rule!r}")
        if not self.s0 > 0:
            raise ValueError("s0 must be positive")


@dataclass
class SolveReport:
    x_best: np.ndarray
    p_best: float
    region_best: Region
    iterations: int
    trace: list = field(default_factory=list)  # (iteration, best value so far)
    verdict: str = "residual-floor"
    p_floor: float | None = None
    step_rule: str = "polyak"
    reason: str = ""

    @property
    def feasible(self) -> bool:
        return self.verdict == "feasible"

    def to_json(self) -> dict:
        return {
            "x_best": self.x_best.tolist(),
            "p_best": self.p_best,
            "region_best": self.region_best.value,
            "iterations": self.iterations,
            "trace": [[int(t), float(p)] for t, p in self.trace],
            "verdict": self.verdict,
            "p_floor": self.p_floor,
            "step_rule": self.step_rule,
            "reason": self.reason,
        }


def _start_point(P: Problem, cfg: SolveConfig) -> np.ndarray:
    if cfg.x0 is not None:
        return P.point(cfg.x0)
    x = np.zeros(P.n)
    if cfg.nontrivial and residual(P, x).value <= (cfg.tol_feas or P.tol.tol_feas):
        u = np.random.default_rng(cfg.seed).normal(size=P.n)
        x = u / np.linalg.norm(u)
    return x


def solve(P: Problem, cfg: SolveConfig | None = None) -> SolveReport:
    """Minimise the residual by a subgradient method.

    Reports ``feasible`` once the residual drops to ``tol_feas`` and a
    ``residual-floor`` verdict otherwise, immediately so when a zero
    subgradient shows the current point is a global minimiser.
    """
    cfg = cfg or SolveConfig()
    tol = cfg.tol_feas if cfg.tol_feas is not None else P.tol.tol_feas
    x = _start_point(P, cfg)
    r, g = residual_and_subgradient(P, x)
    best_x, best = x.copy(), r
    trace = [(0, r.value)]
    next_log = 1
    since = 0
    reason = "max_iter reached"
    t = 0
    if r.value <= tol:
        return SolveReport(x, r.value, r.region, 0, trace, "feasible", None, cfg.step_rule, "start point feasible")
    p = r.value
    while t < cfg.max_iter:
        gn2 = float(g @ g)
        if gn2 == 0.0:
            reason = "zero subgradient at a point with positive residual"
            break
        if cfg.step_rule == "polyak":
            x = x - (p / gn2) * g
        else:
            x = x - (cfg.s0 / math.sqrt(t + 1.0)) * g / math.sqrt(gn2)
        t += 1
        r, g = residual_and_subgradient(P, x)
        p = r.value
        if p < best.value:
            rel = best.value - p > 1e-12 * max(1.0, best.value)
            best_x, best = x.copy(), r
            since = 0 if rel else since + 1
        else:
            since += 1
        if t >= next_log:
            trace.append((t, best.value))
            next_log *= 2
        if best.value <= tol:
            reason = "residual below tol_feas"
            break
        if cfg.patience is not None and since >= cfg.patience:
            reason = f"no improvement in {cfg.patience} iterations"
            break
    if trace[-1][0] != t:
        trace.append((t, best.value))
    feasible = best.value <= tol
    return SolveReport(best_x, best.value, best.region, t, trace,
                       "feasible" if feasible else "residual-floor",
                       None if feasible else best.value, cfg.step_rule, reason)


def solve_auto(P: Problem, cfg: SolveConfig | None = None, multistart: int = 1) -> SolveReport:
    """Polyak first, then the diminishing rule if Polyak ends above ``tol_feas``.

    With ``multistart > 1`` extra runs start from seeded random points in
    the unit ball scaled by ``1 + |x0|``; the best report wins.
    """
    cfg = cfg or SolveConfig()
    reports = []
    rng = np.random.default_rng(cfg.seed)
    for s in range(max(1, multistart)):
        c = SolveConfig(**{**cfg.__dict__})
        if s > 0:
            base = _start_point(P, cfg)
            c.x0 = base + (1.0 + np.linalg.norm(base)) * rng.uniform(-1, 1, P.n)
        c.step_rule = "polyak"
        rep = solve(P, c)
        if not rep.feasible:
            c.step_rule = "diminishing"
            c.x0 = rep.x_best
            rep2 = solve(P, c)
            rep2.iterations += rep.iterations
            if rep2.p_best <= rep.p_best:
                rep = rep2
        reports.append(rep)
    return min(reports, key=lambda r: r.p_best)


# -- polyhedral polishing ----------------------------------------------------


def _halfspaces(S, what):
    if not S.is_polyhedral:
        raise UnsupportedOperation(f"{what} ({S.kind}) is not polyhedral")
    return S.halfspaces()


def assembled_system(P: Problem, include_C: bool = True) -> tuple[np.ndarray, np.ndarray, bool]:
    """Halfspaces describing ``C & {x : A_i x in Q for all i}``.

    Rows that vanish are dropped; the flag is False when such a row has a
    negative right-hand side, which makes the system empty outright.
    """
    GQ, hQ = _halfspaces(P.Q, "Q")
    blocks = [(GQ @ A, hQ) for A in P.U.vertices]
    if include_C:
        blocks.insert(0, _halfspaces(P.C, "C"))
    G = np.vstack([b[0].reshape(-1, P.n) for b in blocks])
    h = np.concatenate([b[1] for b in blocks])
    zero = np.linalg.norm(G, axis=1) <= 1e-14 * max(1.0, float(np.abs(G).max(initial=0.0)))
    consistent = bool(np.all(h[zero] >= -P.tol.tol_feas))
    return G[~zero], h[~zero], consistent


@dataclass
class PolishResult:
    points: np.ndarray  # (N, n)
    distances: np.ndarray  # (N,), inf where the system looks empty
    likely_empty: bool
    converged: np.ndarray


def polish_batch(P: Problem, X, include_C: bool = True) -> PolishResult:
    """Exact projection of the rows of X onto the robust solution polyhedron."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    G, h, consistent = assembled_system(P, include_C)
    N = len(X)
    if not consistent:
        return PolishResult(X.copy(), np.full(N, np.inf), True, np.zeros(N, dtype=bool))
    if len(G) == 0:
        return PolishResult(X.copy(), np.zeros(N), False, np.ones(N, dtype=bool))
    res = project_polyhedron(G, h, X, P.tol.tol_proj, P.tol.tol_feas, P.tol.max_iter)
    empty = bool(np.any(res.likely_empty))
    d = np.linalg.norm(res.points - X, axis=1)
    if empty:
        d[:] = np.inf
    return PolishResult(res.points, d, empty, res.converged)


def polish_polyhedral(P: Problem, x) -> tuple[np.ndarray, float]:
    """Nearest robust solution to x and its distance (``inf`` if the set looks empty)."""
    res = polish_batch(P, P.point(x)[None])
    return res.points[0], float(res.distances[0])
