"""The robust residual ``p(x) = exc(conv{A_i x}, Q) + dist(x, C)`` and its subgradients."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, fields, replace

import numpy as np

from .errors import PreconditionError
from .geometry.sets import ConvexSet, distances
from .uncertainty import UncertaintySet, evaluate_vertices, vertex_distances


@dataclass(frozen=True)
class Tolerances:
    tol_feas: float = 1e-9
    tol_proj: float = 1e-10
    tol_eig: float = 1e-12
    tol_active: float = 1e-8
    tol_dual: float = 1e-8
    max_iter: int = 100_000

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if not (np.isfinite(v) and v > 0):
                raise ValueError(f"{f.name} must be positive, got {v!r}")

    def updated(self, **kw) -> "Tolerances":
        return replace(self, **{k: v for k, v in kw.items() if v is not None})

    def to_json(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass(frozen=True, eq=False)
class Problem:
    """Robust split feasibility data: find x in C with ``A x in Q`` for all A in U."""

    C: ConvexSet
    Q: ConvexSet
    U: UncertaintySet
    tol: Tolerances = field(default_factory=Tolerances)
    name: str = ""

    def __post_init__(self):
        if self.C.dim != self.U.n:
            raise PreconditionError(f"C lives in R^{self.C.dim} but the matrices have {self.U.n} columns")
        if self.Q.dim != self.U.m:
            raise PreconditionError(f"Q lives in R^{self.Q.dim} but the matrices have {self.U.m} rows")

    @property
    def n(self) -> int:
        return self.U.n

    @property
    def m(self) -> int:
        return self.U.m

    def point(self, x) -> np.ndarray:
        v = np.asarray(x, dtype=float).reshape(-1)
        if v.size != self.n or not np.all(np.isfinite(v)):
            raise PreconditionError(f"expected a finite point in R^{self.n}, got {np.asarray(x).shape}")
        return v


class Region(str, enum.Enum):
    """Where a point sits relative to the two residual terms."""

    R1 = "R1"  # excess > 0, dist > 0
    R2 = "R2"  # excess = 0, dist > 0
    R3 = "R3"  # excess > 0, dist = 0
    FEASIBLE = "FEASIBLE"


def classify(excess_part: float, dist_part: float, tol_feas: float) -> Region:
    e, d = excess_part > tol_feas, dist_part > tol_feas
    if e and d:
        return Region.R1
    if d:
        return Region.R2
    if e:
        return Region.R3
    return Region.FEASIBLE


@dataclass(frozen=True)
class ResidualValue:
    value: float
    excess_part: float
    dist_part: float
    region: Region


@dataclass
class _Eval:
    """Projections shared by the residual, its subgradient and subdifferential data."""

    X: np.ndarray  # (N, n)
    Y: np.ndarray  # (N, k, m) vertex images
    PY: np.ndarray  # (N, k, m) their projections onto Q
    dv: np.ndarray  # (N, k) vertex distances
    PX: np.ndarray  # (N, n) projections onto C
    d: np.ndarray  # (N,) distances to C
    e: np.ndarray = field(init=False)  # (N,) excess

    def __post_init__(self):
        self.e = self.dv.max(axis=1)


def _evaluate(P: Problem, X) -> _Eval:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != P.n:
        raise PreconditionError(f"points must live in R^{P.n}")
    Y = evaluate_vertices(P.U, X)
    flat = Y.reshape(-1, P.m)
    PY = P.Q.project(flat).reshape(Y.shape)
    dv = np.linalg.norm(Y - PY, axis=2)
    PX = P.C.project(X)
    return _Eval(X, Y, PY, dv, PX, np.linalg.norm(X - PX, axis=1))


def residual(P: Problem, x) -> ResidualValue:
    ev = _evaluate(P, P.point(x))
    e, d = float(ev.e[0]), float(ev.d[0])
    return ResidualValue(e + d, e, d, classify(e, d, P.tol.tol_feas))


def residual_values(P: Problem, X) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Batched residual: ``(values, excess_parts, dist_parts)`` for the rows of X."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    e = vertex_distances(P.U, X, P.Q).max(axis=1)
    d = distances(P.C, X)
    return e + d, e, d


def _cleanup(dv_row, e):
    return np.flatnonzero(e - dv_row <= 1e-8 * (1.0 + e))


def residual_dual_lb(P: Problem, x, directions) -> float:
    """Lower bound from the minimax form of the excess.

    ``max_u [max_i <A_i x, u> - support(Q, u)] + dist(x, C)`` over the given
    directions (each of norm at most 1) and ``u = 0``.
    """
    x = P.point(x)
    Uu = np.atleast_2d(np.asarray(directions, dtype=float))
    if Uu.size == 0:
        raise ValueError("need at least one direction")
    if Uu.shape[1] != P.m:
        raise PreconditionError(f"directions must live in R^{P.m}")
    if np.any(np.linalg.norm(Uu, axis=1) > 1 + 1e-12):
        raise PreconditionError("directions must lie in the unit ball")
    Y = evaluate_vertices(P.U, x)  # (k, m)
    lin = (Uu @ Y.T).max(axis=1)
    sig = np.asarray(P.Q.support(Uu), dtype=float)
    vals = np.where(np.isfinite(sig), lin - np.where(np.isfinite(sig), sig, 0.0), -np.inf)
    best = max(0.0, float(vals.max()))
    return best + float(np.linalg.norm(x - P.C.project(x)))


def _subgradient_from(P: Problem, ev: _Eval, s: int = 0) -> np.ndarray:
    # parts at or below tol_feas take the zero branch, like the region tags;
    # dividing by a round-off sized distance would give a meaningless direction
    g = np.zeros(P.n)
    tol = P.tol.tol_feas
    e = float(ev.e[s])
    if e > tol:
        i = int(_cleanup(ev.dv[s], e)[0])
        g += P.U.vertices[i].T @ ((ev.Y[s, i] - ev.PY[s, i]) / ev.dv[s, i])
    if ev.d[s] > tol:
        g += (ev.X[s] - ev.PX[s]) / ev.d[s]
    return g


def subgradient(P: Problem, x) -> np.ndarray:
    """One element of the subdifferential of the residual at x.

    The excess part uses the smallest index among the farthest vertices;
    either part is zero when its term vanishes.
    """
    return _subgradient_from(P, _evaluate(P, P.point(x)))


def residual_and_subgradient(P: Problem, x) -> tuple[ResidualValue, np.ndarray]:
    """Residual and :func:`subgradient` at x from a single set of projections."""
    ev = _evaluate(P, P.point(x))
    e, d = float(ev.e[0]), float(ev.d[0])
    return ResidualValue(e + d, e, d, classify(e, d, P.tol.tol_feas)), _subgradient_from(P, ev)


@dataclass
class SubdiffData:
    """Finite description ``conv(V) + cone(N) + w`` covering the subdifferential.

    ``V`` holds vertex subgradients (rows), ``N`` cone generators (rows) and
    ``w`` the fixed distance direction (zero when the point lies in C).
    ``indices`` lists the vertices that contributed.
    """

    region: Region
    V: np.ndarray
    N: np.ndarray
    w: np.ndarray
    indices: list[int]

    @property
    def empty(self) -> bool:
        return self.region is Region.FEASIBLE


def subdifferential_batch(P: Problem, X) -> list[SubdiffData]:
    """Generators of a set whose min-norm element bounds ``dist(0, subdiff p(x))`` from below.

    R1 and R3 points carry one subgradient per farthest vertex; R3 adds the
    normal cone of C at x.  At R2 points every vertex image lies in Q, so
    the excess part becomes ``{0}`` plus the cone spanned by ``A_i^T g``
    over the active normals g of Q at every ``A_i x``.  Normal cones are not
    intersected with the unit ball, which can only shrink the min-norm value.
    """
    ev = _evaluate(P, X)
    t = P.tol
    n = P.n
    zeros = np.zeros((0, n))
    act = pulled = None
    if type(P.Q).normal_cone_generators is ConvexSet.normal_cone_generators:
        # default active-row rule: evaluate it for every sample and vertex at once
        GQ, hQ = P.Q.halfspaces()
        tol_rows = t.tol_active * np.linalg.norm(GQ, axis=1)
        act = np.abs(ev.PY @ GQ.T - hQ) <= tol_rows  # (N, k, r)
        pulled = np.einsum("kmn,rm->krn", P.U.vertices, GQ)  # A_i^T g_j
    out = []
    for s in range(len(ev.X)):
        e, d = float(ev.e[s]), float(ev.d[s])
        region = classify(e, d, t.tol_feas)
        wdir = (ev.X[s] - ev.PX[s]) / d if d > 0 else np.zeros(n)
        if region is Region.FEASIBLE:
            out.append(SubdiffData(region, zeros, zeros, np.zeros(n), []))
            continue
        if region is Region.R2 and act is not None:
            N = pulled[act[s]].reshape(-1, n)
            out.append(SubdiffData(region, np.zeros((1, n)), N, wdir, list(range(P.U.k))))
            continue
        if region is Region.R2:
            gens = []
            for i in range(P.U.k):
                G = P.Q.normal_cone_generators(ev.PY[s, i], t.tol_active, t.tol_feas)
                gens.extend(P.U.vertices[i].T @ g for g in G)
            N = np.array(gens).reshape(-1, n)
            out.append(SubdiffData(region, np.zeros((1, n)), N, wdir, list(range(P.U.k))))
            continue
        idx = [int(i) for i in _cleanup(ev.dv[s], e)]
        V = np.array([P.U.vertices[i].T @ ((ev.Y[s, i] - ev.PY[s, i]) / ev.dv[s, i]) for i in idx])
        if region is Region.R1:
            out.append(SubdiffData(region, V, zeros, wdir, idx))
            continue
        N = np.asarray(P.C.normal_cone_generators(ev.PX[s], t.tol_active, t.tol_feas),
                       dtype=float).reshape(-1, n)
        out.append(SubdiffData(region, V, N, np.zeros(n), idx))
    return out


def subdifferential_data(P: Problem, x) -> SubdiffData:
    """:func:`subdifferential_batch` for a single point."""
    return subdifferential_batch(P, P.point(x))[0]
