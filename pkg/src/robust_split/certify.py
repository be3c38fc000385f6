"""Error-bound certificates.

* :func:`check_slater` and :func:`core_error_bound` handle cone Q with a
  strict interior direction ``u`` (every ``A_i u`` deep inside Q).
* :func:`estimate_c_hat` samples lower bounds on ``dist(0, subdiff p(x))``.
* :func:`check_nominal_conditions` tests the two cone conditions for a
  single matrix.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .errors import NoSamplesError, PreconditionError, UnsupportedOperation
from .geometry.linalg import lambda_extremes_sym
from .geometry.minnorm import min_norm, min_norm_single, pad_cones, pad_stack
from .geometry.sets import Halfspaces, NonnegOrthant, NonposOrthant, WholeSpace, interior_empty
from .residual import Problem, residual_values, subdifferential_batch
from .solver import assembled_system, polish_batch
from .uncertainty import excess

SCOPES = ("rigorous-core", "heuristic-sampled", "exact-nominal", "indeterminate")


@dataclass
class SlaterReport:
    found: bool
    u: np.ndarray
    eta: float
    per_vertex_margins: list[float]
    reason: str = ""
    method: str = "min-norm"

    def to_json(self) -> dict:
        return {"found": self.found, "u": self.u.tolist(), "eta": self.eta,
                "per_vertex_margins": list(self.per_vertex_margins),
                "reason": self.reason, "method": self.method}


@dataclass
class BoundCertificate:
    kind: str  # slater-eta | c-hat-estimate | nominal-cone-check
    scope: str
    tau: float | None = None
    eta: float | None = None
    c_hat: float | None = None
    sample_meta: dict | None = None
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.scope not in SCOPES:
            raise ValueError(f"unknown scope {self.scope!r}")

    def to_json(self) -> dict:
        def num(v):
            if v is None:
                return None
            return v if np.isfinite(v) else ("inf" if v > 0 else "-inf")

        return {"kind": self.kind, "scope": self.scope, "tau": num(self.tau), "eta": num(self.eta),
                "c_hat": num(self.c_hat), "sample_meta": self.sample_meta, "details": self.details}


# -- Slater direction and the core bound -------------------------------------


def _cone_rows(Q) -> np.ndarray:
    """Unit outward normals ``g_j`` with ``Q = {y : <g_j, y> <= 0}``."""
    if isinstance(Q, (NonposOrthant, NonnegOrthant)) or (isinstance(Q, Halfspaces) and Q.is_cone):
        G, _ = Q.halfspaces()
        return G / np.linalg.norm(G, axis=1)[:, None]
    raise UnsupportedOperation(f"Slater check needs a polyhedral cone Q, got {Q.kind}")


def _margins(P, G, u):
    """Per-vertex margin ``min_j -<g_j, A_i u>``."""
    return [float(np.min(-(G @ (A @ u)))) for A in P.U.vertices]


@dataclass
class SlaterConfig:
    method: str = "min-norm"  # or "ascent"
    starts: int = 8
    iters: int = 2000
    seed: int = 0


def check_slater(P: Problem, cfg: SlaterConfig | None = None) -> SlaterReport:
    """Look for u in the unit ball with every ``A_i u`` inside Q with margin eta.

    The margin ``phi(u) = min_{i,j} <c_ij, u>`` with ``c_ij = -A_i^T g_j``
    is maximised over the unit ball.  Its maximum is the norm of the
    min-norm point z of ``conv{c_ij}`` (attained at ``u = z/|z|``) when that
    norm is positive and 0 otherwise, so the default method is exact.
    ``method="ascent"`` runs multi-start projected subgradient ascent.
    """
    cfg = cfg or SlaterConfig()
    G = _cone_rows(P.Q)
    zero = np.zeros(P.n)
    if interior_empty(Halfspaces(G, np.zeros(len(G)))):
        return SlaterReport(False, zero, 0.0, _margins(P, G, zero), "interior of Q is empty", cfg.method)
    Cv = np.vstack([-(A.T @ G.T).T for A in P.U.vertices])  # rows c_ij
    if cfg.method == "ascent":
        u = _slater_ascent(Cv, cfg)
    elif cfg.method == "min-norm":
        r = min_norm_single(Cv)
        u = r.point / r.norm if r.norm > 0 else zero
    else:
        raise ValueError(f"unknown method {cfg.method!r}")
    eta = float(np.min(Cv @ u)) if np.any(u) else 0.0
    found = eta > P.tol.tol_feas
    if not found:
        u, eta = zero, 0.0
    return SlaterReport(found, u, eta, _margins(P, G, u),
                        "" if found else "no direction with positive margin", cfg.method)


def _slater_ascent(Cv, cfg):
    rng = np.random.default_rng(cfg.seed)
    n = Cv.shape[1]
    best_u, best = np.zeros(n), 0.0
    for _ in range(cfg.starts):
        u = rng.normal(size=n)
        u /= np.linalg.norm(u)
        for t in range(cfg.iters):
            vals = Cv @ u
            j = int(np.argmin(vals))
            if vals[j] > best:
                best, best_u = float(vals[j]), u.copy()
            u = u + Cv[j] / np.sqrt(t + 1.0)
            nu = np.linalg.norm(u)
            if nu > 1:
                u /= nu
    return best_u


def core_error_bound(P: Problem, slater: SlaterReport) -> BoundCertificate:
    """``dist(x, {x : A_i x in Q for all i}) <= exc(x) / eta`` for every x.

    For each x, the point ``x + (exc/eta) u`` is feasible for every vertex
    because Q is a convex cone and ``A_i u + eta B`` lies in Q.  The bound
    on the full solution set would also need the subtransversality
    constant of the pair, which is not computed.
    """
    if not slater.found or slater.eta <= 0:
        raise PreconditionError("core bound needs a Slater direction with positive margin")
    return BoundCertificate(
        kind="slater-eta", scope="rigorous-core", tau=1.0 / slater.eta, eta=slater.eta,
        details={"u": slater.u.tolist(),
                 "statement": "dist(x, robust preimage of Q) <= excess(x) / eta for all x",
                 "subtransversality_constant": "not computed"},
    )


def validate_core_bound(P: Problem, cert: BoundCertificate, X, rel: float = 1e-6):
    """Largest violation ratio of the core bound over the rows of X.

    Returns ``(worst, ok)`` where ``worst = max dist / (exc/eta)`` over rows
    with positive excess and ``ok`` says the bound held with slack ``rel``.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    d = polish_batch(P, X, include_C=False).distances
    e = np.atleast_1d(excess(P.U, X, P.Q))
    bound = e / cert.eta
    slack = 1e-12 + rel * bound
    ok = bool(np.all(d <= bound + slack))
    pos = e > P.tol.tol_feas
    worst = float(np.max(d[pos] / bound[pos])) if pos.any() else 0.0
    return worst, ok


# -- sampled estimate of c-hat -----------------------------------------------


def sample_points(P: Problem, samples: int, box_radius: float, seed: int, families: bool = True):
    """Seeded uniform samples in the box plus their projections onto C and onto the robust preimage of Q.

    The i-th row of every family depends only on the i-th uniform draw, so
    a longer run with the same seed extends a shorter one.
    """
    rng = np.random.default_rng(seed)
    X = rng.uniform(-box_radius, box_radius, size=(samples, P.n))
    out = [X]
    if families:
        out.append(P.C.project(X))
        try:
            G, h, ok = assembled_system(P, include_C=False)
        except UnsupportedOperation:
            G, ok = None, False
        if ok and G is not None and len(G):
            res = polish_batch(P, X, include_C=False)
            if not res.likely_empty:
                out.append(res.points)
    return np.vstack(out)


def _lower_bounds(P, data):
    """Certified min-norm lower bounds for a list of SubdiffData, batched by shape."""
    n = P.n
    lb = np.zeros(len(data))
    gap = np.zeros(len(data))
    groups: dict = {}
    for s, sd in enumerate(data):
        groups.setdefault((len(sd.V), len(sd.N)), []).append(s)
    for (_, _), idx in groups.items():
        V = pad_stack([data[s].V for s in idx], n)
        N = pad_cones([data[s].N for s in idx], n)
        w = np.array([data[s].w for s in idx])
        for a in range(0, len(idx), 4096):
            sl = slice(a, a + 4096)
            r = min_norm(V[sl], N[sl], w[sl])
            ii = np.asarray(idx[sl])
            lb[ii] = r.lower
            gap[ii] = r.gap
    return lb, gap


def estimate_c_hat(P: Problem, samples: int = 20_000, box_radius: float = 10.0, seed: int = 0,
                   families: bool = True) -> BoundCertificate:
    """Sampled estimate of the subgradient-norm constant.

    Each accepted sample x (residual above ``tol_feas``) contributes a
    certified lower bound on the min-norm element of its generator
    description ``conv(V) + cone(N) + w``.  The estimate is the minimum
    over samples; since the true constant is an infimum over an unbounded
    region, the result is heuristic.
    """
    if samples < 1:
        raise ValueError("samples must be positive")
    X = sample_points(P, samples, box_radius, seed, families)
    vals, _, _ = residual_values(P, X)
    keep = vals > P.tol.tol_feas
    if not keep.any():
        raise NoSamplesError("no sample has a positive residual")
    Xk = X[keep]
    data = subdifferential_batch(P, Xk)
    lb, gap = _lower_bounds(P, data)
    j = int(np.argmin(lb))
    c_hat = float(lb[j])
    regions = Counter(sd.region.value for sd in data)
    meta = {
        "count": int(len(X)), "accepted": int(keep.sum()), "seed": int(seed),
        "box_radius": float(box_radius), "families": bool(families),
        "region_counts": dict(sorted(regions.items())),
        "max_gap": float(gap.max()), "argmin_point": Xk[j].tolist(),
        "argmin_region": data[j].region.value,
        "notes": ["normal cones are not capped by the unit ball (lower bound stays valid)",
                  "the R2 cone collects normals over every vertex of U"],
    }
    return BoundCertificate(kind="c-hat-estimate", scope="heuristic-sampled", c_hat=c_hat,
                            tau=(1.0 / c_hat) if c_hat > 0 else None, sample_meta=meta)


# -- nominal cone conditions -------------------------------------------------


def _minnorm_split(V, N, n):
    r = min_norm_single(V, N if len(N) else None)
    a = V.T @ r.lam if len(V) else np.zeros(n)
    return r, a


def check_nominal_conditions(P: Problem) -> BoundCertificate:
    """Cone conditions for a single matrix A.

    (ii) ``ker A^T & Q_polar = {0}`` and (iii) ``A^T(Q_polar) & (-C_polar) = {0}``.
    Each is decided by a min-norm problem over the unit simplex of the
    polar generators of Q.  A zero minimum is a failure when it exhibits a
    nonzero witness; if every zero minimiser found cancels out, generators
    that A^T annihilates are dropped and the problem re-solved, and
    anything still unresolved is reported as indeterminate.
    """
    if P.U.k != 1:
        raise PreconditionError(f"nominal check needs a single matrix, got {P.U.k} vertices")
    A = P.U.vertices[0]
    n = P.n
    tol = P.tol.tol_dual
    W = np.asarray(P.Q.polar_generators(), dtype=float).reshape(-1, P.m)
    M = np.asarray(P.C.polar_generators(), dtype=float).reshape(-1, n)
    AW = W @ A  # rows A^T w_j
    img = np.linalg.norm(AW, axis=1)
    wn = np.linalg.norm(W, axis=1)

    # (ii)
    lmin, lmax = lambda_extremes_sym(A @ A.T, P.tol.tol_eig)
    if lmin > P.tol.tol_eig * max(1.0, lmax):
        ii = {"verdict": "pass", "reason": "A is onto"}
    elif len(W) == 0 or not np.any(wn > tol):
        ii = {"verdict": "pass", "reason": "polar of Q is {0}"}
    else:
        dead = (img <= tol) & (wn > tol)
        if dead.any():
            j = int(np.flatnonzero(dead)[0])
            ii = {"verdict": "fail", "reason": "polar generator in ker A^T", "witness": W[j].tolist()}
        else:
            r, _ = _minnorm_split(AW, np.zeros((0, n)), n)
            v = W.T @ r.lam
            if r.lower > tol:
                ii = {"verdict": "pass", "reason": "min-norm bound", "min_norm": float(r.lower)}
            elif r.norm <= tol and np.linalg.norm(v) > tol:
                ii = {"verdict": "fail", "reason": "nonzero v in ker A^T & Q_polar", "witness": v.tolist()}
            else:
                ii = {"verdict": "indeterminate", "reason": "zero minimum only through cancellation",
                      "min_norm": float(r.norm)}

    # (iii)
    if isinstance(P.C, WholeSpace) or len(M) == 0:
        iii = {"verdict": "pass", "reason": "C is the whole space"}
    elif len(W) == 0 or not np.any(img > tol):
        iii = {"verdict": "pass", "reason": "A^T(Q_polar) is {0}"}
    else:
        iii = _condition_iii(AW, M, n, tol)
        if iii["verdict"] == "indeterminate":
            keep = img > tol
            if not keep.all():
                again = _condition_iii(AW[keep], M, n, tol)
                if again["verdict"] != "indeterminate":
                    again["reason"] += " (after dropping generators annihilated by A^T)"
                    iii = again

    verdicts = (ii["verdict"], iii["verdict"])
    if "fail" in verdicts:
        overall = "fail"
    elif verdicts == ("pass", "pass"):
        overall = "pass"
    else:
        overall = "indeterminate"
    details = {"condition_ii": ii, "condition_iii": iii, "overall": overall}
    if overall == "pass":
        details["statement"] = "a global error bound holds for some tau > 0"
    return BoundCertificate(kind="nominal-cone-check",
                            scope="exact-nominal" if overall != "indeterminate" else "indeterminate",
                            details=details)


def _condition_iii(AW, M, n, tol):
    r, a = _minnorm_split(AW, M, n)
    if r.lower > tol:
        return {"verdict": "pass", "reason": "min-norm bound", "min_norm": float(r.lower)}
    if r.norm <= tol and np.linalg.norm(a) > tol:
        return {"verdict": "fail", "reason": "nonzero A^T v in -C_polar", "witness": a.tolist()}
    return {"verdict": "indeterminate", "reason": "zero minimum only through cancellation",
            "min_norm": float(r.norm)}
