"""Polytopic matrix uncertainty ``U = conv{A_1, ..., A_k}``.

The set-valued map ``x -> {A x : A in U}`` takes the value
``conv{A_1 x, ..., A_k x}``; since ``dist(., Q)`` is convex, its excess over
Q is attained at one of these vertex images.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import PreconditionError
from .geometry.linalg import operator_norm, sur
from .geometry.sets import ConvexSet

GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0
MAX_GRID_POINTS = 1_000_000


@dataclass(frozen=True, eq=False)
class UncertaintySet:
    """Vertex description of a matrix polytope.

    Parameters
    ----------
    vertices : array_like, shape (k, m, n)
        The matrices ``A_1..A_k``; a single 2-D matrix is accepted as k = 1.
    """

    vertices: np.ndarray

    def __post_init__(self):
        V = np.asarray(self.vertices, dtype=float)
        if V.ndim == 2:
            V = V[None]
        if V.ndim != 3 or V.shape[0] < 1 or V.shape[1] < 1 or V.shape[2] < 1:
            raise ValueError(f"vertices must have shape (k, m, n) with k, m, n >= 1, got {V.shape}")
        if not np.all(np.isfinite(V)):
            raise ValueError("vertex matrices have non-finite entries")
        V.setflags(write=False)
        object.__setattr__(self, "vertices", V)

    @property
    def k(self) -> int:
        return self.vertices.shape[0]

    @property
    def m(self) -> int:
        return self.vertices.shape[1]

    @property
    def n(self) -> int:
        return self.vertices.shape[2]

    def combine(self, lam) -> np.ndarray:
        """The matrix ``sum_i lam_i A_i`` (batched over leading axes of ``lam``)."""
        return np.tensordot(np.asarray(lam, dtype=float), self.vertices, axes=(-1, 0))

    def to_json(self) -> dict:
        return {"vertices": self.vertices.tolist()}

    @classmethod
    def from_json(cls, obj) -> "UncertaintySet":
        return cls(obj["vertices"])


def _points(U, x):
    X = np.asarray(x, dtype=float)
    if X.shape[-1] != U.n:
        raise PreconditionError(f"point has dimension {X.shape[-1]}, matrices have {U.n} columns")
    return X


def evaluate_vertices(U: UncertaintySet, x) -> np.ndarray:
    """Vertex images ``A_i x``; shape (k, m), or (N, k, m) for a batch of points."""
    X = _points(U, x)
    return np.einsum("kmn,...n->...km", U.vertices, X)


def vertex_distances(U: UncertaintySet, x, Q: ConvexSet) -> np.ndarray:
    """``dist(A_i x, Q)`` for every vertex; shape (k,) or (N, k)."""
    if Q.dim != U.m:
        raise PreconditionError(f"Q has dimension {Q.dim}, matrices have {U.m} rows")
    Y = evaluate_vertices(U, x)
    flat = Y.reshape(-1, U.m)
    d = np.linalg.norm(flat - Q.project(flat), axis=1)
    return d.reshape(Y.shape[:-1])


def excess(U: UncertaintySet, x, Q: ConvexSet):
    """Excess of ``conv{A_i x}`` over Q, i.e. ``max_i dist(A_i x, Q)``.

    Returns a float for one point and an array for a batch.
    """
    d = vertex_distances(U, x, Q)
    e = d.max(axis=-1)
    return float(e) if np.ndim(e) == 0 else e


def cleanup_set(U: UncertaintySet, x, Q: ConvexSet, tol_cleanup: float | None = None) -> list[int]:
    """Indices of the vertices whose image is (nearly) farthest from Q.

    The default tolerance is ``1e-8 * (1 + excess)``.  Never empty.
    """
    d = vertex_distances(U, np.asarray(x, dtype=float).reshape(-1), Q)
    e = float(d.max())
    tol = 1e-8 * (1.0 + e) if tol_cleanup is None else tol_cleanup
    return [int(i) for i in np.flatnonzero(e - d <= tol)]


def lipschitz_beta(U: UncertaintySet) -> float:
    """Upper bound ``max_i ||A_i||`` on the operator norm over U."""
    return max(operator_norm(A) for A in U.vertices)


def _simplex_grid(k, density):
    """All weight vectors with entries in ``{0, 1/d, ..., 1}`` summing to 1."""
    if k == 1:
        return np.ones((1, 1))
    if k == 2:
        t = np.linspace(0.0, 1.0, density + 1)
        return np.column_stack([t, 1.0 - t])
    i, j = np.meshgrid(np.arange(density + 1), np.arange(density + 1), indexing="ij")
    keep = i + j <= density
    i, j = i[keep], j[keep]
    return np.column_stack([i, j, density - i - j]) / density


def _sur_batch(U, L):
    """Smallest singular value of ``sum lam_i A_i`` for each row of L (LAPACK, screening only)."""
    M = U.combine(L)
    G = M @ np.swapaxes(M, -1, -2)
    ev = np.linalg.eigvalsh(G)[:, 0]
    return np.sqrt(np.maximum(ev, 0.0))


def sur_inf_estimate(U: UncertaintySet, grid_density: int = 1000, refine_iters: int = 50,
                     seed: int = 0) -> tuple[float, np.ndarray]:
    """Sampled minimum of ``sur`` over the polytope U.

    Weights are screened on a regular simplex grid (k <= 3) or on seeded
    Dirichlet samples (k > 3), then refined around the best weight by
    golden-section searches along the edges ``e_i - e_j``.  The result is
    an upper bound on ``inf_{A in U} sur(A)``; positivity is heuristic.

    Returns
    -------
    value : float
        ``sur`` at the witness, evaluated with the Jacobi solver.
    weights : numpy.ndarray
        The witness convex weights.
    """
    if grid_density < 1:
        raise ValueError("grid_density must be a positive integer")
    k = U.k
    if k == 1:
        return sur(U.vertices[0]), np.ones(1)
    rng = np.random.default_rng(seed)
    if k <= 3:
        d = grid_density
        if k == 3:
            # keep the grid under MAX_GRID_POINTS
            d = min(d, int(np.sqrt(2 * MAX_GRID_POINTS)) - 1)
        L = _simplex_grid(k, d)
    else:
        n_samples = min(MAX_GRID_POINTS, max(grid_density * k, 1000))
        L = np.vstack([np.eye(k), rng.dirichlet(np.ones(k), size=n_samples)])
    vals = np.concatenate([_sur_batch(U, L[s:s + 50_000]) for s in range(0, len(L), 50_000)])
    best = L[int(np.argmin(vals))].copy()
    fbest = float(vals.min())

    def f(lam):
        return float(_sur_batch(U, lam[None])[0])

    pairs = list(combinations(range(k), 2))
    for _ in range(refine_iters):
        improved = False
        for i, j in pairs:
            # move weight between i and j: lam(t) = best + t (e_i - e_j), t in [-best_i, best_j]
            a, b = -best[i], best[j]
            if b - a <= 1e-15:
                continue
            e = np.zeros(k)
            e[i], e[j] = 1.0, -1.0
            lo, hi = a, b
            c1, c2 = hi - GOLDEN * (hi - lo), lo + GOLDEN * (hi - lo)
            f1, f2 = f(best + c1 * e), f(best + c2 * e)
            for _ in range(60):
                if f1 < f2:
                    hi, c2, f2 = c2, c1, f1
                    c1 = hi - GOLDEN * (hi - lo)
                    f1 = f(best + c1 * e)
                else:
                    lo, c1, f1 = c1, c2, f2
                    c2 = lo + GOLDEN * (hi - lo)
                    f2 = f(best + c2 * e)
            t = 0.5 * (lo + hi)
            cand = np.clip(best + t * e, 0.0, None)
            cand /= cand.sum()
            fc = f(cand)
            if fc < fbest - 1e-15:
                best, fbest, improved = cand, fc, True
        if not improved:
            # random local kick before giving up
            cand = np.clip(best + 0.01 * rng.normal(size=k), 0.0, None)
            if cand.sum() <= 0:
                break
            cand /= cand.sum()
            fc = f(cand)
            if fc < fbest:
                best, fbest = cand, fc
            else:
                break
    return sur(U.combine(best)), best


# -- doubly stochastic 3x3 parameterisation ----------------------------------

_OMEGA_G = np.array([
    [-1, 0, 0, 0], [0, -1, 0, 0], [0, 0, -1, 0], [0, 0, 0, -1],
    [1, 1, 0, 0], [1, 0, 1, 0], [0, 1, 0, 1], [0, 0, 1, 1],
    [-1, -1, -1, -1],
], dtype=float)
_OMEGA_H = np.array([0, 0, 0, 0, 1, 1, 1, 1, -1], dtype=float)


def birkhoff_map(omega) -> np.ndarray:
    """Affine map from ``R^4`` onto 3x3 matrices with unit row and column sums.

    Entries are nonnegative exactly when ``omega`` lies in the polytope
    tested by :func:`in_birkhoff_omega`.
    """
    w = np.asarray(omega, dtype=float)
    if w.shape != (4,):
        raise ValueError(f"omega must have 4 entries, got shape {w.shape}")
    w1, w2, w3, w4 = w
    return np.array([
        [w1, w2, 1 - w1 - w2],
        [w3, w4, 1 - w3 - w4],
        [1 - w1 - w3, 1 - w2 - w4, w1 + w2 + w3 + w4 - 1],
    ])


def in_birkhoff_omega(omega, tol: float = 1e-12) -> bool:
    w = np.asarray(omega, dtype=float)
    return bool(np.all(_OMEGA_G @ w - _OMEGA_H <= tol))


def birkhoff_omega_halfspaces() -> tuple[np.ndarray, np.ndarray]:
    """``(G, h)`` with the parameter polytope equal to ``{w : G w <= h}``."""
    return _OMEGA_G.copy(), _OMEGA_H.copy()
