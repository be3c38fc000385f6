"""Ground-truth distances to the robust solution set and empirical error-bound ratios."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NoSamplesError, UnsupportedOperation
from .residual import Problem, residual_values
from .solver import polish_batch

GRID_CAP = 10_000_000


def _polyhedral(P: Problem) -> bool:
    return P.C.is_polyhedral and P.Q.is_polyhedral


def grid_solv_distances(P: Problem, X, box_radius: float = 10.0, step: float | None = None,
                        chunk: int = 200_000) -> np.ndarray:
    """Brute-force distances from the rows of X to the grid points with zero residual.

    The grid covers ``[-box_radius, box_radius]^n`` with the given step
    (default ``box_radius / 500``), coarsened if needed to stay below
    ``GRID_CAP`` points.  Returns ``inf`` where no grid point is feasible.
    """
    if P.n > 3:
        raise UnsupportedOperation("grid oracle is limited to n <= 3")
    X = np.atleast_2d(np.asarray(X, dtype=float))
    step = box_radius / 500 if step is None else step
    per_axis = int(round(2 * box_radius / step)) + 1
    per_axis = min(per_axis, int(GRID_CAP ** (1.0 / P.n)))
    axis = np.linspace(-box_radius, box_radius, per_axis)
    mesh = np.stack(np.meshgrid(*([axis] * P.n), indexing="ij"), axis=-1).reshape(-1, P.n)
    feas = []
    for a in range(0, len(mesh), chunk):
        part = mesh[a:a + chunk]
        v, _, _ = residual_values(P, part)
        feas.append(part[v <= P.tol.tol_feas])
    F = np.vstack(feas)
    out = np.full(len(X), np.inf)
    if len(F) == 0:
        return out
    for i, x in enumerate(X):
        out[i] = float(np.sqrt(np.min(np.sum((F - x) ** 2, axis=1))))
    return out


def solv_distances(P: Problem, X, **grid_kw) -> tuple[np.ndarray, bool]:
    """Distances from the rows of X to the robust solution set.

    Exact for polyhedral C and Q, grid-based otherwise (n <= 3 only).
    The flag reports a suspected empty solution set (distances are ``inf``).
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if _polyhedral(P):
        res = polish_batch(P, X)
        return res.distances, res.likely_empty
    if P.n > 3:
        raise UnsupportedOperation("exact distances need polyhedral C and Q; grid fallback needs n <= 3")
    d = grid_solv_distances(P, X, **grid_kw)
    return d, bool(np.all(np.isinf(d)))


def solv_distance(P: Problem, x, **grid_kw) -> float:
    d, _ = solv_distances(P, P.point(x)[None], **grid_kw)
    return float(d[0])


@dataclass
class EmpiricalTau:
    sup_ratio: float
    argmax_point: np.ndarray
    samples: int
    seed: int
    solv_empty_suspected: bool
    box_radius: float = 10.0

    def to_json(self) -> dict:
        return {"sup_ratio": self.sup_ratio if np.isfinite(self.sup_ratio) else "inf",
                "argmax_point": self.argmax_point.tolist(), "samples": self.samples,
                "seed": self.seed, "box_radius": self.box_radius,
                "solv_empty_suspected": self.solv_empty_suspected}


def empirical_tau(P: Problem, samples: int = 10_000, box_radius: float = 10.0, seed: int = 0) -> EmpiricalTau:
    """Largest observed ``dist(x, Solv) / p(x)`` over seeded uniform samples.

    Only samples with residual above ``tol_feas`` count; a longer run with
    the same seed extends a shorter one, so the ratio never decreases with
    more samples.
    """
    rng = np.random.default_rng(seed)
    X = rng.uniform(-box_radius, box_radius, size=(samples, P.n))
    vals, _, _ = residual_values(P, X)
    keep = vals > P.tol.tol_feas
    if not keep.any():
        raise NoSamplesError("every sample is feasible; no ratio to report")
    Xk, pk = X[keep], vals[keep]
    d, empty = solv_distances(P, Xk, box_radius=box_radius)
    if empty:
        return EmpiricalTau(float("inf"), Xk[0], int(keep.sum()), seed, True, box_radius)
    ratio = d / pk
    j = int(np.argmax(ratio))
    return EmpiricalTau(float(ratio[j]), Xk[j], int(keep.sum()), seed, False, box_radius)
