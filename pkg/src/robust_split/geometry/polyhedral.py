"""Projection onto systems of halfspaces and cone ray enumeration."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np
from scipy.optimize import linprog
from scipy.optimize import nnls as scipy_nnls

from .linalg import null_space

TOL_PROJ = 1e-10
TOL_FEAS = 1e-9
MAX_ITER = 100_000
EMPTY_GAP = 1e-6


@dataclass
class DykstraResult:
    points: np.ndarray  # (N, n)
    converged: np.ndarray  # (N,) bool
    violation: np.ndarray  # (N,) max normalised constraint violation
    likely_empty: np.ndarray  # (N,) bool
    iterations: int


def normalize_rows(G, h):
    G = np.asarray(G, dtype=float)
    h = np.asarray(h, dtype=float)
    nrm = np.linalg.norm(G, axis=1)
    return G / nrm[:, None], h / nrm


def violation(G, h, X):
    """Largest normalised violation ``max_j (<g_j, x> - h_j)/|g_j|`` per row of X."""
    if len(G) == 0:
        return np.zeros(len(X))
    Gn, hn = normalize_rows(G, h)
    return np.max(X @ Gn.T - hn, axis=1)


def dykstra(G, h, X, tol_proj=TOL_PROJ, tol_feas=TOL_FEAS, max_iter=MAX_ITER) -> DykstraResult:
    """Dykstra's algorithm over the halfspaces ``<g_j, x> <= h_j``, batched over rows of X.

    A row stops when a full sweep moves it less than ``tol_proj``, its
    violation is below ``tol_feas`` and the complementarity gap of the
    correction terms is below ``tol_proj`` (relative to the row's size).  A row still running at ``max_iter``
    with violation above ``EMPTY_GAP`` and growing correction terms is
    flagged ``likely_empty``.  Iterates may stall for many sweeps on
    nonempty systems, so nothing is flagged earlier; use
    :func:`is_empty` for a decision.
    """
    G, h = normalize_rows(G, h)
    X = np.atleast_2d(np.asarray(X, dtype=float)).copy()
    N, n = X.shape
    r = len(G)
    conv = np.zeros(N, dtype=bool)
    empty = np.zeros(N, dtype=bool)
    if r == 0:
        return DykstraResult(X, np.ones(N, dtype=bool), np.zeros(N), empty, 0)
    P = np.zeros((r, N, n))
    scale = np.max(np.abs(X), axis=1)
    pnorm = np.zeros(N)
    growing = np.zeros(N, dtype=bool)
    active = np.arange(N)
    it = 0
    for it in range(1, max_iter + 1):
        Xa = X[active]
        prev = Xa.copy()
        Pa = P[:, active]
        for j in range(r):
            Y = Xa + Pa[j]
            v = np.maximum(Y @ G[j] - h[j], 0.0)
            Xa = Y - v[:, None] * G[j]
            Pa[j] = Y - Xa
        X[active] = Xa
        P[:, active] = Pa
        move = np.linalg.norm(Xa - prev, axis=1)
        slack = h - Xa @ G.T
        viol = -np.min(slack, axis=1)
        # x = x0 - sum_j v_j g_j with v_j >= 0 holds throughout, so the duality
        # gap sum_j v_j slack_j bounds |x - x*|^2 / 2; iterates can stall at
        # feasible non-optimal points, where only this gap tells
        gap = np.sum(np.linalg.norm(Pa, axis=2).T * np.maximum(slack, 0.0), axis=1)
        done = (move < tol_proj) & (viol < tol_feas) & (gap <= tol_proj * np.maximum(1.0, scale[active]))
        conv[active[done]] = True
        new_pnorm = np.sqrt(np.sum(Pa * Pa, axis=(0, 2)))
        growing[active] = new_pnorm > pnorm[active]
        pnorm[active] = new_pnorm
        active = active[~done]
        if active.size == 0:
            break
    viol = np.maximum(np.max(X @ G.T - h, axis=1), 0.0)
    empty[active] = (viol[active] > EMPTY_GAP) & growing[active]
    return DykstraResult(X, conv, viol, empty, it)


def is_empty(G, h, tol_feas=TOL_FEAS) -> bool:
    """Whether ``{x : G x <= h}`` is empty even after relaxing each normalised row by ``tol_feas``."""
    G = np.atleast_2d(np.asarray(G, dtype=float))
    if G.size == 0:
        return False
    Gn, hn = normalize_rows(G, h)
    res = linprog(np.zeros(G.shape[1]), A_ub=Gn, b_ub=hn + tol_feas, bounds=(None, None), method="highs")
    if res.status not in (0, 2):
        raise RuntimeError(f"feasibility LP failed: {res.message}")
    return res.status == 2


MAX_SUBSETS = 4096


def _kkt_accept(G, h, Ga, pat, Xs, nu, tol_feas):
    """Points ``x - Ga^T nu`` and whether they satisfy the KKT conditions."""
    Y = Xs - nu @ Ga
    good = np.max(Y @ G.T - h, axis=1) <= tol_feas
    good &= np.all(nu >= -1e-10, axis=1)
    eq = np.abs(Y @ Ga.T - h[pat])
    good &= np.max(np.where(nu > 0, eq, 0.0), axis=1) <= tol_feas
    return Y, good


def _independent_subsets(Ga, n):
    a = len(Ga)
    count = 0
    for size in range(min(a, n), 0, -1):
        for S in combinations(range(a), size):
            count += 1
            if count > MAX_SUBSETS:
                return
            if np.linalg.matrix_rank(Ga[list(S)]) == size:
                yield list(S)


def kkt_finish(G, h, X, Z, tol_feas=TOL_FEAS):
    """Snap approximate projections Z of the rows of X to the exact ones.

    Constraints active at z are candidates.  A point ``x - Ga_S^T nu`` with
    ``Ga_S`` an independent subset of them is the exact projection as soon
    as it is feasible with nonnegative multipliers, so rows are accepted
    subset by subset: the full active set first when it is independent,
    then every independent subset, each solved for all remaining rows of
    the pattern at once.  Rows still open after that use the support of an
    NNLS fit of ``x - z``.

    Returns
    -------
    points : numpy.ndarray
        Improved points (rows of Z where the finish was rejected).
    ok : numpy.ndarray of bool
        Which rows were snapped.
    """
    G, h = normalize_rows(G, h)
    X = np.atleast_2d(X)
    Z = np.atleast_2d(Z)
    n = X.shape[1]
    out = Z.copy()
    ok = np.zeros(len(X), dtype=bool)
    scale = np.maximum(1.0, np.max(np.abs(Z), axis=1))
    act = (Z @ G.T - h) >= -1e-7 * scale[:, None]
    patterns, inv = np.unique(act, axis=0, return_inverse=True)
    inv = inv.reshape(-1)
    for pi, pat in enumerate(patterns):
        rows = np.flatnonzero(inv == pi)
        if not pat.any():
            good = np.max(X[rows] @ G.T - h, axis=1) <= tol_feas
            out[rows[good]] = X[rows[good]]
            ok[rows[good]] = True
            continue
        Ga, ha = G[pat], h[pat]
        open_ = rows
        for S in _independent_subsets(Ga, n):
            if open_.size == 0:
                break
            Gs = Ga[S]
            nu = np.zeros((open_.size, len(Ga)))
            nu[:, S] = np.linalg.solve(Gs @ Gs.T, (X[open_] @ Gs.T - ha[S]).T).T
            Y, good = _kkt_accept(G, h, Ga, pat, X[open_], nu, tol_feas)
            out[open_[good]] = Y[good]
            ok[open_[good]] = True
            open_ = open_[~good]
        for r in open_:
            nu0, _ = scipy_nnls(Ga.T, X[r] - Z[r])
            S = nu0 > 1e-12 * max(1.0, float(nu0.max(initial=0.0)))
            nu = np.zeros((1, len(Ga)))
            if S.any():
                Gs = Ga[S]
                nu[0, S] = np.linalg.lstsq(Gs @ Gs.T, Gs @ X[r] - ha[S], rcond=None)[0]
            Y, good = _kkt_accept(G, h, Ga, pat, X[r:r + 1], nu, tol_feas)
            if good[0]:
                out[r] = Y[0]
                ok[r] = True
    return out, ok


def project_polyhedron(G, h, X, tol_proj=TOL_PROJ, tol_feas=TOL_FEAS, max_iter=MAX_ITER,
                       finish=True, empty: bool | None = None) -> DykstraResult:
    """Euclidean projection of each row of X onto ``{x : G x <= h}``.

    Dykstra followed by an exact active-set finishing step.  ``empty`` skips
    the feasibility LP when the caller already knows the answer.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    G = np.asarray(G, dtype=float).reshape(-1, X.shape[1])
    h = np.asarray(h, dtype=float).reshape(-1)
    if len(G) == 1:
        g = G[0]
        v = np.maximum(X @ g - h[0], 0.0) / (g @ g)
        pts = X - v[:, None] * g
        N = len(X)
        return DykstraResult(pts, np.ones(N, dtype=bool), np.zeros(N), np.zeros(N, dtype=bool), 1)
    if empty is None:
        empty = is_empty(G, h, tol_feas)
    if empty:
        N = len(X)
        viol = violation(G, h, X)
        return DykstraResult(X.copy(), np.zeros(N, dtype=bool), np.maximum(viol, 0.0), np.ones(N, dtype=bool), 0)
    res = dykstra(G, h, X, tol_proj, tol_feas, max_iter)
    if finish and len(G):
        live = ~res.likely_empty
        if live.any():
            pts, ok = kkt_finish(G, h, X[live], res.points[live], tol_feas)
            res.points[live] = pts
            idx = np.flatnonzero(live)
            res.converged[idx[ok]] = True
        res.violation = np.maximum(violation(G, h, res.points), 0.0)
    return res


def cone_rays(G, tol=1e-10) -> np.ndarray:
    """Generators of the polyhedral cone ``{w : G w <= 0}``.

    Returns ``+-`` a basis of the lineality space together with the extreme
    rays of the pointed part, found by brute-force enumeration of
    ``rank - 1`` active rows.  Intended for small dimensions only.
    """
    G = np.asarray(G, dtype=float)
    d = G.shape[1]
    G = G[np.linalg.norm(G, axis=1) > 0]
    B = null_space(G) if len(G) else np.eye(d)
    gens = [b for b in B.T] + [-b for b in B.T]
    rank = d - B.shape[1]
    if rank == 0:
        return np.array(gens).reshape(-1, d)
    Gn = G / np.linalg.norm(G, axis=1)[:, None]
    rays = []
    for S in combinations(range(len(Gn)), rank - 1):
        rows = [Gn[list(S)]] if S else []
        A = np.vstack(rows + [B.T]) if (rows or B.shape[1]) else np.zeros((0, d))
        K = null_space(A) if len(A) else np.eye(d)
        if K.shape[1] != 1:
            continue
        k = K[:, 0]
        for cand in (k, -k):
            if np.all(Gn @ cand <= tol) and not any(np.allclose(cand, r, atol=1e-9) for r in rays):
                rays.append(cand)
    return np.array(gens + rays).reshape(-1, d)
