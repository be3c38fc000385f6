"""Minimum-norm points of ``conv(V) + cone(N) + w``.

Each subproblem is

    min  | V^T lam + N^T mu + w |   over  lam in unit simplex, mu >= 0

with tiny V (k points) and N (p generators).  Many subproblems are solved
at once by padding to a common shape: repeating a point of V does not
change its hull and a zero generator does not change the cone.

Alongside the primal point, every solve reports a dual lower bound
obtained from the normalised primal point ``d``:

    |z| >= min_i <d, v_i> + <d, w>     whenever  <d, n_j> >= 0 for all j,

which is the quantity callers use when they need a guaranteed lower bound.
"""

from __future__ import annotations

from dataclasses import dataclass

from itertools import combinations
from math import comb

import numpy as np

from .linalg import simplex_project

MAX_SUPPORTS = 20000


@dataclass
class MinNormResult:
    lam: np.ndarray  # (S, k)
    mu: np.ndarray  # (S, p)
    point: np.ndarray  # (S, n)
    norm: np.ndarray  # (S,)
    lower: np.ndarray  # (S,) certified lower bound on the minimum norm
    gap: np.ndarray  # (S,) norm - lower
    iterations: int

    def first(self) -> "MinNormResult":
        return MinNormResult(self.lam[0], self.mu[0], self.point[0], float(self.norm[0]),
                             float(self.lower[0]), float(self.gap[0]), self.iterations)


def pad_stack(groups, dim):
    """Stack a list of (k_s, dim) arrays into (S, kmax, dim) with neutral padding.

    Empty groups become a single zero row.  Rows are padded by repeating the
    first row, which leaves both hulls and generated cones unchanged.
    """
    kmax = max([len(g) for g in groups] + [1])
    out = np.zeros((len(groups), kmax, dim))
    for s, g in enumerate(groups):
        g = np.asarray(g, dtype=float).reshape(-1, dim)
        if len(g):
            out[s, : len(g)] = g
            out[s, len(g):] = g[0]
    return out


def pad_cones(groups, dim):
    """Stack cone generator lists; padding uses zero generators."""
    pmax = max([len(g) for g in groups] + [0])
    out = np.zeros((len(groups), pmax, dim))
    for s, g in enumerate(groups):
        g = np.asarray(g, dtype=float).reshape(-1, dim)
        out[s, : len(g)] = g
    return out


def _repair_direction(d, N, sweeps=200):
    """Cyclic projections of d onto the halfspaces {<d, n_j> >= 0}."""
    if N.shape[1] == 0:
        return d
    nn = np.sum(N * N, axis=2)
    for _ in range(sweeps):
        worst = 0.0
        for j in range(N.shape[1]):
            dot = np.einsum("sn,sn->s", d, N[:, j])
            viol = np.where((dot < 0) & (nn[:, j] > 0), dot / np.where(nn[:, j] > 0, nn[:, j], 1.0), 0.0)
            d = d - viol[:, None] * N[:, j]
            worst = min(worst, float(np.min(dot)) if dot.size else 0.0)
        if worst >= 0.0:
            break
    return d


def dual_lower_bound(V, N, w, z, cone_tol=1e-12):
    """Certified lower bound on min |conv(V) + cone(N) + w| built from z."""
    nz = np.linalg.norm(z, axis=1)
    lower = np.zeros(len(z))
    ok = nz > 0
    if not np.any(ok):
        return lower
    d = np.zeros_like(z)
    d[ok] = z[ok] / nz[ok, None]
    d = _repair_direction(d, N)
    dn = np.linalg.norm(d, axis=1)
    ok &= dn > 0
    if N.shape[1]:
        Nn = np.linalg.norm(N, axis=2)
        dots = np.einsum("sn,sjn->sj", d, N)
        ok &= np.all(dots >= -cone_tol * np.maximum(Nn, 1e-300) * np.maximum(dn, 1e-300)[:, None], axis=1)
    vals = np.min(np.einsum("sn,skn->sk", d, V), axis=1) + np.einsum("sn,sn->s", d, w)
    lower[ok] = np.maximum(0.0, vals[ok] / dn[ok])
    return lower


def _n_supports(k, p, n):
    total = k + p
    return sum(comb(total, s) - comb(p, s) for s in range(1, min(total, n + 1) + 1))


def min_norm(V, N=None, w=None, method: str = "auto", certify: bool = True, **kw) -> MinNormResult:
    """Batched minimum-norm point of ``conv(V) + cone(N) + w``.

    ``method="enumerate"`` is exact: by Caratheodory the minimiser is carried
    by at most n+1 linearly independent generators (at least one from V),
    so it is the smallest feasible candidate among the least-squares
    solutions on all such supports.  ``method="pgd"`` runs accelerated
    projected gradient instead.  ``"auto"`` enumerates whenever the number
    of supports stays below ``MAX_SUPPORTS``.  With ``certify=False`` the
    enumeration skips the dual lower bound (``lower`` is then the norm).

    Parameters
    ----------
    V : array (S, k, n)
    N : array (S, p, n), optional
    w : array (S, n), optional
    """
    V = np.asarray(V, dtype=float)
    S, k, n = V.shape
    N = np.zeros((S, 0, n)) if N is None else np.asarray(N, dtype=float).reshape(S, -1, n)
    w = np.zeros((S, n)) if w is None else np.asarray(w, dtype=float).reshape(S, n)
    if method == "auto":
        method = "enumerate" if _n_supports(k, N.shape[1], n) <= MAX_SUPPORTS else "pgd"
    if method == "enumerate":
        return _min_norm_enumerate(V, N, w, certify=certify)
    if method == "pgd":
        return _min_norm_pgd(V, N, w, **kw)
    raise ValueError(f"unknown method {method!r}")


def _min_norm_enumerate(V, N, w, tol=1e-12, certify=True):
    S, k, n = V.shape
    p = N.shape[1]
    M = np.concatenate([V, N], axis=1)
    scale = max(1.0, float(np.max(np.abs(M))) if M.size else 1.0)
    best = np.full(S, np.inf)
    best_theta = np.zeros((S, k + p))
    for size in range(1, min(k + p, n + 1) + 1):
        for T in combinations(range(k + p), size):
            lam_idx = [i for i in T if i < k]
            if not lam_idx:
                continue
            b = lam_idx[0]
            rest = [i for i in T if i != b]
            a = V[:, b] + w
            theta = np.zeros((S, k + p))
            if rest:
                D = M[:, rest] - np.where(np.array(rest) < k, 1.0, 0.0)[None, :, None] * V[:, b][:, None, :]
                D = np.transpose(D, (0, 2, 1))  # (S, n, s)
                G = np.einsum("sni,snj->sij", D, D)
                sv = np.linalg.svd(D, compute_uv=False)
                full = sv[:, -1] > 1e-10 * np.maximum(sv[:, 0], 1e-300) * 1.0
                full &= sv[:, -1] > 1e-14 * scale
                G = np.where(full[:, None, None], G, np.eye(len(rest))[None])
                rhs = -np.einsum("sni,sn->si", D, a)
                coef = np.linalg.solve(G, rhs[..., None])[..., 0]
                z = a + np.einsum("sni,si->sn", D, coef)
                theta[:, rest] = coef
                theta[:, b] = 1.0 - np.sum(coef[:, np.array(rest) < k], axis=1)
            else:
                full = np.ones(S, dtype=bool)
                z = a
                theta[:, b] = 1.0
            feas = full & np.all(theta >= -tol, axis=1)
            nz = np.linalg.norm(z, axis=1)
            upd = feas & (nz < best - 1e-15)
            best[upd] = nz[upd]
            best_theta[upd] = theta[upd]
    theta = np.maximum(best_theta, 0.0)
    theta[:, :k] /= np.sum(theta[:, :k], axis=1, keepdims=True)
    z = np.einsum("sk,skn->sn", theta, M) + w
    nz = np.linalg.norm(z, axis=1)
    lower = np.minimum(dual_lower_bound(V, N, w, z), nz) if certify else nz
    return MinNormResult(theta[:, :k], theta[:, k:], z, nz, lower, nz - lower, 0)


def _min_norm_pgd(V, N, w, max_iter: int = 10000, tol_gap: float = 1e-10,
                  check_every: int = 10) -> MinNormResult:
    """Accelerated projected gradient (fixed step ``1/L`` with Nesterov
    momentum and adaptive restart) on the joint variable (lam, mu);
    ``L`` is the squared Frobenius norm of the stacked generators, an upper
    bound of the Lipschitz constant of the gradient.
    """
    S, k, n = V.shape
    p = N.shape[1]
    M = np.concatenate([V, N], axis=1)  # (S, k+p, n)
    L = np.sum(M * M, axis=(1, 2))
    L = np.where(L > 0, L, 1.0)

    theta = np.concatenate([np.full((S, k), 1.0 / k), np.zeros((S, p))], axis=1)
    y = theta.copy()
    t = np.ones(S)
    active = np.ones(S, dtype=bool)
    lower = np.zeros(S)
    it = 0

    def point(th, idx):
        return np.einsum("sk,skn->sn", th, M[idx]) + w[idx]

    def project(th):
        out = th.copy()
        out[:, :k] = simplex_project(th[:, :k])
        out[:, k:] = np.maximum(th[:, k:], 0.0)
        return out

    f_prev = np.full(S, np.inf)
    for it in range(1, max_iter + 1):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        zy = point(y[idx], idx)
        grad = np.einsum("skn,sn->sk", M[idx], zy)
        th_new = project(y[idx] - grad / L[idx, None])
        z_new = point(th_new, idx)
        f_new = np.einsum("sn,sn->s", z_new, z_new)
        t_new = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t[idx] ** 2))
        mom = ((t[idx] - 1.0) / t_new)[:, None] * (th_new - theta[idx])
        restart = f_new > f_prev[idx]
        y_new = np.where(restart[:, None], th_new, th_new + mom)
        t_new = np.where(restart, 1.0, t_new)
        theta[idx] = th_new
        y[idx] = y_new
        t[idx] = t_new
        f_prev[idx] = f_new
        if it % check_every == 0 or it == max_iter:
            lb = dual_lower_bound(V[idx], N[idx], w[idx], z_new)
            lower[idx] = np.maximum(lower[idx], lb)
            nz = np.sqrt(f_new)
            done = (nz - lower[idx] <= tol_gap * np.maximum(1.0, nz)) | (nz <= tol_gap)
            active[idx[done]] = False

    z = point(theta, np.arange(S))
    nz = np.linalg.norm(z, axis=1)
    lower = np.maximum(lower, dual_lower_bound(V, N, w, z))
    lower = np.minimum(lower, nz)
    return MinNormResult(theta[:, :k], theta[:, k:], z, nz, lower, nz - lower, it)


def min_norm_single(V, N=None, w=None, **kw) -> MinNormResult:
    """Unbatched convenience wrapper around :func:`min_norm`."""
    V = np.atleast_2d(np.asarray(V, dtype=float))
    n = V.shape[1]
    N = np.zeros((0, n)) if N is None or len(N) == 0 else np.atleast_2d(np.asarray(N, dtype=float))
    w = np.zeros(n) if w is None else np.asarray(w, dtype=float)
    return min_norm(V[None], N[None], w[None], **kw).first()


def nnls(M, Y, max_iter: int = 20000) -> np.ndarray:
    """Nonnegative least squares ``min_{c >= 0} |M c - y|`` for each row y of Y.

    Solved as the minimum-norm point of ``cone(columns of M) - y``; small
    instances are exact, large ones fall back to accelerated projected
    gradient with step ``1/L``.

    Parameters
    ----------
    M : array (d, p)
        Generators as columns.
    Y : array (d,) or (N, d)

    Returns
    -------
    numpy.ndarray
        Coefficients, shape (p,) or (N, p).
    """
    M = np.asarray(M, dtype=float)
    Y = np.asarray(Y, dtype=float)
    single = Y.ndim == 1
    Y = np.atleast_2d(Y)
    d, p = M.shape
    if p == 0:
        out = np.zeros((len(Y), 0))
        return out[0] if single else out
    gens = np.broadcast_to(M.T, (len(Y), p, d))
    res = min_norm(-Y[:, None, :], gens, certify=False, max_iter=max_iter)
    return res.mu[0] if single else res.mu


def polar_membership(generators, v, tol_dual: float = 1e-8):
    """Is ``v`` in the cone generated by ``generators``?

    Decided by the nonnegative least-squares residual
    ``min_{c >= 0} |sum c_i g_i - v| <= tol_dual``.  ``v`` may be a batch
    of vectors (rows), in which case a boolean array is returned.
    """
    V = np.asarray(v, dtype=float)
    single = V.ndim == 1
    V = np.atleast_2d(V)
    G = np.asarray(generators, dtype=float).reshape(-1, V.shape[1])
    if len(G) == 0:
        out = np.linalg.norm(V, axis=1) <= tol_dual
    else:
        c = nnls(G.T, V)
        out = np.linalg.norm(c @ G - V, axis=1) <= tol_dual
    return bool(out[0]) if single else out
