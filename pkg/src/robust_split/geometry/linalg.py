"""Small dense linear-algebra kernels.

Everything here targets desk-scale problems (dimensions in the single or low
double digits), so the routines favour transparency over raw speed.  Batched
variants operate on the leading axis.
"""

from __future__ import annotations

import math

import numpy as np

TOL_EIG = 1e-12


def as_matrix(A) -> np.ndarray:
    M = np.atleast_2d(np.asarray(A, dtype=float))
    if M.ndim != 2 or M.size == 0:
        raise ValueError(f"expected a non-empty 2-D matrix, got shape {np.shape(A)}")
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix has non-finite entries")
    return M


def jacobi_eigenvalues(S, tol: float = TOL_EIG, max_sweeps: int = 100) -> np.ndarray:
    """Eigenvalues of a symmetric matrix by the cyclic Jacobi method.

    Sweeps over all off-diagonal pairs with classical 2x2 Schur rotations
    until the off-diagonal Frobenius norm drops below ``tol`` (relative to
    ``max(1, ||S||_F)``).

    Returns
    -------
    numpy.ndarray
        Eigenvalues in ascending order.
    """
    A = as_matrix(S).copy()
    n, m = A.shape
    if n != m:
        raise ValueError(f"matrix must be square, got {A.shape}")
    scale = max(1.0, float(np.max(np.abs(A))))
    if np.max(np.abs(A - A.T)) > 1e-12 * scale:
        raise ValueError("matrix is not symmetric")
    A = 0.5 * (A + A.T)
    thresh = tol * max(1.0, float(np.linalg.norm(A)))
    for _ in range(max_sweeps):
        off = math.sqrt(max(0.0, float(np.sum(A * A) - np.sum(np.diag(A) ** 2))))
        if off <= thresh:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                diff = A[q, q] - A[p, p]
                if abs(diff) > 1e150 * abs(apq):
                    t = apq / diff
                else:
                    theta = diff / (2.0 * apq)
                    t = (1.0 if theta >= 0 else -1.0) / (abs(theta) + math.sqrt(1.0 + theta * theta))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                rp = A[p, :].copy()
                rq = A[q, :].copy()
                A[p, :] = c * rp - s * rq
                A[q, :] = s * rp + c * rq
                cp = A[:, p].copy()
                cq = A[:, q].copy()
                A[:, p] = c * cp - s * cq
                A[:, q] = s * cp + c * cq
                A[p, q] = A[q, p] = 0.0
    return np.sort(np.diag(A))


def lambda_extremes_sym(S, tol: float = TOL_EIG) -> tuple[float, float]:
    """Smallest and largest eigenvalue of a symmetric matrix."""
    ev = jacobi_eigenvalues(S, tol=tol)
    return float(ev[0]), float(ev[-1])


def operator_norm(A, tol: float = TOL_EIG) -> float:
    """Spectral norm, ``sqrt(lambda_max(A^T A))``."""
    M = as_matrix(A)
    return math.sqrt(max(0.0, lambda_extremes_sym(M.T @ M, tol)[1]))


def sur(A, tol: float = TOL_EIG) -> float:
    """Exact covering bound ``min_{|u|=1} |A^T u|`` (smallest singular value
    of ``A^T`` over the row space of the identity on R^m)."""
    M = as_matrix(A)
    return math.sqrt(max(0.0, lambda_extremes_sym(M @ M.T, tol)[0]))


def simplex_project(w) -> np.ndarray:
    """Euclidean projection onto the unit simplex, row-wise for 2-D input.

    Sort-based threshold algorithm (Held, Wolfe & Crowder; Duchi et al.).
    """
    W = np.asarray(w, dtype=float)
    single = W.ndim == 1
    W = np.atleast_2d(W)
    k = W.shape[1]
    U = -np.sort(-W, axis=1)
    css = np.cumsum(U, axis=1) - 1.0
    idx = np.arange(1, k + 1)
    cond = U - css / idx > 0
    rho = k - 1 - np.argmax(cond[:, ::-1], axis=1)
    theta = css[np.arange(W.shape[0]), rho] / (rho + 1.0)
    out = np.maximum(W - theta[:, None], 0.0)
    return out[0] if single else out


def null_space(A, rtol: float = 1e-10) -> np.ndarray:
    """Orthonormal basis of ker A as columns (numerical, via SVD)."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    n = A.shape[1]
    if A.shape[0] == 0:
        return np.eye(n)
    _, s, vt = np.linalg.svd(A)
    rank = int(np.sum(s > rtol * max(1.0, s[0] if s.size else 0.0)))
    return vt[rank:].T.copy()
