"""Closed convex sets with projection, support and normal-cone data.

Every set knows its ambient dimension and projects points batched along the
leading axis: ``S.project(x)`` accepts shape ``(d,)`` or ``(N, d)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from ..errors import PreconditionError, ProjectionError, UnsupportedOperation
from .minnorm import nnls, polar_membership
from .polyhedral import TOL_FEAS, TOL_PROJ, cone_rays, is_empty, project_polyhedron

TOL_ACTIVE = 1e-8
TOL_DUAL = 1e-8


def _vec(x, name="vector") -> np.ndarray:
    v = np.asarray(x, dtype=float)
    if v.ndim != 1 or v.size == 0:
        raise ValueError(f"{name} must be a non-empty 1-D array, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} has non-finite entries")
    return v


def _batch(S, x):
    X = np.asarray(x, dtype=float)
    single = X.ndim == 1
    X = np.atleast_2d(X)
    if X.shape[-1] != S.dim:
        raise PreconditionError(f"point of dimension {X.shape[-1]} does not match set of dimension {S.dim}")
    return X, single


def _unbatch(Y, single):
    return Y[0] if single else Y


class ConvexSet:
    """Base class; subclasses are frozen dataclasses."""

    kind: str = ""
    is_cone: bool = False
    is_polyhedral: bool = True

    @property
    def dim(self) -> int:
        raise NotImplementedError

    def project(self, x) -> np.ndarray:
        raise NotImplementedError

    def contains(self, x, tol: float = TOL_FEAS):
        X, single = _batch(self, x)
        d = np.linalg.norm(self.project(X) - X, axis=1)
        return _unbatch(d <= tol, single)

    def halfspaces(self) -> tuple[np.ndarray, np.ndarray]:
        """An H-representation ``(G, h)`` with nonzero rows."""
        raise UnsupportedOperation(f"{self.kind} has no halfspace representation")

    def support(self, u):
        raise UnsupportedOperation(f"support function not available for {self.kind}")

    def polar_generators(self) -> np.ndarray:
        raise UnsupportedOperation(f"{self.kind} is not a cone")

    def normal_cone_generators(self, x, tol_active: float = TOL_ACTIVE, tol_feas: float = TOL_FEAS) -> np.ndarray:
        x = _vec(x, "point")
        self._require_member(x, tol_feas)
        G, h = self.halfspaces()
        nrm = np.linalg.norm(G, axis=1)
        act = np.abs(G @ x - h) <= tol_active * nrm
        return G[act].reshape(-1, self.dim)

    def to_json(self) -> dict:
        raise NotImplementedError

    def _require_member(self, x, tol_feas):
        if not bool(self.contains(x, max(tol_feas, 1e-7))):
            gap = float(np.linalg.norm(self.project(x) - x))
            raise PreconditionError(f"point is not in the {self.kind} set (distance {gap:.3g})")

    def _cone_support(self, u):
        """Support of a cone: 0 on the polar, +inf elsewhere."""
        U = np.atleast_2d(np.asarray(u, dtype=float))
        inside = polar_membership(self.polar_generators(), U, TOL_DUAL)
        out = np.where(inside, 0.0, np.inf)
        return float(out[0]) if np.ndim(u) == 1 else out


@dataclass(frozen=True, eq=False)
class NonnegOrthant(ConvexSet):
    n: int
    kind = "nonneg_orthant"
    is_cone = True

    @property
    def dim(self):
        return self.n

    def project(self, x):
        return np.maximum(np.asarray(x, dtype=float), 0.0)

    def contains(self, x, tol=TOL_FEAS):
        return np.all(np.asarray(x) >= -tol, axis=-1)

    def halfspaces(self):
        return -np.eye(self.n), np.zeros(self.n)

    def support(self, u):
        u = np.asarray(u, dtype=float)
        return np.where(np.all(u <= TOL_DUAL, axis=-1), 0.0, np.inf)[()]

    def polar_generators(self):
        return -np.eye(self.n)

    def to_json(self):
        return {"type": self.kind, "dim": self.n}


@dataclass(frozen=True, eq=False)
class NonposOrthant(ConvexSet):
    n: int
    kind = "nonpos_orthant"
    is_cone = True

    @property
    def dim(self):
        return self.n

    def project(self, x):
        return np.minimum(np.asarray(x, dtype=float), 0.0)

    def contains(self, x, tol=TOL_FEAS):
        return np.all(np.asarray(x) <= tol, axis=-1)

    def halfspaces(self):
        return np.eye(self.n), np.zeros(self.n)

    def support(self, u):
        u = np.asarray(u, dtype=float)
        return np.where(np.all(u >= -TOL_DUAL, axis=-1), 0.0, np.inf)[()]

    def polar_generators(self):
        return np.eye(self.n)

    def to_json(self):
        return {"type": self.kind, "dim": self.n}


@dataclass(frozen=True, eq=False)
class Box(ConvexSet):
    lo: np.ndarray
    hi: np.ndarray
    kind = "box"

    def __post_init__(self):
        lo, hi = _vec(self.lo, "lo"), _vec(self.hi, "hi")
        if lo.shape != hi.shape:
            raise ValueError("box bounds have different dimensions")
        if np.any(lo > hi):
            raise ValueError("box requires lo <= hi componentwise")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def dim(self):
        return self.lo.size

    def project(self, x):
        return np.clip(np.asarray(x, dtype=float), self.lo, self.hi)

    def contains(self, x, tol=TOL_FEAS):
        x = np.asarray(x)
        return np.all((x >= self.lo - tol) & (x <= self.hi + tol), axis=-1)

    def halfspaces(self):
        n = self.dim
        return np.vstack([np.eye(n), -np.eye(n)]), np.concatenate([self.hi, -self.lo])

    def support(self, u):
        u = np.asarray(u, dtype=float)
        return np.sum(np.maximum(u * self.lo, u * self.hi), axis=-1)[()]

    def to_json(self):
        return {"type": self.kind, "lo": self.lo.tolist(), "hi": self.hi.tolist()}


@dataclass(frozen=True, eq=False)
class Ball(ConvexSet):
    center: np.ndarray
    radius: float
    kind = "ball"
    is_polyhedral = False

    def __post_init__(self):
        object.__setattr__(self, "center", _vec(self.center, "center"))
        r = float(self.radius)
        if not np.isfinite(r) or r < 0:
            raise ValueError("ball radius must be a finite nonnegative number")
        object.__setattr__(self, "radius", r)

    @property
    def dim(self):
        return self.center.size

    def project(self, x):
        X = np.asarray(x, dtype=float)
        D = X - self.center
        nrm = np.linalg.norm(D, axis=-1, keepdims=True)
        scale = np.where(nrm > self.radius, self.radius / np.where(nrm > 0, nrm, 1.0), 1.0)
        return self.center + D * scale

    def contains(self, x, tol=TOL_FEAS):
        return np.linalg.norm(np.asarray(x) - self.center, axis=-1) <= self.radius + tol

    def support(self, u):
        u = np.asarray(u, dtype=float)
        return (u @ self.center + self.radius * np.linalg.norm(u, axis=-1))[()]

    def normal_cone_generators(self, x, tol_active=TOL_ACTIVE, tol_feas=TOL_FEAS):
        x = _vec(x, "point")
        self._require_member(x, tol_feas)
        if self.radius == 0.0:
            e = np.eye(self.dim)
            return np.vstack([e, -e])
        d = x - self.center
        nd = float(np.linalg.norm(d))
        if nd >= self.radius - tol_active * max(1.0, self.radius):
            return (d / nd)[None, :]
        return np.zeros((0, self.dim))

    def to_json(self):
        return {"type": self.kind, "center": self.center.tolist(), "radius": self.radius}


@dataclass(frozen=True, eq=False)
class Halfspaces(ConvexSet):
    """The polyhedron ``{x : G x <= h}``; with ``h = 0`` a polyhedral cone."""

    G: np.ndarray
    h: np.ndarray
    tol_proj: float = field(default=TOL_PROJ, repr=False)
    kind = "halfspaces"

    def __post_init__(self):
        G = np.atleast_2d(np.asarray(self.G, dtype=float))
        h = np.asarray(self.h, dtype=float).reshape(-1)
        if G.ndim != 2 or G.shape[0] != h.size or G.shape[1] == 0:
            raise ValueError(f"halfspace data has inconsistent shapes G{G.shape}, h{h.shape}")
        if not (np.all(np.isfinite(G)) and np.all(np.isfinite(h))):
            raise ValueError("halfspace data has non-finite entries")
        if np.any(np.linalg.norm(G, axis=1) == 0):
            raise ValueError("halfspace rows must be nonzero")
        object.__setattr__(self, "G", G)
        object.__setattr__(self, "h", h)

    @property
    def dim(self):
        return self.G.shape[1]

    @property
    def is_cone(self):
        return bool(np.all(self.h == 0))

    @cached_property
    def empty(self) -> bool:
        return is_empty(self.G, self.h)

    def project(self, x):
        X, single = _batch(self, x)
        res = project_polyhedron(self.G, self.h, X, tol_proj=self.tol_proj, empty=self.empty)
        if np.any(res.likely_empty) or not np.all(res.converged):
            bad = int(np.flatnonzero(~res.converged)[0])
            raise ProjectionError("projection onto halfspace system did not converge",
                                  last=res.points[bad], gap=float(res.violation[bad]))
        return _unbatch(res.points, single)

    def contains(self, x, tol=TOL_FEAS):
        X = np.asarray(x, dtype=float)
        nrm = np.linalg.norm(self.G, axis=1)
        return np.all((X @ self.G.T - self.h) / nrm <= tol, axis=-1)

    def halfspaces(self):
        return self.G.copy(), self.h.copy()

    def support(self, u):
        if not self.is_cone:
            raise UnsupportedOperation("support function of a general polyhedron needs an LP solver")
        return self._cone_support(u)

    def polar_generators(self):
        if not self.is_cone:
            raise UnsupportedOperation("halfspace system with h != 0 is not a cone")
        return self.G.copy()

    def to_json(self):
        return {"type": self.kind, "G": self.G.tolist(), "h": self.h.tolist()}


@dataclass(frozen=True, eq=False)
class FinGenCone(ConvexSet):
    """The cone generated by finitely many vectors (rows of ``generators``)."""

    generators: np.ndarray
    n: int | None = None
    kind = "fingen_cone"
    is_cone = True

    def __post_init__(self):
        V = np.asarray(self.generators, dtype=float)
        n = self.n
        if V.size == 0:
            if n is None:
                raise ValueError("an empty generator list needs an explicit dimension")
            V = np.zeros((0, n))
        V = np.atleast_2d(V)
        if n is not None and V.shape[1] != n:
            raise ValueError("generator dimension does not match dim")
        if not np.all(np.isfinite(V)):
            raise ValueError("generators have non-finite entries")
        object.__setattr__(self, "generators", V)
        object.__setattr__(self, "n", V.shape[1])

    @property
    def dim(self):
        return self.n

    def project(self, x):
        X, single = _batch(self, x)
        if len(self.generators) == 0:
            return _unbatch(np.zeros_like(X), single)
        c = nnls(self.generators.T, X)
        return _unbatch(c @ self.generators, single)

    def halfspaces(self):
        W = self.polar_generators()
        return W, np.zeros(len(W))

    def support(self, u):
        U = np.atleast_2d(np.asarray(u, dtype=float))
        if len(self.generators) == 0:
            out = np.zeros(len(U))
        else:
            gn = np.linalg.norm(self.generators, axis=1)
            ok = np.all(U @ self.generators.T <= TOL_DUAL * np.maximum(gn, 1e-300), axis=1)
            out = np.where(ok, 0.0, np.inf)
        return float(out[0]) if np.ndim(u) == 1 else out

    def polar_generators(self):
        if len(self.generators) == 0:
            e = np.eye(self.n)
            return np.vstack([e, -e])
        return cone_rays(self.generators)

    def normal_cone_generators(self, x, tol_active=TOL_ACTIVE, tol_feas=TOL_FEAS):
        raise UnsupportedOperation("normal cones of finitely generated cones are not supported")

    def to_json(self):
        return {"type": self.kind, "generators": self.generators.tolist(), "dim": self.n}


@dataclass(frozen=True, eq=False)
class Singleton(ConvexSet):
    point: np.ndarray
    kind = "singleton"

    def __post_init__(self):
        object.__setattr__(self, "point", _vec(self.point, "point"))

    @property
    def dim(self):
        return self.point.size

    @property
    def is_cone(self):
        return bool(np.all(self.point == 0))

    def project(self, x):
        return np.broadcast_to(self.point, np.shape(x)).copy()

    def contains(self, x, tol=TOL_FEAS):
        return np.linalg.norm(np.asarray(x) - self.point, axis=-1) <= tol

    def halfspaces(self):
        e = np.eye(self.dim)
        return np.vstack([e, -e]), np.concatenate([self.point, -self.point])

    def support(self, u):
        return (np.asarray(u, dtype=float) @ self.point)[()]

    def polar_generators(self):
        if not self.is_cone:
            raise UnsupportedOperation("a nonzero singleton is not a cone")
        e = np.eye(self.dim)
        return np.vstack([e, -e])

    def normal_cone_generators(self, x, tol_active=TOL_ACTIVE, tol_feas=TOL_FEAS):
        self._require_member(_vec(x, "point"), tol_feas)
        e = np.eye(self.dim)
        return np.vstack([e, -e])

    def to_json(self):
        return {"type": self.kind, "point": self.point.tolist()}


@dataclass(frozen=True, eq=False)
class WholeSpace(ConvexSet):
    n: int
    kind = "whole"
    is_cone = True

    @property
    def dim(self):
        return self.n

    def project(self, x):
        return np.array(x, dtype=float)

    def contains(self, x, tol=TOL_FEAS):
        return np.ones(np.shape(x)[:-1], dtype=bool)[()]

    def halfspaces(self):
        return np.zeros((0, self.n)), np.zeros(0)

    def support(self, u):
        u = np.asarray(u, dtype=float)
        return np.where(np.linalg.norm(u, axis=-1) <= TOL_DUAL, 0.0, np.inf)[()]

    def polar_generators(self):
        return np.zeros((0, self.n))

    def normal_cone_generators(self, x, tol_active=TOL_ACTIVE, tol_feas=TOL_FEAS):
        _vec(x, "point")
        return np.zeros((0, self.n))

    def to_json(self):
        return {"type": self.kind, "dim": self.n}


# -- functional interface ----------------------------------------------------


def project(S: ConvexSet, x) -> tuple[np.ndarray, float]:
    """Nearest point of S to x and the distance to it."""
    x = _vec(x, "point")
    if x.size != S.dim:
        raise PreconditionError(f"point of dimension {x.size} does not match set of dimension {S.dim}")
    p = S.project(x)
    return p, float(np.linalg.norm(x - p))


def distance(S: ConvexSet, x) -> float:
    return project(S, x)[1]


def distances(S: ConvexSet, X) -> np.ndarray:
    """Row-wise distances from a batch of points."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    return np.linalg.norm(X - S.project(X), axis=1)


def support(S: ConvexSet, u):
    """Support function ``sup_{y in S} <y, u>`` (may be ``inf``)."""
    return S.support(u)


def polar_generators(S: ConvexSet) -> np.ndarray:
    """Generators (rows) of the negative dual cone of a cone S."""
    return S.polar_generators()


def normal_cone_generators(S: ConvexSet, x, tol_active: float = TOL_ACTIVE) -> np.ndarray:
    return S.normal_cone_generators(x, tol_active)


def is_pointed_cone(S: ConvexSet) -> bool:
    """``S & (-S) == {0}`` for a cone variant."""
    if isinstance(S, (NonnegOrthant, NonposOrthant)):
        return True
    if isinstance(S, (WholeSpace,)):
        return False
    if isinstance(S, Singleton) and S.is_cone:
        return True
    if isinstance(S, Halfspaces) and S.is_cone:
        return np.linalg.matrix_rank(S.G) == S.dim
    if isinstance(S, FinGenCone):
        W = S.polar_generators()
        return len(W) > 0 and np.linalg.matrix_rank(W) == S.dim
    raise UnsupportedOperation(f"{S.kind} is not a cone variant")


def interior_empty(S: ConvexSet) -> bool:
    """Does the polyhedral set have empty interior?"""
    if isinstance(S, (NonnegOrthant, NonposOrthant, WholeSpace)):
        return False
    if isinstance(S, Box):
        return bool(np.any(S.hi <= S.lo))
    if isinstance(S, Singleton):
        return True
    if isinstance(S, Ball):
        return S.radius == 0
    if isinstance(S, Halfspaces) and S.is_cone:
        # Gordan: {Gy < 0} is empty iff 0 lies in the hull of the normalised rows.
        from .minnorm import min_norm_single

        Gn = S.G / np.linalg.norm(S.G, axis=1)[:, None]
        return min_norm_single(Gn).norm <= TOL_DUAL
    raise UnsupportedOperation(f"interior test not available for {S.kind}")


_KINDS = {
    "nonneg_orthant": NonnegOrthant,
    "nonpos_orthant": NonposOrthant,
    "box": Box,
    "ball": Ball,
    "halfspaces": Halfspaces,
    "fingen_cone": FinGenCone,
    "singleton": Singleton,
    "whole": WholeSpace,
}


def from_json(obj: dict) -> ConvexSet:
    """Build a set from its JSON encoding (see :meth:`ConvexSet.to_json`)."""
    kind = obj["type"]
    if kind in ("nonneg_orthant", "nonpos_orthant", "whole"):
        return _KINDS[kind](int(obj["dim"]))
    if kind == "box":
        return Box(obj["lo"], obj["hi"])
    if kind == "ball":
        return Ball(obj["center"], obj["radius"])
    if kind == "halfspaces":
        return Halfspaces(obj["G"], obj["h"])
    if kind == "fingen_cone":
        return FinGenCone(obj["generators"], obj.get("dim"))
    if kind == "singleton":
        return Singleton(obj["point"])
    raise ValueError(f"unknown set type {kind!r}")
