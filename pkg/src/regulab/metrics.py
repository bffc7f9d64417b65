"""Distances between points and sets, and Euclidean projections onto
closed convex sets.

Distances are extended reals: the distance to the empty set is ``INF``,
which compares greater than every finite float, and min/max reductions
over mixed values never produce NaN.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _solvers
from .core import INF, FixtureError, PointSet, as_vector

DEFAULT_PROJECTION_TOL = 1e-9
DEFAULT_RESIDUAL_TOL = 1e-7


def ext_min(values):
    """Minimum over a mix of finite values and INF; INF for empty input."""
    vals = [v for v in values if v != INF]
    if not vals:
        return INF
    return min(vals)


def ext_max(values):
    vals = list(values)
    if not vals:
        return -INF
    return INF if any(v == INF for v in vals) else max(vals)


def dist_point_set(x, S: PointSet):
    """Euclidean distance from x to the finite set S; INF when S is empty."""
    return S.dist(x)


# ------------------------------------------------------------- convex sets


class ConvexSet:
    """Projection-capable closed convex subset of R^n."""

    dim: int

    def project(self, u, tol=DEFAULT_PROJECTION_TOL):
        u = as_vector(u, self.dim)
        return self.project_many(u[None, :], tol)[0]

    def project_many(self, U, tol=DEFAULT_PROJECTION_TOL):
        raise NotImplementedError

    def contains(self, x, tol=DEFAULT_PROJECTION_TOL):
        x = as_vector(x, self.dim)
        return bool(np.linalg.norm(self.project(x, tol) - x) <= 10.0 * tol + 1e-15)

    def probe_grid(self, box, tol=DEFAULT_PROJECTION_TOL):
        """Grid points of ``box`` projected into the set, for VI probing."""
        return self.project_many(box.grid(), tol)


@dataclass(frozen=True)
class WholeSpace(ConvexSet):
    dim: int

    def project_many(self, U, tol=DEFAULT_PROJECTION_TOL):
        return np.atleast_2d(np.asarray(U, dtype=float)).copy()


@dataclass(frozen=True)
class Box(ConvexSet):
    lo: np.ndarray
    hi: np.ndarray
    dim: int = field(default=0)

    def __post_init__(self):
        object.__setattr__(self, "lo", as_vector(self.lo))
        object.__setattr__(self, "hi", as_vector(self.hi, self.lo.shape[0]))
        if not np.all(self.lo <= self.hi):
            raise FixtureError("box convex set needs lo <= hi")
        object.__setattr__(self, "dim", self.lo.shape[0])

    def project_many(self, U, tol=DEFAULT_PROJECTION_TOL):
        U = np.atleast_2d(np.asarray(U, dtype=float))
        return np.clip(U, self.lo, self.hi)


@dataclass(frozen=True)
class Ball(ConvexSet):
    center: np.ndarray
    radius: float
    dim: int = field(default=0)

    def __post_init__(self):
        object.__setattr__(self, "center", as_vector(self.center))
        if not self.radius > 0:
            raise FixtureError("ball radius must be positive")
        object.__setattr__(self, "dim", self.center.shape[0])

    def project_many(self, U, tol=DEFAULT_PROJECTION_TOL):
        U = np.atleast_2d(np.asarray(U, dtype=float))
        diff = U - self.center
        norms = np.linalg.norm(diff, axis=1)
        scale = np.ones_like(norms)
        outside = norms > self.radius
        scale[outside] = self.radius / norms[outside]
        return self.center + diff * scale[:, None]


@dataclass(frozen=True)
class Polyhedron(ConvexSet):
    """Intersection of halfspaces <a_i, x> <= b_i.

    Feasibility is certified at construction (Chebyshev center LP); an
    infeasible system is a fixture error.
    """

    A: np.ndarray
    b: np.ndarray
    dim: int = field(default=0)
    interior_point: np.ndarray = field(default=None)

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        b = np.asarray(self.b, dtype=float).ravel()
        if A.shape[0] != b.shape[0] or A.shape[0] == 0:
            raise FixtureError("polyhedron needs matching, nonempty A and b")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "dim", A.shape[1])
        if self.interior_point is None:
            pt = _solvers.feasible_point(A, b)
            if pt is None:
                raise FixtureError("polyhedron is infeasible")
            object.__setattr__(self, "interior_point", pt)
        else:
            object.__setattr__(self, "interior_point", as_vector(self.interior_point, self.dim))

    def violation(self, x):
        x = np.atleast_2d(x)
        return np.max(x @ self.A.T - self.b, axis=1)

    def project_many(self, U, tol=DEFAULT_PROJECTION_TOL):
        return _solvers.project_halfspaces(self.A, self.b, U, tol=tol)


def project(C: ConvexSet, u, tol=DEFAULT_PROJECTION_TOL):
    """Euclidean projection of u onto C (nearest point of C)."""
    if tol <= 0:
        raise ValueError("projection tolerance must be positive")
    return C.project(u, tol)


def project_many(C: ConvexSet, U, tol=DEFAULT_PROJECTION_TOL):
    return C.project_many(U, tol)


# -------------------------------------------- set-valued map distance pair


def dist_to_image(F, x, y, ybox, tol=DEFAULT_RESIDUAL_TOL):
    """dist(y, F(x)) within ybox; INF when x is outside dom F there."""
    from .map_model import forward_set

    S = forward_set(F, x, ybox, tol)
    return S.dist(y)


def dist_to_preimage(F, x, y, xbox, tol=DEFAULT_RESIDUAL_TOL):
    """dist(x, F^{-1}(y)) within xbox; INF when y is outside range F there."""
    from .map_model import inverse_set

    S = inverse_set(F, y, xbox, tol)
    return S.dist(x)
