"""Computable representations of set-valued maps F: R^n =(set)=> R^m.

Four kinds are supported:

* ``SingleValued`` -- each component given by an expression (or, for
  internally constructed maps such as normal maps, a vectorized callable);
* ``Polyhedral`` -- the graph is a finite union of convex polyhedra in
  R^{n+m}, each a list of affine inequalities;
* ``Inverse`` -- lazy inverse of another map;
* ``GraphSample`` -- a finite list of (x, y) graph points.

All queries are restricted to analysis boxes and return finite PointSets;
the empty PointSet is a valid answer and yields INF distances downstream.
Models are immutable after construction and queries are pure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _solvers, expr
from .core import AnalysisBox, FixtureError, PointSet, as_vector, dedup_points

DEFAULT_TOL = 1e-7

# grid cells whose seed the root search starts from; per-axis defaults
DEFAULT_SEED_RESOLUTION = {1: 64, 2: 24, 3: 10}


def dedup_radius(tol, box: AnalysisBox):
    """Merge radius for nearby roots: 10 sqrt(tol) scaled by box diameter."""
    return 10.0 * math.sqrt(tol) * box.diameter


class MapModel:
    """Base class; concrete kinds implement the forward/inverse queries."""

    n: int
    m: int

    def forward(self, x, ybox, tol):
        raise NotImplementedError

    def inverse(self, y, xbox, tol):
        raise NotImplementedError


@dataclass(frozen=True)
class SingleValued(MapModel):
    exprs: tuple
    n: int = field(default=0)
    m: int = field(default=0)
    fn: object = field(default=None, compare=False)  # vectorized (N,n)->(N,m)
    label: str = ""

    def __post_init__(self):
        if self.fn is None:
            exprs = tuple(
                e if isinstance(e, expr.Expression) else expr.parse(e) for e in self.exprs
            )
            n = self.n or max((max(e.free_vars(), default=0) for e in exprs), default=0)
            n = max(n, 1)
            exprs = tuple(expr.Expression(e.ast, n, e.source) for e in exprs)
            object.__setattr__(self, "exprs", exprs)
            object.__setattr__(self, "n", n)
            object.__setattr__(self, "m", len(exprs))
        else:
            if not (self.n and self.m):
                raise FixtureError("callable single-valued maps must declare n and m")
            object.__setattr__(self, "exprs", ())

    def eval_many(self, X):
        """Vectorized map values; non-finite rows mark domain failures."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if self.fn is not None:
            return np.atleast_2d(np.asarray(self.fn(X), dtype=float)).reshape(X.shape[0], self.m)
        cols = [expr.eval_many(e, X) for e in self.exprs]
        return np.stack(cols, axis=-1)

    def eval_point(self, x):
        """Scalar evaluation with domain-error context."""
        x = as_vector(x, self.n)
        if self.fn is not None:
            return self.eval_many(x[None, :])[0]
        return np.array([expr.evaluate(e, x) for e in self.exprs])

    def forward(self, x, ybox, tol):
        y = self.eval_point(x)
        rad = dedup_radius(tol, ybox)
        slack = 1e-9 * (1.0 + ybox.diameter)
        if np.all(np.isfinite(y)) and ybox.contains(y[None, :], slack)[0]:
            return PointSet.from_points(y[None, :], tol, rad)
        return PointSet.empty(self.m, tol)

    def inverse(self, y, xbox, tol):
        y = as_vector(y, self.m)
        # relative acceptance for tiny targets keeps tiny fibers honest:
        # with a plain absolute tolerance every near-zero of F would be
        # accepted as a preimage of a near-zero target
        ynorm = float(np.linalg.norm(y))
        tol_eff = min(tol, 1e-3 * ynorm) if ynorm > 0 else tol
        scale = tol_eff / tol

        def resfun(X):
            return (self.eval_many(X) - y) / scale

        seeds = _seed_grid(xbox, self.n)
        roots = _solvers.multistart_roots(resfun, seeds, tol, box=xbox)
        # dedup on the scale of the acceptance band (absolute part), plus a
        # relative part matching the location blur of the relative residual
        # test: tiny fibers keep distinct points, duplicates of one tiny
        # root still merge; then polish each representative to machine
        # precision so fiber locations do not inherit the band blur
        rad = dedup_radius(tol_eff, xbox)
        if roots.size:
            roots = dedup_points(roots, rad, rel=1e-2)
            roots = _solvers.polish_roots(resfun, roots, box=xbox)
        return PointSet.from_points(roots, tol, rad, dedup_rel=1e-2)


@dataclass(frozen=True)
class Polyhedral(MapModel):
    """Graph pieces are convex polyhedra {z in R^{n+m} | A z <= b}."""

    pieces: tuple  # of (A, b)
    n: int
    m: int

    def __post_init__(self):
        pieces = []
        for A, b in self.pieces:
            A = np.atleast_2d(np.asarray(A, dtype=float))
            b = np.asarray(b, dtype=float).ravel()
            if A.shape[1] != self.n + self.m:
                raise FixtureError(
                    f"polyhedral piece has width {A.shape[1]}, expected n+m={self.n + self.m}"
                )
            if A.shape[0] != b.shape[0]:
                raise FixtureError("polyhedral piece has mismatched A and b")
            pieces.append((A, b))
        object.__setattr__(self, "pieces", tuple(pieces))

    def _slice(self, fixed, box, tol, fix_x):
        """Points of each piece's slice with the x- (or y-) block fixed."""
        found = []
        grid = _seed_grid(box, box.dim)
        for A, b in self.pieces:
            if fix_x:
                A_fix, A_free = A[:, : self.n], A[:, self.n :]
            else:
                A_free, A_fix = A[:, : self.n], A[:, self.n :]
            rhs = b - A_fix @ fixed
            proj = _solvers.project_halfspaces(A_free, rhs, grid, tol=0.01 * tol, max_cycles=5000)
            viol = np.max(proj @ A_free.T - rhs, axis=1)
            ok = (viol <= tol) & box.contains(proj, slack=1e-9 * (1.0 + box.diameter))
            if np.any(ok):
                found.append(proj[ok])
        if not found:
            return PointSet.empty(box.dim, tol)
        return PointSet.from_points(np.vstack(found), tol, dedup_radius(tol, box))

    def forward(self, x, ybox, tol):
        return self._slice(as_vector(x, self.n), ybox, tol, fix_x=True)

    def inverse(self, y, xbox, tol):
        return self._slice(as_vector(y, self.m), xbox, tol, fix_x=False)


@dataclass(frozen=True)
class Inverse(MapModel):
    inner: MapModel

    @property
    def n(self):
        return self.inner.m

    @property
    def m(self):
        return self.inner.n

    def forward(self, x, ybox, tol):
        return self.inner.inverse(x, ybox, tol)

    def inverse(self, y, xbox, tol):
        return self.inner.forward(y, xbox, tol)


@dataclass(frozen=True)
class GraphSample(MapModel):
    pairs: tuple  # of (x, y) vectors
    n: int
    m: int

    def __post_init__(self):
        pairs = tuple(
            (as_vector(x, self.n), as_vector(y, self.m)) for x, y in self.pairs
        )
        object.__setattr__(self, "pairs", pairs)

    def forward(self, x, ybox, tol):
        x = as_vector(x, self.n)
        hits = [y for (xp, y) in self.pairs if np.linalg.norm(xp - x) <= tol]
        hits = [y for y in hits if ybox.contains(y[None, :], 1e-12)[0]]
        if not hits:
            return PointSet.empty(self.m, tol)
        return PointSet.from_points(np.array(hits), tol, dedup_radius(tol, ybox))

    def inverse(self, y, xbox, tol):
        y = as_vector(y, self.m)
        hits = [xp for (xp, yp) in self.pairs if np.linalg.norm(yp - y) <= tol]
        hits = [xp for xp in hits if xbox.contains(xp[None, :], 1e-12)[0]]
        if not hits:
            return PointSet.empty(self.n, tol)
        return PointSet.from_points(np.array(hits), tol, dedup_radius(tol, xbox))


def _seed_grid(box: AnalysisBox, dim):
    res = box.resolution
    cap = DEFAULT_SEED_RESOLUTION.get(dim, 8)
    if res > cap:
        res = cap
    return box.with_resolution(max(res, 2)).grid()


# ------------------------------------------------------------- operations


def forward_set(F: MapModel, x, ybox: AnalysisBox, tol=DEFAULT_TOL) -> PointSet:
    """Approximate F(x) within ybox."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    x = as_vector(x, F.n)
    if not np.all(np.isfinite(x)):
        raise ValueError("x must be finite")
    return F.forward(x, ybox, tol)


def inverse_set(F: MapModel, y, xbox: AnalysisBox, tol=DEFAULT_TOL) -> PointSet:
    """Approximate F^{-1}(y) within xbox; the empty set is a valid answer."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    y = as_vector(y, F.m)
    return F.inverse(y, xbox, tol)


def range_membership(F: MapModel, y, xbox: AnalysisBox, tol=DEFAULT_TOL) -> bool:
    """True iff y has a preimage inside xbox."""
    return not inverse_set(F, y, xbox, tol).is_empty


class PreimageCache:
    """Memoizes inverse_set per target y; queries stay pure so sharing the
    cache across parallel workers is safe."""

    def __init__(self, F, xbox, tol=DEFAULT_TOL):
        self.F = F
        self.xbox = xbox
        self.tol = tol
        self._cache = {}

    def get(self, y) -> PointSet:
        y = as_vector(y, self.F.m)
        key = y.tobytes()
        if key not in self._cache:
            self._cache[key] = inverse_set(self.F, y, self.xbox, self.tol)
        return self._cache[key]


def spot_check_closed_graph(F: MapModel, xbox: AnalysisBox, tol=DEFAULT_TOL):
    """Sampled closed-graph check for single-valued expression maps.

    Compares worst adjacent-sample jumps at two resolutions; a jump that
    refuses to shrink marks a discontinuity (an open graph), which every
    downstream estimator assumes away.  Returns (ok, diagnostic).
    """
    if not isinstance(F, SingleValued):
        return True, "spot check only implemented for single-valued maps"
    if F.n > 3:
        return True, "dimension too high for the sampled check"

    def max_jump(res):
        grid_box = xbox.with_resolution(res)
        vals = F.eval_many(grid_box.grid())
        if not np.all(np.isfinite(vals)):
            return math.inf
        shape = (res,) * F.n + (F.m,)
        vals = vals.reshape(shape)
        worst = 0.0
        for axis in range(F.n):
            d = np.diff(vals, axis=axis)
            worst = max(worst, float(np.max(np.abs(d))))
        return worst

    coarse = max_jump(xbox.resolution)
    fine = max_jump(2 * xbox.resolution)
    if not math.isfinite(coarse) or not math.isfinite(fine):
        return False, "map evaluates to a non-finite value on the grid"
    scale = 1.0 + coarse
    if coarse > 1e3 * tol * scale and fine > 0.9 * coarse:
        return False, (
            f"adjacent-sample jump {coarse:.3g} does not shrink under refinement "
            f"({fine:.3g}); graph looks discontinuous"
        )
    return True, "ok"


def build_from_spec(spec: dict) -> MapModel:
    """Build a MapModel from a validated fixture payload."""
    if not isinstance(spec, dict) or "kind" not in spec:
        raise FixtureError("map spec must be an object with a 'kind' field")
    kind = spec["kind"]
    if kind == "single_valued":
        exprs = spec.get("exprs") or spec.get("expressions")
        if not exprs:
            raise FixtureError("single_valued spec: missing field 'exprs'")
        return SingleValued(tuple(exprs), n=int(spec.get("n", 0)))
    if kind == "inverse":
        if "of" not in spec:
            raise FixtureError("inverse spec: missing field 'of'")
        return Inverse(build_from_spec(spec["of"]))
    if kind == "polyhedral":
        try:
            n, m = int(spec["n"]), int(spec["m"])
            pieces = tuple((p["A"], p["b"]) for p in spec["pieces"])
        except KeyError as exc:
            raise FixtureError(f"polyhedral spec: missing field {exc}") from None
        return Polyhedral(pieces, n=n, m=m)
    if kind == "graph_sample":
        try:
            n, m = int(spec["n"]), int(spec["m"])
            pairs = tuple((p[0], p[1]) for p in spec["pairs"])
        except KeyError as exc:
            raise FixtureError(f"graph_sample spec: missing field {exc}") from None
        return GraphSample(pairs, n=n, m=m)
    raise FixtureError(f"unknown map kind {kind!r}")
