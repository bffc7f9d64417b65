"""Shared numeric plumbing: analysis boxes, finite point sets, extended reals.

All distances follow the convention that the distance from a point to the
empty set is positive infinity; ``INF`` is the distinguished value and
compares greater than every finite float.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

INF = math.inf


class FixtureError(ValueError):
    """A fixture violates its contract (schema, feasibility, sign, ...)."""


class InternalConsistencyError(RuntimeError):
    """Two routes that must agree disagreed; indicates a solver bug."""


def as_vector(x, dim=None):
    v = np.atleast_1d(np.asarray(x, dtype=float))
    if v.ndim != 1:
        raise ValueError(f"expected a vector, got shape {v.shape}")
    if dim is not None and v.shape[0] != dim:
        raise ValueError(f"dimension mismatch: expected {dim}, got {v.shape[0]}")
    return v


@dataclass(frozen=True)
class AnalysisBox:
    """Axis-aligned box with a sampling resolution per axis.

    The induced grid has ``resolution`` points per axis including both
    endpoints, hence ``resolution ** dim`` points in total.
    """

    lo: np.ndarray
    hi: np.ndarray
    resolution: int = 64

    def __post_init__(self):
        object.__setattr__(self, "lo", as_vector(self.lo))
        object.__setattr__(self, "hi", as_vector(self.hi, self.lo.shape[0]))
        if self.resolution < 2:
            raise FixtureError("box resolution must be >= 2")
        if not np.all(self.lo < self.hi):
            raise FixtureError("box must satisfy lo < hi componentwise")

    @property
    def dim(self):
        return self.lo.shape[0]

    @property
    def diameter(self):
        return float(np.linalg.norm(self.hi - self.lo))

    @property
    def step(self):
        """Largest per-axis grid spacing."""
        return float(np.max((self.hi - self.lo) / (self.resolution - 1)))

    def axes(self):
        return [np.linspace(self.lo[i], self.hi[i], self.resolution) for i in range(self.dim)]

    def grid(self):
        """All grid points as an (resolution**dim, dim) array, lexicographic order."""
        mesh = np.meshgrid(*self.axes(), indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)

    def contains(self, pts, slack=0.0):
        pts = np.atleast_2d(pts)
        return np.all((pts >= self.lo - slack) & (pts <= self.hi + slack), axis=1)

    def clip(self, pts, margin=0.0):
        return np.clip(pts, self.lo - margin, self.hi + margin)

    def with_resolution(self, resolution):
        return AnalysisBox(self.lo, self.hi, resolution)

    def center(self):
        return 0.5 * (self.lo + self.hi)


def lexsorted(points):
    """Rows of ``points`` in canonical lexicographic order."""
    if len(points) == 0:
        return points
    order = np.lexsort(points.T[::-1])
    return points[order]


def dedup_points(points, radius, rel=0.0):
    """Greedy deduplication after a canonical sort; deterministic.

    Keeps a point only if it is farther than ``radius`` plus ``rel`` times
    the larger magnitude from every point already kept.  The relative term
    merges near-duplicates of tiny roots, whose locations are only resolved
    proportionally to their size.
    """
    points = lexsorted(np.atleast_2d(np.asarray(points, dtype=float)))
    kept = []
    for p in points:
        if all(
            np.linalg.norm(p - q) > radius + rel * max(np.linalg.norm(p), np.linalg.norm(q))
            for q in kept
        ):
            kept.append(p)
    if not kept:
        return np.empty((0, points.shape[1] if points.size else 0))
    return np.array(kept)


@dataclass(frozen=True)
class PointSet:
    """Finite approximation of a (possibly empty) set of points in R^d."""

    points: np.ndarray
    tolerance: float = 0.0
    dim: int = field(default=0)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.size == 0:
            d = self.dim if self.dim else (pts.shape[1] if pts.ndim == 2 else 0)
            pts = np.empty((0, d))
        else:
            pts = np.atleast_2d(pts)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "dim", pts.shape[1])

    @classmethod
    def empty(cls, dim, tolerance=0.0):
        return cls(np.empty((0, dim)), tolerance, dim)

    @classmethod
    def from_points(cls, points, tolerance, dedup_radius, dedup_rel=0.0):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if pts.size == 0:
            return cls.empty(pts.shape[1] if pts.ndim == 2 else 0, tolerance)
        return cls(dedup_points(pts, dedup_radius, dedup_rel), tolerance, pts.shape[1])

    def __len__(self):
        return self.points.shape[0]

    @property
    def is_empty(self):
        return len(self) == 0

    def dist(self, x):
        """Euclidean distance from x to the set; INF when empty."""
        if self.is_empty:
            return INF
        x = as_vector(x, self.dim)
        return float(np.min(np.linalg.norm(self.points - x, axis=1)))

    def dist_many(self, xs):
        """Distances from each row of xs to the set; INF column when empty."""
        xs = np.atleast_2d(xs)
        if self.is_empty:
            return np.full(xs.shape[0], INF)
        diff = xs[:, None, :] - self.points[None, :, :]
        return np.min(np.linalg.norm(diff, axis=2), axis=1)


def thread_count(threads=None):
    if threads is None:
        threads = int(os.environ.get("REGULAB_THREADS", "1") or 1)
    return max(1, int(threads))


def pmap(fn, items, threads=None):
    """Order-preserving parallel map; results identical to serial execution."""
    items = list(items)
    n = thread_count(threads)
    if n <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items))


def dyadic_radii(scale, levels, start=0):
    """scale * 2^-j for j = start..levels, skipping values that underflow."""
    out = []
    for j in range(start, levels + 1):
        r = scale * math.pow(2.0, -j)
        if r <= 0.0 or not math.isfinite(r):
            break
        out.append(r)
    return out


def log2_bins(values):
    """floor(log2(v)) for positive finite values."""
    values = np.asarray(values, dtype=float)
    out = np.full(values.shape, -(2 ** 31), dtype=int)
    ok = np.isfinite(values) & (values > 0)
    out[ok] = np.floor(np.log2(values[ok])).astype(int)
    return out
