"""Parametric variational inequalities over a closed convex set.

The problem: given a continuous f: R^n -> R^n, a nonempty closed convex
C and a parameter p, find x in C with

    <p + f(x), x' - x> >= 0   for every x' in C.

Solutions are computed through the normal-map reformulation

    NM(u) = f(Pi_C(u)) + u - Pi_C(u),

whose zeros at level -p encode the solution set: S(p) = Pi_C(NM^{-1}(-p))
and NM^{-1}(-p) = {x - f(x) - p : x in S(p)}.  The module also sweeps S
over a parameter grid, grades its lower semicontinuity and Hölder
modulus, and cross-checks the equivalent regularity conditions of the
normal map.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    INF,
    AnalysisBox,
    FixtureError,
    InternalConsistencyError,
    PointSet,
    as_vector,
    pmap,
)
from .map_model import DEFAULT_TOL, Inverse, SingleValued, dedup_radius, inverse_set
from .metrics import ConvexSet, project, project_many
from .regularity import (
    HolderFit,
    RegularitySample,
    _dyadic_offsets,
    _unique_rows,
    estimate_metric_regularity,
    estimate_pseudo_holder,
    fit_holder_envelope,
    test_openness,
)

# dyadic descent depth for the solution-map modulus fit (each rung costs a
# full multistart solve, so the budget is tighter than the map estimators')
SWEEP_LEVELS = {1: 60, 2: 26, 3: 16}


@dataclass(frozen=True)
class VIProblem:
    """f, C of the variational inequality; p varies per query."""

    f: SingleValued
    C: ConvexSet

    def __post_init__(self):
        f = self.f
        if not isinstance(f, SingleValued):
            f = SingleValued(tuple(f))
        if f.m != f.n:
            raise FixtureError(
                f"the VI map must send R^n to itself; got n={f.n}, m={f.m}"
            )
        if self.C.dim != f.n:
            raise FixtureError(
                f"convex-set dimension {self.C.dim} does not match the map's {f.n}"
            )
        object.__setattr__(self, "f", f)

    @property
    def n(self):
        return self.f.n


@dataclass(frozen=True)
class SweepReport:
    """Solution map S(p) over a finite parameter grid."""

    p_grid: tuple  # of parameter vectors
    solutions: tuple  # of PointSet, aligned with p_grid
    cardinalities: tuple
    max_cardinality: int
    lsc_verdict: str  # LSC | NotLSC | Inconclusive
    lsc_witness: dict | None
    holder_fit: HolderFit
    anchor: tuple  # parameter the modulus fit is anchored at


@dataclass(frozen=True)
class VIEquivalenceAudit:
    """Cross-check of the equivalent conditions on the normal map: lower
    semicontinuity and Hölder modulus of S, openness, metric regularity
    and pseudo-Hölder continuity of the inverse normal map."""

    sweep: SweepReport
    openness: object
    metric_regularity: HolderFit
    pseudo_holder_full: HolderFit
    pseudo_holder_lower: HolderFit
    solution_map_fit: HolderFit
    consistency: str  # Consistent | Inconsistent | Inconclusive
    dom_locally_closed: str  # Declared | Inconclusive
    annotation: str = ""


def normal_map(P: VIProblem) -> SingleValued:
    """The normal map NM(u) = f(Pi_C(u)) + u - Pi_C(u) as a single-valued
    model, so the map-regularity estimators apply to it directly."""

    def fn(U):
        U = np.atleast_2d(np.asarray(U, dtype=float))
        Pi = project_many(P.C, U)
        return P.f.eval_many(Pi) + U - Pi

    return SingleValued((), n=P.n, m=P.n, fn=fn, label="normal-map")


def normal_map_eval(P: VIProblem, u, tol=DEFAULT_TOL):
    """NM(u) at a single point."""
    u = as_vector(u, P.n)
    if not np.all(np.isfinite(u)):
        raise ValueError("u must be finite")
    pi = project(P.C, u, min(tol, 1e-9))
    return P.f.eval_point(pi) + u - pi


def solve_normal_equation(P: VIProblem, p, ubox: AnalysisBox, tol=DEFAULT_TOL) -> PointSet:
    """All u in ubox with ||NM(u) + p|| <= tol (box-relative completeness:
    roots outside ubox are not searched for)."""
    p = as_vector(p, P.n)
    return inverse_set(normal_map(P), -p, ubox, tol)


def vi_residual(P: VIProblem, p, x, probes=None, tol=DEFAULT_TOL):
    """Worst violation of the variational inequality at x against a finite
    probe set: max over probe points x' of -<p + f(x), x' - x>.

    The probe set always includes the certificate point
    Pi_C(x - (p + f(x))); a nonpositive value there already certifies the
    inequality up to projection tolerance, so grid probes only sharpen the
    reported violation.  An x outside C (beyond 10 * tol) returns INF.
    """
    p = as_vector(p, P.n)
    x = as_vector(x, P.n)
    xp = project(P.C, x)
    if float(np.linalg.norm(xp - x)) > 10.0 * tol:
        return INF
    g = p + P.f.eval_point(x)
    if not np.all(np.isfinite(g)):
        return INF
    pts = [project(P.C, x - g), xp]
    if probes is not None:
        probe_pts = probes.points if isinstance(probes, PointSet) else np.atleast_2d(probes)
        if probe_pts.size:
            # probe points must lie in C; arbitrary grids are projected in
            pts.append(project_many(P.C, probe_pts))
    probe_arr = np.vstack([np.atleast_2d(q) for q in pts])
    return float(np.max(-(probe_arr - x) @ g))


def solution_set(P: VIProblem, p, ubox: AnalysisBox, tol=DEFAULT_TOL) -> PointSet:
    """S(p) = Pi_C(NM^{-1}(-p)) within the projection of ubox.

    Every reported point is validated against the VI residual; a failure
    means the two solution routes disagree and is raised as an internal
    inconsistency rather than returned.
    """
    p = as_vector(p, P.n)
    roots = solve_normal_equation(P, p, ubox, tol)
    if roots.is_empty:
        return PointSet.empty(P.n, tol)
    X = project_many(P.C, roots.points)
    S = PointSet.from_points(X, tol, dedup_radius(tol, ubox), dedup_rel=1e-2)
    for x in S.points:
        res = vi_residual(P, p, x, tol=tol)
        if not res <= 10.0 * tol:
            raise InternalConsistencyError(
                f"normal-map root projects to x={x.tolist()} with VI residual "
                f"{res:.3g} > {10.0 * tol:.3g} at p={p.tolist()}: the normal-map "
                "and residual routes disagree"
            )
    return S


class _SolutionCache:
    """Memoized S(p) lookups shared by the sweep, the lsc refinement and
    the modulus fit; queries are pure, so sharing is safe."""

    def __init__(self, P, ubox, tol):
        self.P = P
        self.ubox = ubox
        self.tol = tol
        self._cache = {}

    def get(self, p) -> PointSet:
        p = as_vector(p, self.P.n)
        key = p.tobytes()
        if key not in self._cache:
            self._cache[key] = solution_set(self.P, p, self.ubox, self.tol)
        return self._cache[key]

    def prime(self, ps):
        ps = [as_vector(p, self.P.n) for p in ps]
        fresh = []
        seen = set()
        for p in ps:
            key = p.tobytes()
            if key not in self._cache and key not in seen:
                seen.add(key)
                fresh.append(p)
        results = pmap(lambda p: solution_set(self.P, p, self.ubox, self.tol), fresh)
        for p, S in zip(fresh, results):
            self._cache[p.tobytes()] = S


def _neighbor_pairs(p_arr):
    """Ordered index pairs (i, j) of grid neighbors: j within 1.26 times
    i's nearest-neighbor distance.  Works for uneven 1-D ladders and for
    regular grids in any dimension."""
    n = p_arr.shape[0]
    if n < 2:
        return []
    diff = np.linalg.norm(p_arr[:, None, :] - p_arr[None, :, :], axis=2)
    np.fill_diagonal(diff, np.inf)
    nearest = np.min(diff, axis=1)
    pairs = []
    for i in range(n):
        for j in range(n):
            if i != j and diff[i, j] <= 1.26 * nearest[i] + 1e-15:
                pairs.append((i, j))
    return pairs


def test_lower_semicontinuity(P: VIProblem, p_grid, solutions, ubox, tol=DEFAULT_TOL, cache=None):
    """Grade lower semicontinuity of S on the grid.

    For every x in S(p) and every grid neighbor p' with nonempty S(p'),
    lower semicontinuity demands dist(x, S(q)) -> 0 as q -> p along the
    segment toward p'.  Candidate gaps above the 10 * sqrt(step) threshold
    are refined by halving the step three times; a gap that stays above
    the per-level threshold at every level is a violation witness (a
    solution branch that vanishes).  Returns (verdict, witness).
    """
    p_arr = np.atleast_2d(np.asarray([as_vector(p, P.n) for p in p_grid], dtype=float))
    if cache is None:
        cache = _SolutionCache(P, ubox, tol)
        for p, S in zip(p_arr, solutions):
            cache._cache[p.tobytes()] = S

    pairs = _neighbor_pairs(p_arr)
    if not pairs:
        return "Inconclusive", {"reason": "parameter grid has fewer than two points"}

    decided_any = False
    for i, j in pairs:
        Si, Sj = solutions[i], solutions[j]
        if Si.is_empty or Sj.is_empty:
            continue
        decided_any = True
        h = float(np.linalg.norm(p_arr[j] - p_arr[i]))
        gaps0 = Sj.dist_many(Si.points)
        for x, gap0 in zip(Si.points, gaps0):
            if gap0 <= 10.0 * math.sqrt(h):
                continue
            # refine toward p_i: the gap must shrink with the step
            persists = True
            levels = []
            for level in (1, 2, 3):
                q = p_arr[i] + (p_arr[j] - p_arr[i]) * 2.0 ** (-level)
                gap = cache.get(q).dist(x)
                levels.append(float(gap))
                if gap <= 10.0 * math.sqrt(h * 2.0 ** (-level)):
                    persists = False
                    break
            if persists:
                witness = {
                    "p": p_arr[i].tolist(),
                    "x": x.tolist(),
                    "toward": p_arr[j].tolist(),
                    "gaps": levels,
                }
                return "NotLSC", witness
    if not decided_any:
        return "Inconclusive", {"reason": "no neighboring pair of nonempty solution sets"}
    return "LSC", None


def _anchor_index(p_arr, solutions):
    """Nonempty grid parameter closest to the centroid of the nonempty
    ones; ties broken lexicographically (grid order)."""
    nonempty = [i for i, S in enumerate(solutions) if not S.is_empty]
    if not nonempty:
        return None
    centroid = np.mean(p_arr[nonempty], axis=0)
    dists = [float(np.linalg.norm(p_arr[i] - centroid)) for i in nonempty]
    return nonempty[int(np.argmin(dists))]


def solution_map_holder_fit(
    P: VIProblem, p_center, eps, ubox: AnalysisBox, tol=DEFAULT_TOL, cache=None, levels=None
) -> HolderFit:
    """Hölder modulus of S at p_center: samples r = max over x in
    S(p_center) of dist(x, S(p)) against s = ||p - p_center|| along a
    dyadic parameter ladder."""
    p_center = as_vector(p_center, P.n)
    if cache is None:
        cache = _SolutionCache(P, ubox, tol)
    if levels is None:
        levels = SWEEP_LEVELS.get(P.n, 12)
    S0 = cache.get(p_center)
    if S0.is_empty:
        return HolderFit(
            c=0.0,
            alpha=0.0,
            window=(0.0, 0.0),
            samples=0,
            max_violation=INF,
            verdict="Inconclusive",
            diagnostic="anchor parameter has an empty solution set in the box",
        )
    # parameters closer than the solve resolution share a computed solution
    # set, so the dyadic descent stops at the solve tolerance (relative
    # tolerance keeps every scale resolvable at the origin)
    pnorm = float(np.linalg.norm(p_center))
    floor_s = 16.0 * min(tol, 1e-3 * pnorm) if pnorm > 0.0 else 0.0
    # independent floor: the solves accept roots at a residual relative to
    # the target (1e-3 * s), but a root of magnitude R only admits residuals
    # down to machine epsilon times its value scale, so deeper rungs would
    # silently drop every large-magnitude solution branch
    f0 = P.f.eval_many(S0.points)
    scale = 1.0 + max(
        float(np.max(np.abs(S0.points))), float(np.max(np.abs(f0), initial=0.0))
    )
    floor_s = max(floor_s, 1e3 * 64.0 * np.finfo(float).eps * scale)
    ladder = [
        q
        for q in _dyadic_offsets(p_center, eps, levels)
        if float(np.linalg.norm(q - p_center)) >= floor_s
    ]
    s_floor = (
        min(float(np.linalg.norm(q - p_center)) for q in ladder) if ladder else 0.0
    )
    # intermediate rungs thicken per-bin coverage when the floor truncates
    # the descent after a handful of levels
    ladder.extend(
        q
        for q in _dyadic_offsets(p_center, 1.5 * eps, levels)
        if floor_s <= float(np.linalg.norm(q - p_center)) <= eps
    )
    pts = _unique_rows(ladder)
    cache.prime(pts)
    samples = []
    for q in pts:
        Sq = cache.get(q)
        s = float(np.linalg.norm(q - p_center))
        r = float(np.max(Sq.dist_many(S0.points))) if not Sq.is_empty else INF
        samples.append(RegularitySample(s, r, (tuple(p_center), tuple(q))))
    return fit_holder_envelope(samples, tol, s_floor=s_floor)


def sweep_solution_map(
    P: VIProblem, p_grid, ubox: AnalysisBox, tol=DEFAULT_TOL, eps=None, cache=None, anchor=None
) -> SweepReport:
    """Solve the VI across the parameter grid and grade the solution map:
    cardinalities, lower semicontinuity and the Hölder modulus anchored at
    ``anchor`` (default: the nonempty grid parameter closest to the
    centroid of the nonempty ones)."""
    p_arr = np.atleast_2d(np.asarray([as_vector(p, P.n) for p in p_grid], dtype=float))
    if cache is None:
        cache = _SolutionCache(P, ubox, tol)
    cache.prime(p_arr)
    sols = [cache.get(p) for p in p_arr]
    cards = tuple(len(S) for S in sols)
    max_card = max(cards) if cards else 0

    lsc, witness = test_lower_semicontinuity(P, p_arr, sols, ubox, tol, cache=cache)

    if anchor is not None:
        anchor_p = as_vector(anchor, P.n)
    else:
        anchor_i = _anchor_index(p_arr, sols)
        anchor_p = p_arr[anchor_i] if anchor_i is not None else None
    if anchor_p is None:
        fit = HolderFit(
            c=0.0,
            alpha=0.0,
            window=(0.0, 0.0),
            samples=0,
            max_violation=INF,
            verdict="Inconclusive",
            diagnostic="every grid parameter has an empty solution set",
        )
        anchor_out = ()
    else:
        if eps is None:
            spans = np.linalg.norm(p_arr - anchor_p, axis=1)
            eps = float(np.max(spans))
            if eps <= 0.0:
                eps = 1.0
        fit = solution_map_holder_fit(P, anchor_p, eps, ubox, tol, cache=cache)
        anchor_out = tuple(anchor_p.tolist())

    return SweepReport(
        p_grid=tuple(tuple(p.tolist()) for p in p_arr),
        solutions=tuple(sols),
        cardinalities=cards,
        max_cardinality=max_card,
        lsc_verdict=lsc,
        lsc_witness=witness,
        holder_fit=fit,
        anchor=anchor_out,
    )


def _sign(verdict):
    if verdict in ("Open", "Holder", "LSC"):
        return 1
    if verdict in ("NotOpen", "NotHolder", "NotLSC"):
        return -1
    return 0


def vi_equivalence_audit(
    P: VIProblem,
    ubox: AnalysisBox,
    ybox: AnalysisBox,
    p_grid,
    eps,
    tol=DEFAULT_TOL,
    ystar=None,
    semialgebraic=True,
    dom_locally_closed=None,
    anchor=None,
):
    """Cross-check the equivalent conditions on the normal map at desk
    scale: lower semicontinuity and Hölder modulus of the solution map
    (from the sweep), openness of the normal map, its metric regularity,
    and pseudo-Hölder continuity of its inverse.  For semialgebraic data
    the verdict vector must be all-positive or all-negative.

    Local closedness of dom S cannot be certified from a grid sweep; it is
    reported as declared by the fixture or left Inconclusive.
    """
    cache = _SolutionCache(P, ubox, tol)
    sweep = sweep_solution_map(P, p_grid, ubox, tol, cache=cache, anchor=anchor)

    NM = normal_map(P)
    openness = test_openness(NM, ubox, ybox, tol)

    if ystar is None:
        if not sweep.anchor:
            raise FixtureError("audit needs a nonempty solution set on the grid")
        ystar = -np.asarray(sweep.anchor)
    ystar = as_vector(ystar, P.n)
    metreg = estimate_metric_regularity(NM, ystar, ubox, eps, ybox, tol)
    G = Inverse(NM)
    lower = estimate_pseudo_holder(G, ystar, ubox, eps, "lower", tol)
    full = estimate_pseudo_holder(G, ystar, ubox, eps, "full", tol)

    # the solution-map modulus is a local property: when the sweep finds a
    # lower-semicontinuity violation, re-anchor the fit at the witness
    # parameter so the failing branch is the one being measured
    s_fit = sweep.holder_fit
    if sweep.lsc_verdict == "NotLSC" and sweep.lsc_witness:
        p_w = np.asarray(sweep.lsc_witness["p"], dtype=float)
        s_fit = solution_map_holder_fit(P, p_w, eps, ubox, tol, cache=cache)

    signs = [
        _sign(sweep.lsc_verdict),
        _sign(openness.verdict),
        _sign(metreg.verdict),
        _sign(full.verdict),
        _sign(lower.verdict),
        _sign(s_fit.verdict),
    ]
    if all(sg > 0 for sg in signs) or all(sg < 0 for sg in signs):
        consistency = "Consistent"
        annotation = ""
    elif any(sg > 0 for sg in signs) and any(sg < 0 for sg in signs):
        consistency = "Inconsistent"
        annotation = (
            "unexpected for semialgebraic data: indicates a resolution "
            "artifact or a solver bug"
            if semialgebraic
            else "the data is declared non-semialgebraic, so the equivalence "
            "of the conditions does not apply"
        )
    else:
        consistency = "Inconclusive"
        annotation = "at least one condition could not be decided at this resolution"

    if dom_locally_closed:
        closedness = "Declared"
    else:
        closedness = "Inconclusive"
        annotation = (annotation + "; " if annotation else "") + (
            "local closedness of the solution-map domain is not certifiable "
            "from a grid sweep"
        )

    return VIEquivalenceAudit(
        sweep=sweep,
        openness=openness,
        metric_regularity=metreg,
        pseudo_holder_full=full,
        pseudo_holder_lower=lower,
        solution_map_fit=s_fit,
        consistency=consistency,
        dom_locally_closed=closedness,
        annotation=annotation,
    )


def brute_force_solutions(P: VIProblem, p, box: AnalysisBox, tol=DEFAULT_TOL):
    """Independent one-dimensional solution route for cross-checks: scan
    the projected grid of the box for local minimizers of the VI residual
    that reach (near) zero.  The acceptance threshold scales with the
    observed residual slope times the grid step, since a root between two
    grid points leaves a residual of that order at the nearest one."""
    if P.n != 1:
        raise FixtureError("brute-force scanning is only supported in dimension 1")
    p = as_vector(p, P.n)
    X = np.unique(project_many(P.C, box.grid()), axis=0)  # ascending in 1-D
    vals = np.array([vi_residual(P, p, x, tol=tol) for x in X])
    step = box.step
    finite = np.isfinite(vals)
    hits = []
    k = len(X)
    for i in range(k):
        if not finite[i]:
            continue
        left = vals[i - 1] if i > 0 and finite[i - 1] else math.inf
        right = vals[i + 1] if i + 1 < k and finite[i + 1] else math.inf
        if not (vals[i] <= left and vals[i] <= right):
            continue
        # a root between two grid points leaves a residual of order
        # (local slope) * step at the nearest one; a residual minimum
        # sitting above that is a genuine gap, not discretization error
        slope = max(
            abs(left - vals[i]) / step if math.isfinite(left) else 0.0,
            abs(right - vals[i]) / step if math.isfinite(right) else 0.0,
        )
        thr = max(10.0 * tol, 1.5 * slope * step)
        if vals[i] <= thr:
            hits.append(X[i])
    if not hits:
        return PointSet.empty(P.n, tol)
    return PointSet.from_points(np.array(hits), tol, 2.0 * step)
