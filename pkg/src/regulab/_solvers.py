"""Internal numerical workhorses shared by map_model, metrics and vi.

Everything here is deterministic: fixed iteration schedules, no RNG, and
order-independent reductions, so results do not depend on worker count.
"""

from __future__ import annotations

import numpy as np

_FD_BASE = 1e-6  # finite-difference step scale for Jacobians


def fd_jacobian(resfun, x, r0=None):
    """Forward-difference Jacobian of ``resfun`` at each row of x.

    resfun maps (N, d) -> (N, m); returns (N, m, d).
    """
    x = np.atleast_2d(x)
    n, d = x.shape
    if r0 is None:
        r0 = resfun(x)
    r0 = _as2d(r0)
    m = r0.shape[1]
    # scale-relative step: deep roots (|x| << 1) keep a meaningful Jacobian
    h = _FD_BASE * np.abs(x) + 1e-250
    h = np.where(np.abs(x) > 1e-3, _FD_BASE * (1.0 + np.abs(x)), h)  # (N, d)
    pert = np.repeat(x, d, axis=0)  # (N*d, d)
    idx = np.tile(np.arange(d), n)
    pert[np.arange(n * d), idx] += h.ravel()
    rp = _as2d(resfun(pert)).reshape(n, d, m)
    jac = (rp - r0[:, None, :]) / h[:, :, None]  # (N, d, m)
    return np.swapaxes(jac, 1, 2)  # (N, m, d)


def _as2d(r):
    r = np.asarray(r, dtype=float)
    if r.ndim == 1:
        r = r[:, None]
    return r


def _norms(r):
    return np.linalg.norm(_as2d(r), axis=1)


def multistart_roots(resfun, seeds, tol, box=None, max_iter=250, compass=True):
    """Find roots of ``resfun`` (N,d)->(N,m) by damped Levenberg-Marquardt
    from every seed, with a derivative-free compass-search fallback for
    seeds that stall at kinks.

    Returns the (K, d) array of iterates whose residual norm is <= tol.
    Deduplication is the caller's job.
    """
    x = np.atleast_2d(np.asarray(seeds, dtype=float)).copy()
    n, d = x.shape
    lam = np.full(n, 1e-3)
    with np.errstate(all="ignore"):
        r = _as2d(resfun(x))
    rn = _norms(r)
    rn[~np.isfinite(rn)] = np.inf
    active = np.isfinite(rn)
    stalled = np.zeros(n, dtype=int)

    lo = hi = None
    if box is not None:
        margin = 0.1 * (box.hi - box.lo)
        lo, hi = box.lo - margin, box.hi + margin

    eye = np.eye(d)
    for _ in range(max_iter):
        work = active & (rn > 0.05 * tol) & (stalled < 5)
        if not np.any(work):
            break
        xi = x[work]
        ri = r[work]
        rni = rn[work]
        with np.errstate(all="ignore"):
            J = fd_jacobian(resfun, xi, ri)
            J[~np.isfinite(J)] = 0.0
            JtJ = np.einsum("nmi,nmj->nij", J, J)
            Jtr = np.einsum("nmi,nm->ni", J, ri)
            A = JtJ + lam[work][:, None, None] * (eye[None] + JtJ * eye[None])
            try:
                step = np.linalg.solve(A, Jtr[:, :, None])[:, :, 0]
            except np.linalg.LinAlgError:
                step = np.einsum(
                    "nij,nj->ni", np.linalg.pinv(A + 1e-30 * eye[None]), Jtr
                )
            step[~np.isfinite(step)] = 0.0
            xn = xi - step
            if lo is not None:
                xn = np.clip(xn, lo, hi)
            r_new = _as2d(resfun(xn))
            rn_new = _norms(r_new)
        rn_new[~np.isfinite(rn_new)] = np.inf
        improved = rn_new < rni
        # a vanishing relative improvement counts as a stall so hopeless
        # seeds (empty fibers, range boundaries) freeze quickly
        progress = rn_new < rni * (1.0 - 1e-9)

        lam_w = lam[work]
        lam_w = np.where(improved, np.maximum(lam_w * 0.3, 1e-12), lam_w * 5.0)
        lam[work] = np.minimum(lam_w, 1e8)

        stalled_w = stalled[work]
        stalled_w = np.where(progress, 0, stalled_w + 1)
        stalled[work] = stalled_w

        xw = x[work]
        xw[improved] = xn[improved]
        x[work] = xw
        rw = r[work]
        rw[improved] = r_new[improved]
        r[work] = rw
        rnw = rn[work]
        rnw[improved] = rn_new[improved]
        rn[work] = rnw

    if compass:
        # derivative-free fallback, only for seeds that stalled within
        # striking distance (projection kinks); hopeless seeds are skipped
        rough = active & (rn > tol) & (rn <= 1e5 * tol)
        if np.any(rough):
            idx = np.flatnonzero(rough)
            if idx.size > 128:
                order = np.argsort(rn[idx], kind="stable")
                idx = idx[order[:128]]
            xr, rr = _compass(resfun, x[idx], rn[idx], tol, lo, hi)
            x[idx] = xr
            rn[idx] = rr

    good = rn <= tol
    if box is not None and np.any(good):
        good &= box.contains(x, slack=1e-9 * (1.0 + box.diameter))
    return x[good]


def polish_roots(resfun, x, box=None, iters=150):
    """Sharpen already-accepted roots far past the acceptance tolerance.

    Runs a fixed budget of lightly damped Gauss-Newton steps, keeping a
    step only when it reduces the residual norm.  Multistart stops at the
    acceptance band, which blurs root locations (badly so at degenerate
    roots, where the band has width ~ tol^(1/order)); downstream envelope
    fits need locations resolved to machine precision.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float)).copy()
    if x.size == 0:
        return x
    lo = hi = None
    if box is not None:
        margin = 0.1 * (box.hi - box.lo)
        lo, hi = box.lo - margin, box.hi + margin
    with np.errstate(all="ignore"):
        r = _as2d(resfun(x))
    rn = _norms(r)
    rn[~np.isfinite(rn)] = np.inf
    for _ in range(iters):
        with np.errstate(all="ignore"):
            J = fd_jacobian(resfun, x, r)
            J[~np.isfinite(J)] = 0.0
            JtJ = np.einsum("nmi,nmj->nij", J, J)
            Jtr = np.einsum("nmi,nm->ni", J, r)
            d = x.shape[1]
            eye = np.eye(d)[None]
            # multiplicative damping: stays negligible relative to JtJ even
            # when the Jacobian itself is tiny (degenerate roots)
            diag = np.einsum("nii->n", JtJ)[:, None, None]
            A = JtJ + 1e-9 * diag * eye + 1e-300 * eye
            try:
                step = np.linalg.solve(A, Jtr[:, :, None])[:, :, 0]
            except np.linalg.LinAlgError:
                step = np.einsum("nij,nj->ni", np.linalg.pinv(A), Jtr)
            step[~np.isfinite(step)] = 0.0
            xn = x - step
            if lo is not None:
                xn = np.clip(xn, lo, hi)
            r_new = _as2d(resfun(xn))
            rn_new = _norms(r_new)
        rn_new[~np.isfinite(rn_new)] = np.inf
        improved = rn_new < rn
        if not np.any(improved):
            break
        x[improved] = xn[improved]
        r[improved] = r_new[improved]
        rn[improved] = rn_new[improved]
    return x


def _compass(resfun, x, rn, tol, lo, hi, sweeps=60):
    """Vectorized compass search on the residual norm; shrinking steps."""
    x = x.copy()
    rn = rn.copy()
    n, d = x.shape
    step = np.full(n, 0.1 * (1.0 + np.max(np.abs(x), axis=1)))
    for _ in range(sweeps):
        live = (rn > tol) & (step > 1e-15)
        if not np.any(live):
            break
        moved = np.zeros(n, dtype=bool)
        for j in range(d):
            for sgn in (1.0, -1.0):
                cand = x.copy()
                cand[live, j] += sgn * step[live]
                if lo is not None:
                    cand = np.clip(cand, lo, hi)
                with np.errstate(all="ignore"):
                    rc = _norms(resfun(cand))
                rc[~np.isfinite(rc)] = np.inf
                better = live & (rc < rn)
                x[better] = cand[better]
                rn[better] = rc[better]
                moved |= better
        step = np.where(moved, step, step * 0.5)
    return x, rn


# ----------------------------------------------------- halfspace projection


def project_halfspaces(A, b, U, tol=1e-9, max_cycles=100000):
    """Euclidean projection of each row of U onto {x | A x <= b} via
    Dykstra's alternating projections.  Batched over the rows of U.

    A: (m, n); b: (m,); U: (N, n).  Stops when every point is feasible
    within tol and the last full cycle moved nothing by more than tol.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float).ravel()
    U = np.atleast_2d(np.asarray(U, dtype=float))
    m, n = A.shape
    N = U.shape[0]
    norms2 = np.einsum("ij,ij->i", A, A)
    if np.any(norms2 <= 0):
        raise ValueError("zero normal vector in halfspace description")

    if m == 1:
        viol = np.maximum(U @ A[0] - b[0], 0.0) / norms2[0]
        return U - viol[:, None] * A[0]

    x = U.copy()
    corr = np.zeros((m, N, n))
    scale = 1.0 + np.max(np.abs(U), initial=1.0)
    for _ in range(max_cycles):
        delta = 0.0
        for i in range(m):
            y = x + corr[i]
            viol = np.maximum(y @ A[i] - b[i], 0.0) / norms2[i]
            xn = y - viol[:, None] * A[i]
            corr[i] = y - xn
            delta = max(delta, float(np.max(np.abs(xn - x), initial=0.0)))
            x = xn
        feas = float(np.max(A @ x.T - b[:, None], initial=0.0))
        if feas <= tol and delta <= 0.1 * tol * scale:
            break
    return x


def feasible_point(A, b):
    """Chebyshev center of {x | A x <= b}; None when infeasible/unbounded.

    Solved as an LP: maximize r subject to A x + r ||a_i|| <= b.
    """
    from scipy.optimize import linprog

    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float).ravel()
    m, n = A.shape
    norms = np.linalg.norm(A, axis=1)
    A_ub = np.hstack([A, norms[:, None]])
    c = np.zeros(n + 1)
    c[-1] = -1.0
    # bound the center so unbounded polyhedra still yield a finite point
    bounds = [(-1e6, 1e6)] * n + [(0, 1e6)]
    res = linprog(c, A_ub=A_ub, b_ub=b, bounds=bounds, method="highs")
    if not res.success or res.x is None:
        return None
    if res.x[-1] < -1e-12:
        return None
    return res.x[:n]
