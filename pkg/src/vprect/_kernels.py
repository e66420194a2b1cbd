"""Compiled inner loops for the detection hot path.

Everything here works on plain float64 / bool arrays; the public wrappers
live in ``consistency`` and ``vp_detect``.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

EIG_REL_EPS = 1e-9


@njit(cache=True, inline="always")
def _lam(px, py, x1, y1, x2, y2):
    # det(M) / lambda_max with det(M) = cross(x1 - v, x2 - x1)^2
    d1x = x1 - px
    d1y = y1 - py
    d2x = x2 - px
    d2y = y2 - py
    cross = d1x * (y2 - y1) - d1y * (x2 - x1)
    a = d1x * d1x + d2x * d2x
    c = d1y * d1y + d2y * d2y
    b = d1x * d1y + d2x * d2y
    amc = a - c
    den = a + c + math.sqrt(amc * amc + 4.0 * b * b)
    if den > 0.0:
        return 2.0 * cross * cross / den
    return 0.0


@njit(cache=True)
def lam_matrix(P, segs):
    m = P.shape[0]
    n = segs.shape[0]
    out = np.empty((m, n))
    for i in range(m):
        px = P[i, 0]
        py = P[i, 1]
        for j in range(n):
            out[i, j] = _lam(px, py, segs[j, 0, 0], segs[j, 0, 1], segs[j, 1, 0], segs[j, 1, 1])
    return out


@njit(cache=True)
def inlier_mask(P, segs, T_D):
    m = P.shape[0]
    n = segs.shape[0]
    out = np.empty((m, n), dtype=np.bool_)
    for i in range(m):
        px = P[i, 0]
        py = P[i, 1]
        for j in range(n):
            out[i, j] = _lam(px, py, segs[j, 0, 0], segs[j, 0, 1], segs[j, 1, 0], segs[j, 1, 1]) <= T_D
    return out


@njit(cache=True)
def value_grad(vx, vy, x1, y1, x2, y2):
    """Consistency and its gradient -2 u u^T (d1 + d2) at one point.

    The projector u u^T on the minor axis is built from the double angle of
    the major axis.  At a (numerical) eigenvalue tie a central difference is
    returned instead.
    """
    lam = _lam(vx, vy, x1, y1, x2, y2)
    d1x = x1 - vx
    d1y = y1 - vy
    d2x = x2 - vx
    d2y = y2 - vy
    a = d1x * d1x + d2x * d2x
    c = d1y * d1y + d2y * d2y
    b2 = 2.0 * (d1x * d1y + d2x * d2y)
    amc = a - c
    r = math.sqrt(amc * amc + b2 * b2)
    if r <= EIG_REL_EPS * (a + c):
        h = 1e-6 * (1.0 + max(abs(vx), abs(vy)))
        gx = (_lam(vx + h, vy, x1, y1, x2, y2) - _lam(vx - h, vy, x1, y1, x2, y2)) / (2.0 * h)
        gy = (_lam(vx, vy + h, x1, y1, x2, y2) - _lam(vx, vy - h, x1, y1, x2, y2)) / (2.0 * h)
        return lam, gx, gy
    cos2 = amc / r
    sin2 = b2 / r
    Dx = d1x + d2x
    Dy = d1y + d2y
    gx = -((1.0 - cos2) * Dx - sin2 * Dy)
    gy = -((1.0 + cos2) * Dy - sin2 * Dx)
    return lam, gx, gy


@njit(cache=True)
def capped_cost(vx, vy, segs, lo, hi, T_D):
    """Sum of min(T_D, consistency) over segs[lo:hi] and its gradient."""
    f = 0.0
    gx = 0.0
    gy = 0.0
    for e in range(lo, hi):
        lam, dx, dy = value_grad(vx, vy, segs[e, 0, 0], segs[e, 0, 1], segs[e, 1, 0], segs[e, 1, 1])
        if lam < T_D:
            f += lam
            gx += dx
            gy += dy
        else:
            f += T_D
    return f, gx, gy


@njit(cache=True)
def ragged_cost(idx, X, start, count, segs, T_D):
    """Capped cost and gradient of candidate idx[k] at X[k] over its segments."""
    k = idx.shape[0]
    F = np.zeros(k)
    G = np.zeros((k, 2))
    for q in range(k):
        c = idx[q]
        f, gx, gy = capped_cost(X[q, 0], X[q, 1], segs, start[c], start[c] + count[c], T_D)
        F[q] = f
        G[q, 0] = gx
        G[q, 1] = gy
    return F, G


@njit(cache=True)
def _cg(x, y, segs, lo, hi, T_D, max_iters, grad_tol, step_tol, f_tol, shrink, ls_max, c1):
    # same iteration as optimize.minimize, specialised to the capped cost
    f, gx, gy = capped_cost(x, y, segs, lo, hi, T_D)
    gtol = grad_tol if grad_tol > 0 else 1e-8 * (1.0 + abs(f))
    dx = -gx
    dy = -gy
    t_prev = 1.0
    for _ in range(max_iters):
        gn = math.sqrt(gx * gx + gy * gy)
        if gn < gtol:
            break
        slope = gx * dx + gy * dy
        if slope >= 0.0:
            dx = -gx
            dy = -gy
            slope = -gn * gn
        dn = math.sqrt(dx * dx + dy * dy)

        h = 1e-4 * (1.0 + max(abs(x), abs(y))) / dn
        _, gpx, gpy = capped_cost(x + h * dx, y + h * dy, segs, lo, hi, T_D)
        curv = ((gpx - gx) * dx + (gpy - gy) * dy) / h
        t = -slope / curv if curv > 0 else t_prev
        if not math.isfinite(t) or t <= 0:
            t = t_prev

        accepted = False
        xt = x
        yt = y
        ft = f
        gtx = gx
        gty = gy
        for _ in range(ls_max):
            xt = x + t * dx
            yt = y + t * dy
            ft, gtx, gty = capped_cost(xt, yt, segs, lo, hi, T_D)
            if math.isfinite(ft) and ft <= f + c1 * t * slope:
                accepted = True
                break
            t *= shrink
        if not accepted:
            break

        beta = max(0.0, (gtx * (gtx - gx) + gty * (gty - gy)) / (gn * gn))
        stall = f - ft <= f_tol * (1.0 + abs(f))
        x = xt
        y = yt
        f = ft
        gx = gtx
        gy = gty
        dx = -gx + beta * dx
        dy = -gy + beta * dy
        t_prev = t
        if t * dn < step_tol or stall:
            break
    return x, y


@njit(cache=True)
def cg_refine(X0, start, count, segs, T_D, max_iters, grad_tol, step_tol, f_tol, shrink, ls_max, c1):
    """Refine every candidate X0[k] over segs[start[k] : start[k] + count[k]].

    ``grad_tol <= 0`` selects the default relative tolerance.
    """
    out = X0.copy()
    for k in range(X0.shape[0]):
        lo = start[k]
        x, y = _cg(X0[k, 0], X0[k, 1], segs, lo, lo + count[k], T_D,
                   max_iters, grad_tol, step_tol, f_tol, shrink, ls_max, c1)
        out[k, 0] = x
        out[k, 1] = y
    return out


@njit(cache=True)
def dedup_order(masks, lengths, order, T_s):
    """Greedy survivors in ``order``: a candidate is dropped when the length of
    the symmetric difference between its inlier set and a survivor's is
    below ``T_s``.

    The difference is lsum(s) + lsum(r) - 2 * overlap(s, r), where the
    overlap only visits the survivor's inliers, and |lsum(s) - lsum(r)| is
    used as a cheap lower bound first.
    """
    m, n = masks.shape
    lsum = np.zeros(m)
    for i in range(m):
        for j in range(n):
            if masks[i, j]:
                lsum[i] += lengths[j]
    tiny = 1e-12 * lengths.sum()  # round-off on identical sets
    alive = np.ones(m, dtype=np.bool_)
    out = np.empty(m, dtype=np.int64)
    inl = np.empty(n, dtype=np.int64)
    ns = 0
    for a in range(m):
        s = order[a]
        if not alive[s]:
            continue
        out[ns] = s
        ns += 1
        k = 0
        for j in range(n):
            if masks[s, j]:
                inl[k] = j
                k += 1
        for b in range(a + 1, m):
            r = order[b]
            if not alive[r] or abs(lsum[s] - lsum[r]) >= T_s:
                continue
            overlap = 0.0
            for q in range(k):
                if masks[r, inl[q]]:
                    overlap += lengths[inl[q]]
            diff = lsum[s] + lsum[r] - 2.0 * overlap
            if diff < tiny:
                diff = 0.0
            if diff < T_s:
                alive[r] = False
    return out[:ns]
