"""Compiled radial-sweep kernels.

These mirror the event construction in `sweep._ramp_events` with tight loops
so that vertex-centered sweeps can run over thousands of centers.  The shared
entry point evaluates max over event radii r > h of L(r) / (r - h), where
L(r) is the curve length inside the cube of radius r:

* h = 0 gives the exact fixed-center optimum (value, radius).
* h > 0 gives an upper bound for every center within Chebyshev distance h of
  the probe center, used by the grid oracle to prune cells; the bound is
  +inf when the cube of radius h already contains part of the curve.
"""

from __future__ import annotations

import numpy as np
from numba import njit, prange


@njit(cache=True)
def eval_center(pts, center, h):
    """Return (value, radius, unbounded) for one probe center.

    `pts` is the (n, d) vertex array of the curve.  The value maximizes
    L(r)/(r-h) over event radii r > h; between events that ratio is monotone,
    so event radii suffice.  Ties go to the smallest radius.
    """
    n, d = pts.shape
    m = n - 1
    kmax = d * d + 2
    max_ev = 2 * m * (kmax + 1)
    ev_r = np.empty(max_ev, np.float64)
    ev_a = np.empty(max_ev, np.float64)
    ev_b = np.empty(max_ev, np.float64)
    cnt = 0
    cand = np.empty(kmax, np.float64)
    u = np.empty(d, np.float64)
    v = np.empty(d, np.float64)

    for i in range(m):
        seg_len = 0.0
        ra = 0.0
        rb = 0.0
        for k in range(d):
            u[k] = pts[i, k] - center[k]
            v[k] = pts[i + 1, k] - pts[i, k]
            seg_len += v[k] * v[k]
            if abs(u[k]) > ra:
                ra = abs(u[k])
            if abs(u[k] + v[k]) > rb:
                rb = abs(u[k] + v[k])
        seg_len = np.sqrt(seg_len)
        # snap threshold: boundary radii below this are cancellation dust
        # standing for an exact 0 (center on the segment)
        snap = 1e-13 * (ra if ra > rb else rb)

        nc = 0
        cand[nc] = 0.0
        nc += 1
        cand[nc] = 1.0
        nc += 1
        for k in range(d):
            if v[k] != 0.0:
                t = -u[k] / v[k]
                if 0.0 < t < 1.0:
                    cand[nc] = t
                    nc += 1
        for k in range(d):
            for j in range(k + 1, d):
                dv = v[k] - v[j]
                if dv != 0.0:
                    t = (u[j] - u[k]) / dv
                    if 0.0 < t < 1.0:
                        cand[nc] = t
                        nc += 1
                sv = v[k] + v[j]
                if sv != 0.0:
                    t = -(u[k] + u[j]) / sv
                    if 0.0 < t < 1.0:
                        cand[nc] = t
                        nc += 1
        # insertion sort of the candidate cut parameters
        for a in range(1, nc):
            key = cand[a]
            b = a - 1
            while b >= 0 and cand[b] > key:
                cand[b + 1] = cand[b]
                b -= 1
            cand[b + 1] = key

        for a in range(nc - 1):
            ta = cand[a]
            tb = cand[a + 1]
            if tb <= ta:
                continue
            tm = 0.5 * (ta + tb)
            best_abs = -1.0
            mk = 0.0
            ck = 0.0
            for k in range(d):
                yk = u[k] + tm * v[k]
                ak = abs(yk)
                if ak > best_abs:
                    best_abs = ak
                    if yk >= 0.0:
                        mk = v[k]
                        ck = u[k]
                    else:
                        mk = -v[k]
                        ck = -u[k]
            fa = mk * ta + ck
            fb = mk * tb + ck
            if abs(fa) <= snap:
                fa = 0.0
            if abs(fb) <= snap:
                fb = 0.0
            content = (tb - ta) * seg_len
            if fa == fb:
                ev_r[cnt] = fa
                ev_a[cnt] = 0.0
                ev_b[cnt] = content
                cnt += 1
            else:
                if fa < fb:
                    r_lo = fa
                    r_hi = fb
                else:
                    r_lo = fb
                    r_hi = fa
                rate = content / (r_hi - r_lo)
                ev_r[cnt] = r_lo
                ev_a[cnt] = rate
                ev_b[cnt] = -r_lo * rate
                cnt += 1
                ev_r[cnt] = r_hi
                ev_a[cnt] = -rate
                ev_b[cnt] = r_hi * rate
                cnt += 1

    order = np.argsort(ev_r[:cnt])
    slope = 0.0
    icept = 0.0
    idx = 0
    while idx < cnt:
        r = ev_r[order[idx]]
        if r > h:
            break
        slope += ev_a[order[idx]]
        icept += ev_b[order[idx]]
        idx += 1
    if h > 0.0 and slope * h + icept > 0.0:
        return np.inf, h, True

    best_val = 0.0
    best_r = 0.0
    while idx < cnt:
        r = ev_r[order[idx]]
        slope += ev_a[order[idx]]
        icept += ev_b[order[idx]]
        while idx + 1 < cnt and ev_r[order[idx + 1]] == r:
            idx += 1
            slope += ev_a[order[idx]]
            icept += ev_b[order[idx]]
        val = (slope * r + icept) / (r - h)
        if val > best_val:
            best_val = val
            best_r = r
        idx += 1
    return best_val, best_r, False


@njit(cache=True, parallel=True)
def eval_centers_batch(pts, centers, h):
    """Vectorized `eval_center` over a (m, d) array of probe centers."""
    m = centers.shape[0]
    vals = np.empty(m, np.float64)
    rads = np.empty(m, np.float64)
    for i in prange(m):
        val, r, _ = eval_center(pts, centers[i], h)
        vals[i] = val
        rads[i] = r
    return vals, rads


@njit(cache=True, parallel=True)
def eval_bounds_batch(pts, centers, hs):
    """Per-cell upper bounds: eval_center with an individual h per center."""
    m = centers.shape[0]
    vals = np.empty(m, np.float64)
    for i in prange(m):
        val, _, _ = eval_center(pts, centers[i], hs[i])
        vals[i] = val
    return vals


def warmup(dim: int = 2) -> None:
    """Force JIT compilation so timed code paths run precompiled."""
    pts = np.array([[0.0] * dim, [1.0] + [0.0] * (dim - 1)])
    eval_center(pts, pts[0], 0.0)
    eval_center(pts, pts[0], 0.25)
    eval_centers_batch(pts, pts.copy(), 0.0)
    eval_bounds_batch(pts, pts.copy(), np.array([0.1, 0.1]))
