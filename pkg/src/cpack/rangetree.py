"""Segment-tree range structure answering square length queries (2-D).

Given the segments of a planar curve and a fixed set of candidate squares,
the structure returns for a query square S a value M with

    len(curve inside S)  <=  M  <=  len(curve inside S+),

where S+ is S expanded on every side by eps/8 times the widest slab overlap
encountered (at most eps/4 times the radius).  Segments are split into four
slope classes, each mapped by a reflection into slope-[0,1] form and indexed
by a segment tree over x-intervals.  A query walks O(log n) nodes: nodes
whose interval the query spans are answered exactly from subtree prefix
sums; nodes partially overlapped are bounded by angle-bucket counts times
worst-case chord lengths; nodes strictly containing the query use values
precomputed per candidate square from boundary-crossing counts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import COORD_TOL, Cube, Curve
from .sweep import PackednessResult
from .wspd import CandidateSquareSet, candidate_squares

# node routing outcomes for a query x-range against a node interval
_SPANNED = 0  # node interval inside the query range: exact subtree answer
_EXACT_F = 1  # expanded query spans the interval: exact spanning-set answer
_ANCH_L = 2  # bound spanning set via crossings at the left interval boundary
_ANCH_R = 3  # bound spanning set via crossings at the right boundary
_CPRE = 4  # expanded query strictly inside: precomputed per-square value

_CLASS_NAMES = ("[0,1)", "[1,inf]", "[-1,0)", "(-inf,-1)")


def _kappas(eps: float) -> tuple[int, int]:
    return int(math.ceil(16.0 * math.sqrt(2.0) / eps)), int(math.ceil(16.0 / eps))


# ---------------------------------------------------------------------------
# slope classes


def _classify(dx: np.ndarray, dy: np.ndarray) -> np.ndarray:
    """Slope class per segment: 0:[0,1)  1:[1,inf]+vertical  2:[-1,0)  3:(-inf,-1)."""
    cls = np.empty(dx.size, dtype=np.int64)
    vertical = dx == 0.0
    with np.errstate(divide="ignore"):
        slope = np.where(vertical, np.inf, dy / np.where(vertical, 1.0, dx))
    cls[(slope >= 0.0) & (slope < 1.0)] = 0
    cls[(slope >= 1.0)] = 1
    cls[(slope >= -1.0) & (slope < 0.0)] = 2
    cls[(slope < -1.0)] = 3
    cls[vertical] = 1
    return cls


def _transform_points(xy: np.ndarray, cls: int) -> np.ndarray:
    """Reflection taking class `cls` segments to slope-[0,1] form."""
    x, y = xy[..., 0], xy[..., 1]
    if cls == 0:
        return np.stack([x, y], axis=-1)
    if cls == 1:
        return np.stack([y, x], axis=-1)
    if cls == 2:
        return np.stack([x, -y], axis=-1)
    return np.stack([-y, x], axis=-1)


def _transform_rect(rect: tuple[float, float, float, float], cls: int):
    """Image of an axis-aligned rectangle (x0, x1, y0, y1) under the class map."""
    x0, x1, y0, y1 = rect
    if cls == 0:
        return (x0, x1, y0, y1)
    if cls == 1:
        return (y0, y1, x0, x1)
    if cls == 2:
        return (x0, x1, -y1, -y0)
    return (-y1, -y0, x0, x1)


@dataclass
class SlopePartition:
    """Per-class segment lists in slope-[0,1] form with their inverse maps.

    `indices[c]` are the original segment indices of class c and
    `segments[c]` the transformed (m, 4) arrays [x1, y1, x2, y2] oriented so
    x1 < x2.  The class reflections are length-preserving, so per-class
    answers against the transformed query rectangle sum to the original.
    """

    indices: list[np.ndarray]
    segments: list[np.ndarray]
    class_names: tuple[str, ...] = _CLASS_NAMES


def partition_by_slope(curve: Curve) -> SlopePartition:
    """Split the curve's segments into the four slope classes."""
    if curve.dim != 2:
        raise ValueError("slope partition is defined for 2-D curves")
    a, b = curve.segment_arrays()
    cls = _classify(b[:, 0] - a[:, 0], b[:, 1] - a[:, 1])
    indices, segments = [], []
    for c in range(4):
        idx = np.nonzero(cls == c)[0]
        pa = _transform_points(a[idx], c)
        pb = _transform_points(b[idx], c)
        swap = pb[:, 0] < pa[:, 0]
        lo = np.where(swap[:, None], pb, pa)
        hi = np.where(swap[:, None], pa, pb)
        indices.append(idx)
        segments.append(np.column_stack([lo, hi]))
    return SlopePartition(indices=indices, segments=segments)


# ---------------------------------------------------------------------------
# prefix-length structure: total length of segment parts below a y value


class _PrefixLengths:
    """Sorted-breakpoint prefix sums of length-below-y for a segment set.

    Non-horizontal segments add length linearly between their endpoint ys;
    horizontal ones jump at their y.  Supports closed/exclusive evaluation,
    so the length with y in [lo, hi] is at(hi) - below(lo).
    """

    __slots__ = ("ys", "lin_cum", "jump_cum", "slope_after", "total")

    def __init__(self, y_lo: np.ndarray, y_hi: np.ndarray, lengths: np.ndarray):
        if y_lo.size == 0:
            self.ys = np.empty(0)
            self.lin_cum = np.empty(0)
            self.jump_cum = np.empty(0)
            self.slope_after = np.empty(0)
            self.total = 0.0
            return
        flat = y_hi == y_lo
        ramp_lo, ramp_hi = y_lo[~flat], y_hi[~flat]
        ramp_rate = lengths[~flat] / (ramp_hi - ramp_lo)
        ys = np.unique(np.concatenate([y_lo, y_hi]))
        d_slope = np.zeros(ys.size)
        np.add.at(d_slope, np.searchsorted(ys, ramp_lo), ramp_rate)
        np.add.at(d_slope, np.searchsorted(ys, ramp_hi), -ramp_rate)
        jumps = np.zeros(ys.size)
        np.add.at(jumps, np.searchsorted(ys, y_lo[flat]), lengths[flat])
        slope_after = np.cumsum(d_slope)
        slope_after[-1] = 0.0  # harden against rounding residue
        lin_steps = slope_after[:-1] * np.diff(ys)
        self.ys = ys
        self.lin_cum = np.concatenate([[0.0], np.cumsum(lin_steps)])
        self.jump_cum = np.cumsum(jumps)
        self.slope_after = slope_after
        self.total = float(self.lin_cum[-1] + self.jump_cum[-1])

    def at(self, q: float) -> float:
        """Total length with y <= q."""
        if self.ys.size == 0:
            return 0.0
        k = int(np.searchsorted(self.ys, q, side="right")) - 1
        if k < 0:
            return 0.0
        return float(self.lin_cum[k] + self.jump_cum[k] + self.slope_after[k] * (q - self.ys[k]))

    def below(self, q: float) -> float:
        """Total length with y < q."""
        if self.ys.size == 0:
            return 0.0
        k = int(np.searchsorted(self.ys, q, side="left")) - 1
        if k < 0:
            return 0.0
        return float(self.lin_cum[k] + self.jump_cum[k] + self.slope_after[k] * (q - self.ys[k]))

    def range(self, lo: float, hi: float) -> float:
        """Total length with y in the closed band [lo, hi]."""
        return max(0.0, self.at(hi) - self.below(lo))


# ---------------------------------------------------------------------------
# chord-length maxima


def _chord(t: float, h: float, g0: float, g1: float, ry0: float, ry1: float) -> float:
    """Length inside the rectangle of a slope-t line crossing the anchor at h.

    The rectangle occupies anchor distances [g0, g1] horizontally and
    [ry0, ry1] vertically; the line's height at distance xi from the anchor
    is h - t*xi (the anchor sits on the far side of the rectangle).
    """
    if t == 0.0:
        return (g1 - g0) if ry0 <= h <= ry1 else 0.0
    lo = max(g0, (h - ry1) / t)
    hi = min(g1, (h - ry0) / t)
    if hi <= lo:
        return 0.0
    return (hi - lo) * math.sqrt(1.0 + t * t)


def _chord_h_max(t: float, ha: float, hb: float, g0: float, g1: float, ry0: float, ry1: float) -> float:
    """Max chord over crossing heights h in [ha, hb] for a fixed slope."""
    a1 = ry1 + t * g0
    a2 = ry0 + t * g1
    pk_lo, pk_hi = (a1, a2) if a1 <= a2 else (a2, a1)
    if hb < pk_lo:
        return _chord(t, hb, g0, g1, ry0, ry1)
    if ha > pk_hi:
        return _chord(t, ha, g0, g1, ry0, ry1)
    width = g1 - g0
    height = ry1 - ry0
    full = width if t == 0.0 else min(width, height / t)
    return full * math.sqrt(1.0 + t * t)


def _anchored_max_chord(
    t_lo: float, t_hi: float, ha: float, hb: float, g0: float, g1: float, ry0: float, ry1: float
) -> float:
    """Exact sup of the chord over slopes [t_lo, t_hi] and heights [ha, hb].

    The chord is piecewise monotone in the slope between regime boundaries
    (where a clipping side activates) and the plateau crossing, so a finite
    candidate set of slopes is exhaustive.
    """
    width = g1 - g0
    height = ry1 - ry0
    cands = [t_lo, t_hi]
    if width > 0.0:
        cands.append(height / width)
    for h in (ha, hb):
        if g0 > 0.0:
            cands.append((h - ry1) / g0)
        if g1 > 0.0:
            cands.append((h - ry0) / g1)
    best = 0.0
    for t in cands:
        if t_lo <= t <= t_hi:
            val = _chord_h_max(t, ha, hb, g0, g1, ry0, ry1)
            if val > best:
                best = val
    return best


def _entrant_max_chord_left(t_lo: float, t_hi: float, ha: float, width: float, ry1: float) -> float:
    """Sup chord for segments entering the left square side at height >= ha.

    Going right and up from (left, h) the chord runs min(width, (ry1-h)/t)
    horizontally; it is maximal at the lowest entry height of the piece.
    """
    rise = ry1 - ha
    cands = [t_lo, t_hi]
    if width > 0.0:
        cands.append(rise / width)
    best = 0.0
    for t in cands:
        if t_lo <= t <= t_hi:
            ext = width if t == 0.0 else min(width, rise / t)
            if ext > 0.0:
                val = ext * math.sqrt(1.0 + t * t)
                if val > best:
                    best = val
    return best


def _entrant_max_chord_bottom(t_lo: float, t_hi: float, xa: float, rx1: float, height: float) -> float:
    """Sup chord for segments entering the bottom square side at x >= xa."""
    run = rx1 - xa
    cands = [t_lo, t_hi]
    if run > 0.0:
        cands.append(height / run)
    best = 0.0
    for t in cands:
        if t_lo <= t <= t_hi:
            ext = run if t == 0.0 else min(run, height / t)
            if ext > 0.0:
                val = ext * math.sqrt(1.0 + t * t)
                if val > best:
                    best = val
    return best


# ---------------------------------------------------------------------------
# per-class segment tree


class _ClassTree:
    """Segment tree over x-intervals for one slope class ([0,1] form)."""

    def __init__(self, segs: np.ndarray, eps: float, kappa1: int, kappa2: int):
        self.eps = eps
        self.kappa1 = kappa1
        self.kappa2 = kappa2
        self.theta = (math.pi / 4.0) / kappa1
        self.tan_lo = np.tan(self.theta * np.arange(kappa1))
        self.tan_hi = np.tan(self.theta * np.arange(1, kappa1 + 1))
        self.tan_hi[-1] = 1.0
        self.m = segs.shape[0]
        if self.m == 0:
            self.root = -1
            self.cvalues: dict[int, dict[int, float]] = {}
            return
        self.x1 = segs[:, 0]
        self.y1 = segs[:, 1]
        self.x2 = segs[:, 2]
        self.y2 = segs[:, 3]
        dx = self.x2 - self.x1
        if np.any(dx <= 0.0):
            raise ValueError("class segments must be oriented with x1 < x2")
        self.slope = (self.y2 - self.y1) / dx
        if np.any(self.slope < 0.0) or np.any(self.slope > 1.0 + 1e-12):
            raise ValueError("class segments must have slope within [0, 1]")
        self.slope = np.clip(self.slope, 0.0, 1.0)
        self.hyp = np.sqrt(1.0 + self.slope**2)
        mu = np.arctan(self.slope)
        self.bucket = np.minimum((mu / self.theta).astype(np.int64), kappa1 - 1)

        self.xs = np.unique(np.concatenate([self.x1, self.x2]))
        nleaf = 2 * self.xs.size + 1
        # leaf physical bounds
        leaf_lo = np.empty(nleaf)
        leaf_hi = np.empty(nleaf)
        leaf_lo[0] = -np.inf
        leaf_hi[0] = self.xs[0]
        for k in range(self.xs.size):
            leaf_lo[2 * k + 1] = self.xs[k]
            leaf_hi[2 * k + 1] = self.xs[k]
            if k + 1 < self.xs.size:
                leaf_lo[2 * k + 2] = self.xs[k]
                leaf_hi[2 * k + 2] = self.xs[k + 1]
        leaf_lo[nleaf - 1] = self.xs[-1]
        leaf_hi[nleaf - 1] = np.inf

        left: list[int] = []
        right: list[int] = []
        lo_leaf: list[int] = []
        hi_leaf: list[int] = []
        xlo: list[float] = []
        xhi: list[float] = []

        def build(a: int, b: int) -> int:
            node = len(left)
            left.append(-1)
            right.append(-1)
            lo_leaf.append(a)
            hi_leaf.append(b)
            xlo.append(0.0)
            xhi.append(0.0)
            if a == b:
                xlo[node] = leaf_lo[a]
                xhi[node] = leaf_hi[a]
                return node
            mid = (a + b) // 2
            lc = build(a, mid)
            rc = build(mid + 1, b)
            left[node] = lc
            right[node] = rc
            xlo[node] = xlo[lc]
            xhi[node] = xhi[rc]
            return node

        self.root = build(0, nleaf - 1)
        self.left = np.array(left)
        self.right = np.array(right)
        self.lo_leaf = np.array(lo_leaf)
        self.hi_leaf = np.array(hi_leaf)
        self.xlo = np.array(xlo)
        self.xhi = np.array(xhi)
        n_nodes = self.left.size

        # canonical insertion of each segment's leaf range
        self.F: list[list[int]] = [[] for _ in range(n_nodes)]
        pos1 = np.searchsorted(self.xs, self.x1)
        pos2 = np.searchsorted(self.xs, self.x2)
        for i in range(self.m):
            self._insert(self.root, 2 * pos1[i] + 1, 2 * pos2[i] + 1, i)
        self.F_arr = [np.array(f, dtype=np.int64) for f in self.F]

        # subtree sets, bottom-up (children are built before parents? no:
        # build() numbers parents first, so iterate nodes in reverse)
        self.L_arr: list[np.ndarray] = [None] * n_nodes  # type: ignore[list-item]
        for node in range(n_nodes - 1, -1, -1):
            parts = [self.F_arr[node]]
            if self.left[node] >= 0:
                parts.append(self.L_arr[self.left[node]])
                parts.append(self.L_arr[self.right[node]])
            self.L_arr[node] = np.unique(np.concatenate(parts)) if len(parts) > 1 else parts[0]

        # associated structures
        self.subtree_prefix: list[_PrefixLengths] = []
        self.span_prefix: list[_PrefixLengths] = []
        self.span_buckets: list[dict[int, tuple]] = []
        for node in range(n_nodes):
            self.subtree_prefix.append(self._prefix_for(self.L_arr[node], node))
            self.span_prefix.append(self._prefix_for(self.F_arr[node], node))
            self.span_buckets.append(self._buckets_for(self.F_arr[node], node))
        self.cvalues = {}

    # -- construction helpers

    def _insert(self, node: int, lo: int, hi: int, seg: int) -> None:
        if hi < self.lo_leaf[node] or lo > self.hi_leaf[node]:
            return
        if lo <= self.lo_leaf[node] and self.hi_leaf[node] <= hi:
            self.F[node].append(seg)
            return
        self._insert(self.left[node], lo, hi, seg)
        self._insert(self.right[node], lo, hi, seg)

    def _prefix_for(self, idx: np.ndarray, node: int) -> _PrefixLengths:
        """Prefix structure over the given segments clipped to the node slab."""
        if idx.size == 0:
            return _PrefixLengths(np.empty(0), np.empty(0), np.empty(0))
        xl = np.maximum(self.x1[idx], self.xlo[node])
        xr = np.minimum(self.x2[idx], self.xhi[node])
        keep = xr > xl
        idx = idx[keep]
        xl = xl[keep]
        xr = xr[keep]
        ya = self.y1[idx] + self.slope[idx] * (xl - self.x1[idx])
        yb = self.y1[idx] + self.slope[idx] * (xr - self.x1[idx])
        lengths = (xr - xl) * self.hyp[idx]
        return _PrefixLengths(ya, yb, lengths)

    def _buckets_for(self, idx: np.ndarray, node: int) -> dict[int, tuple]:
        """Per-angle-bucket crossing data of the node's spanning segments.

        For bucket j: (sorted y at the right boundary, sorted negated y at
        the left boundary [mirrored frame], x1, y1, slope arrays).
        """
        out: dict[int, tuple] = {}
        if idx.size == 0:
            return out
        xl = self.xlo[node]
        xr = self.xhi[node]
        for j in np.unique(self.bucket[idx]):
            sub = idx[self.bucket[idx] == j]
            yl = self.y1[sub] + self.slope[sub] * (xl - self.x1[sub])
            yr = self.y1[sub] + self.slope[sub] * (xr - self.x1[sub])
            out[int(j)] = (
                np.sort(yr),
                np.sort(-yl),
                self.x1[sub],
                self.y1[sub],
                self.slope[sub],
            )
        return out

    # -- query machinery

    def _route(self, node: int, rect) -> int:
        qx0, qx1 = rect[0], rect[1]
        x_l = self.xlo[node]
        x_r = self.xhi[node]
        if qx0 <= x_l and x_r <= qx1:
            return _SPANNED
        w = min(qx1, x_r) - max(qx0, x_l)
        delta = self.eps * w / 8.0
        if qx0 - delta <= x_l and qx1 + delta >= x_r:
            return _EXACT_F
        if qx1 >= x_r:
            return _ANCH_R
        if qx0 <= x_l:
            return _ANCH_L
        if qx0 - delta >= x_l and qx1 + delta <= x_r:
            return _CPRE
        return _ANCH_L if qx0 - delta < x_l else _ANCH_R

    def _anchored_bound(self, node: int, rect, anchor_right: bool) -> float:
        qx0, qx1, qy0, qy1 = rect
        x_l = self.xlo[node]
        x_r = self.xhi[node]
        rx0 = max(qx0, x_l)
        rx1 = min(qx1, x_r)
        if rx1 <= rx0:
            return 0.0
        if anchor_right:
            g0 = x_r - rx1
            g1 = x_r - rx0
            ry0, ry1 = qy0, qy1
            crossings_slot = 0
        else:
            # mirror (x, y) -> (-x, -y): the left boundary becomes a right
            # anchor at -x_l, the rect becomes [-rx1, -rx0] x [-qy1, -qy0],
            # and crossing heights negate (the pre-negated sorted array)
            g0 = rx0 - x_l
            g1 = rx1 - x_l
            ry0, ry1 = -qy1, -qy0
            crossings_slot = 1
        kappa2 = self.kappa2
        total = 0.0
        for j, data in self.span_buckets[node].items():
            crossings = data[crossings_slot]
            t_lo = float(self.tan_lo[j])
            t_hi = float(self.tan_hi[j])
            i_lo = ry0 + t_lo * g0
            i_hi = ry1 + t_hi * g1
            # common plateau across the bucket's slopes
            a_lo = min(ry1 + t_lo * g0, ry0 + t_lo * g1)
            a_hi = min(ry1 + t_hi * g0, ry0 + t_hi * g1)
            pk_lo = max(a_lo, a_hi)
            b_lo = max(ry1 + t_lo * g0, ry0 + t_lo * g1)
            b_hi = max(ry1 + t_hi * g0, ry0 + t_hi * g1)
            pk_hi = min(b_lo, b_hi)
            bounds = [i_lo]
            if pk_lo > i_lo and pk_lo < i_hi and pk_hi >= pk_lo:
                bounds.extend(np.linspace(i_lo, pk_lo, kappa2 + 1)[1:])
                if pk_hi < i_hi:
                    bounds.append(pk_hi)
                    bounds.extend(np.linspace(pk_hi, i_hi, kappa2 + 1)[1:])
                else:
                    bounds.append(i_hi)
            else:
                bounds.extend(np.linspace(i_lo, i_hi, 2 * kappa2 + 1)[1:])
            barr = np.array(bounds)
            lo_idx = np.searchsorted(crossings, barr[:-1], side="left")
            hi_idx = np.searchsorted(crossings, barr[1:], side="left")
            hi_idx[-1] = np.searchsorted(crossings, barr[-1], side="right")
            counts = hi_idx - lo_idx
            for k in np.nonzero(counts)[0]:
                chord = _anchored_max_chord(
                    t_lo, t_hi, float(barr[k]), float(barr[k + 1]), g0, g1, ry0, ry1
                )
                total += counts[k] * chord
        return total

    def _cpre_path(self, rect) -> list[int]:
        """Nodes that answer this rectangle from precomputed values."""
        if self.root < 0:
            return []
        out = []
        node = self.root
        qx0, qx1 = rect[0], rect[1]
        while True:
            if self._route(node, rect) == _CPRE and self.F_arr[node].size > 0:
                out.append(node)
            lc, rc = self.left[node], self.right[node]
            if lc < 0:
                break
            if self.xlo[lc] <= qx0 and qx1 <= self.xhi[lc]:
                node = lc
            elif self.xlo[rc] <= qx0 and qx1 <= self.xhi[rc]:
                node = rc
            else:
                break
        return out

    def precompute(self, rects: list[tuple], ids: list[int]) -> None:
        """Store bound values for every candidate square at its inner nodes."""
        if self.root < 0:
            return
        needs: dict[int, list[int]] = {}
        rect_of = {}
        for rect, sid in zip(rects, ids):
            rect_of[sid] = rect
            for node in self._cpre_path(rect):
                needs.setdefault(node, []).append(sid)
        for node, sids in needs.items():
            store = self.cvalues.setdefault(node, {})
            vals = self._cpre_values(node, [rect_of[s] for s in sids])
            for sid, val in zip(sids, vals):
                store[sid] = val

    def _cpre_values(self, node: int, rects: list[tuple]) -> np.ndarray:
        """Entrant-count bounds for squares strictly inside the node interval.

        Spanning segments enter a square through its left or bottom side
        exactly once; per angle bucket, per boundary piece, the entrant count
        times the piece's worst-case chord bounds the total length.
        """
        k2 = self.kappa2
        nsq = len(rects)
        out = np.zeros(nsq)
        qx0 = np.array([r[0] for r in rects])
        qx1 = np.array([r[1] for r in rects])
        qy0 = np.array([r[2] for r in rects])
        qy1 = np.array([r[3] for r in rects])
        width = qx1 - qx0
        height = qy1 - qy0
        for j, data in self.span_buckets[node].items():
            _, _, sx1, sy1, st = data
            t_lo = float(self.tan_lo[j])
            t_hi = float(self.tan_hi[j])
            # heights where each segment crosses each square's left edge
            ycross = sy1[:, None] + st[:, None] * (qx0[None, :] - sx1[:, None])
            left_in = (ycross >= qy0[None, :]) & (ycross <= qy1[None, :])
            below = ycross < qy0[None, :]
            with np.errstate(divide="ignore", invalid="ignore"):
                xcross = sx1[:, None] + (qy0[None, :] - sy1[:, None]) / st[:, None]
            bottom_in = below & (xcross <= qx1[None, :])
            # piece indices
            with np.errstate(divide="ignore", invalid="ignore"):
                lidx = np.floor((ycross - qy0[None, :]) / (height[None, :] / k2)).astype(np.int64)
                bidx = np.floor((xcross - qx0[None, :]) / (width[None, :] / k2)).astype(np.int64)
            lidx = np.clip(lidx, 0, k2 - 1)
            bidx = np.clip(bidx, 0, k2 - 1)
            left_counts = np.zeros((k2, nsq), dtype=np.int64)
            bot_counts = np.zeros((k2, nsq), dtype=np.int64)
            rows, cols = np.nonzero(left_in)
            np.add.at(left_counts, (lidx[rows, cols], cols), 1)
            rows, cols = np.nonzero(bottom_in)
            np.add.at(bot_counts, (bidx[rows, cols], cols), 1)
            for s in range(nsq):
                lc = left_counts[:, s]
                for k in np.nonzero(lc)[0]:
                    ha = qy0[s] + k * height[s] / k2
                    out[s] += lc[k] * _entrant_max_chord_left(t_lo, t_hi, ha, float(width[s]), float(qy1[s]))
                bc = bot_counts[:, s]
                for k in np.nonzero(bc)[0]:
                    xa = qx0[s] + k * width[s] / k2
                    out[s] += bc[k] * _entrant_max_chord_bottom(t_lo, t_hi, xa, float(qx1[s]), float(height[s]))
        return out

    def query(self, rect, square_id=None) -> tuple[float, float]:
        """Bound the class content of `rect`; returns (value, widest slab)."""
        if self.root < 0:
            return 0.0, 0.0
        qx0, qx1, qy0, qy1 = rect
        total = 0.0
        w_max = 0.0
        stack = [self.root]
        while stack:
            node = stack.pop()
            x_l = self.xlo[node]
            x_r = self.xhi[node]
            # zero-width overlaps carry no length (no vertical segments in
            # slope-[0,1] form), so touching intervals are skipped outright
            if qx1 <= x_l or qx0 >= x_r:
                continue
            route = self._route(node, rect)
            if route == _SPANNED:
                total += self.subtree_prefix[node].range(qy0, qy1)
                continue
            if self.F_arr[node].size > 0:
                if route == _EXACT_F:
                    contrib = self.span_prefix[node].range(qy0, qy1)
                elif route == _CPRE:
                    store = self.cvalues.get(node)
                    if store is None or square_id not in store:
                        raise KeyError("query square is not in the precomputed candidate set")
                    contrib = store[square_id]
                else:
                    contrib = self._anchored_bound(node, rect, route == _ANCH_R)
                if contrib > 0.0:
                    total += contrib
                    w = min(qx1, x_r) - max(qx0, x_l)
                    if w > w_max:
                        w_max = w
            if self.left[node] >= 0:
                stack.append(self.right[node])
                stack.append(self.left[node])
        return total, w_max


# ---------------------------------------------------------------------------
# public structure


class RangeStructure:
    """Queryable structure over one or more slope-class trees.

    Built for a fixed candidate square set; queries outside that set raise.
    `query` returns the bound M; `query_detailed` additionally reports the
    widest slab overlap w, defining the expanded square S+ (each side moved
    out by eps*w/8) that upper-bounds M.
    """

    def __init__(self, trees, eps: float, centers: np.ndarray, radii: np.ndarray):
        self.trees = trees  # list of (class id, _ClassTree)
        self.eps = eps
        self.kappa1, self.kappa2 = _kappas(eps)
        self.centers = centers
        self.radii = radii

    def _rects(self, i: int) -> list[tuple]:
        x0 = self.centers[i, 0] - self.radii[i]
        x1 = self.centers[i, 0] + self.radii[i]
        y0 = self.centers[i, 1] - self.radii[i]
        y1 = self.centers[i, 1] + self.radii[i]
        return [_transform_rect((x0, x1, y0, y1), cls) for cls, _ in self.trees]

    def lookup(self, square: Cube) -> int:
        """Index of a candidate square matching center and radius to 1e-12."""
        hit = np.nonzero(
            (np.abs(self.centers[:, 0] - square.center[0]) <= COORD_TOL)
            & (np.abs(self.centers[:, 1] - square.center[1]) <= COORD_TOL)
            & (np.abs(self.radii - square.radius) <= COORD_TOL)
        )[0]
        if hit.size == 0:
            raise KeyError("square is not in the candidate set this structure was built for")
        return int(hit[0])

    def query_detailed(self, i: int) -> tuple[float, float]:
        total = 0.0
        w_max = 0.0
        for (cls, tree), rect in zip(self.trees, self._rects(i)):
            val, w = tree.query(rect, square_id=i)
            total += val
            if w > w_max:
                w_max = w
        return total, w_max

    def query_index(self, i: int) -> float:
        return self.query_detailed(i)[0]

    def query(self, square: Cube) -> float:
        return self.query_index(self.lookup(square))

    def expanded_square(self, i: int, w: float | None = None) -> Cube:
        """The expanded square S+ certified as the upper side of the bound."""
        if w is None:
            w = 2.0 * float(self.radii[i])
        pad = self.eps * w / 8.0
        return Cube(self.centers[i], float(self.radii[i]) + pad)


def _as_candidate_arrays(candidates) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(candidates, CandidateSquareSet):
        return candidates.centers, candidates.radii
    arr = np.asarray(candidates, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[1] != 3:
        raise ValueError("candidates must be a CandidateSquareSet or an (k, 3) array of (cx, cy, r)")
    return arr[:, :2], arr[:, 2]


def build_structure(segments, eps: float, candidates) -> RangeStructure:
    """Build the structure for segments already in slope-[0,1] form.

    `segments` is an (m, 4) array-like of [x1, y1, x2, y2]; an empty list
    yields a structure answering 0 for every candidate query.  Candidate
    squares are given as a CandidateSquareSet or (cx, cy, r) rows; their
    inner-node values are precomputed here.
    """
    if not (0.0 < float(eps) <= 1.0):
        raise ValueError("eps must lie in (0, 1]")
    eps = float(eps)
    segs = np.asarray(segments, dtype=np.float64).reshape(-1, 4)
    if segs.shape[0] > 0:
        swap = segs[:, 2] < segs[:, 0]
        segs = np.where(swap[:, None], segs[:, [2, 3, 0, 1]], segs)
    centers, radii = _as_candidate_arrays(candidates)
    k1, k2 = _kappas(eps)
    tree = _ClassTree(segs, eps, k1, k2)
    structure = RangeStructure([(0, tree)], eps, centers, radii)
    rects = [
        (centers[i, 0] - radii[i], centers[i, 0] + radii[i], centers[i, 1] - radii[i], centers[i, 1] + radii[i])
        for i in range(radii.size)
    ]
    tree.precompute(rects, list(range(radii.size)))
    return structure


def build_curve_structure(curve: Curve, eps: float, candidates: CandidateSquareSet) -> RangeStructure:
    """Four-class structure over all segments of a 2-D curve."""
    if curve.dim != 2:
        raise ValueError("the range structure is defined for 2-D curves")
    eps = float(eps)
    part = partition_by_slope(curve)
    k1, k2 = _kappas(eps)
    trees = []
    for cls in range(4):
        tree = _ClassTree(part.segments[cls], eps, k1, k2)
        trees.append((cls, tree))
    structure = RangeStructure(trees, eps, candidates.centers, candidates.radii)
    ids = list(range(len(candidates)))
    for cls, tree in trees:
        rects = [structure._rects(i)[cls] for i in ids]
        tree.precompute(rects, ids)
    return structure


def query(structure: RangeStructure, square: Cube) -> float:
    """Bound the curve length inside a candidate square S.

    Returns M with len(S) <= M <= len(S+); raises KeyError when S was not in
    the candidate set the structure was built for.
    """
    return structure.query(square)


# ---------------------------------------------------------------------------
# red/blue intersection counting


def _orient(ax, ay, bx, by, cx, cy):
    return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)


def _intersect_matrix(red: np.ndarray, blue: np.ndarray) -> np.ndarray:
    """Boolean (n_red, n_blue) closed-segment intersection tests."""
    r1x, r1y, r2x, r2y = (red[:, k][:, None] for k in range(4))
    b1x, b1y, b2x, b2y = (blue[:, k][None, :] for k in range(4))
    d1 = _orient(r1x, r1y, r2x, r2y, b1x, b1y)
    d2 = _orient(r1x, r1y, r2x, r2y, b2x, b2y)
    d3 = _orient(b1x, b1y, b2x, b2y, r1x, r1y)
    d4 = _orient(b1x, b1y, b2x, b2y, r2x, r2y)
    proper = (((d1 > 0) & (d2 < 0)) | ((d1 < 0) & (d2 > 0))) & (
        ((d3 > 0) & (d4 < 0)) | ((d3 < 0) & (d4 > 0))
    )

    def on_seg(px, py, qx, qy, cx, cy, dz):
        return (
            (dz == 0)
            & (cx <= np.maximum(px, qx))
            & (cx >= np.minimum(px, qx))
            & (cy <= np.maximum(py, qy))
            & (cy >= np.minimum(py, qy))
        )

    touch = (
        on_seg(r1x, r1y, r2x, r2y, b1x, b1y, d1)
        | on_seg(r1x, r1y, r2x, r2y, b2x, b2y, d2)
        | on_seg(b1x, b1y, b2x, b2y, r1x, r1y, d3)
        | on_seg(b1x, b1y, b2x, b2y, r2x, r2y, d4)
    )
    return proper | touch


def _intersect_one(red_row, blue_row) -> bool:
    return bool(_intersect_matrix(red_row[None, :], blue_row[None, :])[0, 0])


def _count_brute(red: np.ndarray, blue: np.ndarray) -> np.ndarray:
    return _intersect_matrix(red, blue).sum(axis=1).astype(np.int64)


def _count_sweep(red: np.ndarray, blue: np.ndarray) -> np.ndarray:
    """Plane sweep over x with active lists; exact pair tests on y-overlap.

    Events are segment x-extents; a segment entering the sweep is tested
    against active segments of the other color whose y-ranges overlap.
    """
    counts = np.zeros(red.shape[0], dtype=np.int64)
    events = []  # (x, kind, color, idx): kind 0 = enter, 1 = leave
    for color, segs in ((0, red), (1, blue)):
        x_lo = np.minimum(segs[:, 0], segs[:, 2])
        x_hi = np.maximum(segs[:, 0], segs[:, 2])
        for i in range(segs.shape[0]):
            events.append((x_lo[i], 0, color, i))
            events.append((x_hi[i], 1, color, i))
    # enters before leaves at equal x so touching extents still get tested
    events.sort(key=lambda e: (e[0], e[1]))
    active: list[set] = [set(), set()]
    y_lo = [np.minimum(red[:, 1], red[:, 3]), np.minimum(blue[:, 1], blue[:, 3])]
    y_hi = [np.maximum(red[:, 1], red[:, 3]), np.maximum(blue[:, 1], blue[:, 3])]
    for x, kind, color, i in events:
        if kind == 1:
            active[color].discard(i)
            continue
        other = 1 - color
        lo_i = y_lo[color][i]
        hi_i = y_hi[color][i]
        segs_i = (red if color == 0 else blue)[i]
        for j in active[other]:
            if y_lo[other][j] > hi_i or y_hi[other][j] < lo_i:
                continue
            other_seg = (red if other == 0 else blue)[j]
            if color == 0:
                if _intersect_one(segs_i, other_seg):
                    counts[i] += 1
            else:
                if _intersect_one(other_seg, segs_i):
                    counts[j] += 1
        active[color].add(i)
    return counts


def count_intersections(red, blue, backend: str = "auto") -> np.ndarray:
    """For each red segment, the number of blue segments meeting it.

    Closed-segment semantics: touching endpoints and collinear overlap
    count.  `backend` is "brute" (all pairs, vectorized), "sweep" (x sweep
    with y-overlap pruning), or "auto" (brute below 5000 red*blue pairs).
    The structure's per-square precomputation uses an axis-aligned
    specialization of the same counting contract.
    """
    red = np.asarray(red, dtype=np.float64).reshape(-1, 4)
    blue = np.asarray(blue, dtype=np.float64).reshape(-1, 4)
    if red.shape[0] == 0 or blue.shape[0] == 0:
        return np.zeros(red.shape[0], dtype=np.int64)
    if backend == "auto":
        backend = "brute" if red.shape[0] * blue.shape[0] <= 5000 else "sweep"
    if backend == "brute":
        return _count_brute(red, blue)
    if backend == "sweep":
        return _count_sweep(red, blue)
    raise ValueError(f"unknown backend {backend!r}")


# ---------------------------------------------------------------------------
# the (6+eps)-approximation driver


def approx6(curve: Curve, eps: float) -> PackednessResult:
    """(6+eps)-approximate packedness of a 2-D curve.

    Queries every candidate square against the range structure and returns
    the best bound-to-radius ratio V: the true packedness c satisfies
    V <= (1+eps/4)*c and c <= (6+eps)*V.
    """
    if curve.dim != 2:
        raise ValueError("approx6 requires a 2-D curve")
    eps = float(eps)
    if not (0.0 < eps <= 1.0):
        raise ValueError("eps must lie in (0, 1]")
    cand = candidate_squares(curve, eps)
    structure = build_curve_structure(curve, eps, cand)
    best_val = -1.0
    best_i = 0
    for i in range(len(cand)):
        val = structure.query_index(i) / float(cand.radii[i])
        if val > best_val:
            best_val = val
            best_i = i
    return PackednessResult(
        value=float(best_val),
        witness=cand.cube(best_i),
        factor=6.0 + eps,
        algorithm="approx6",
    )
