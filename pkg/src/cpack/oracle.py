"""Brute-force reference bounds used to validate the approximation algorithms.

Everything here recomputes lengths with its own box-clipping code (interval
intersection per axis on explicit box bounds) so that a bug in the main
clipping or sweep paths cannot silently confirm itself.  The grid bound is
certified: the returned value is the packedness of a concrete witness cube,
recomputed here, so it is a true lower bound on the optimum no matter what
the search did.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .geometry import Cube, Curve, DimensionMismatchError, as_point, packedness
from .sweep import radial_events

# cells holding at most this many grid points are evaluated exhaustively
# instead of being subdivided further
_LEAF_BATCH = 8


@dataclass(frozen=True)
class OracleBound:
    """A certified lower bound on the maximum packedness value.

    `lower` equals the packedness of `witness` (recomputed independently),
    hence is achieved and sound regardless of how the witness was found.
    """

    lower: float
    witness: Cube
    method: str


def box_clip_fractions(starts: np.ndarray, ends: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """Fraction of each segment inside the closed box [lo, hi].

    Independent of the main clipping path: works on explicit box bounds and
    intersects the per-axis parameter intervals directly.
    """
    t0 = np.zeros(starts.shape[0])
    t1 = np.ones(starts.shape[0])
    for k in range(starts.shape[1]):
        a = starts[:, k]
        p = ends[:, k] - a
        flat = p == 0.0
        with np.errstate(divide="ignore", invalid="ignore"):
            u = (lo[k] - a) / p
            w = (hi[k] - a) / p
        swap = u > w
        u2 = np.where(swap, w, u)
        w2 = np.where(swap, u, w)
        outside = flat & ((a < lo[k]) | (a > hi[k]))
        u2 = np.where(flat, np.where(outside, np.inf, -np.inf), u2)
        w2 = np.where(flat, np.where(outside, -np.inf, np.inf), w2)
        t0 = np.maximum(t0, u2)
        t1 = np.minimum(t1, w2)
    return np.clip(t1 - t0, 0.0, None)


def box_length_inside(curve: Curve, lo, hi) -> float:
    """Curve length inside the closed box [lo, hi], by direct clipping."""
    lo = as_point(lo)
    hi = as_point(hi)
    if lo.size != curve.dim or hi.size != curve.dim:
        raise DimensionMismatchError("box bounds do not match the curve dimension")
    starts, ends = curve.segment_arrays()
    frac = box_clip_fractions(starts, ends, lo, hi)
    return float(np.dot(frac, np.linalg.norm(ends - starts, axis=1)))


def cube_packedness(curve: Curve, cube: Cube) -> float:
    """Packedness of one cube via the oracle's own clipping."""
    return box_length_inside(curve, cube.lo, cube.hi) / cube.radius


def naive_sandwich_check(curve: Curve, square: Cube, expanded: Cube, value: float, rel_slack: float = 1e-9) -> bool:
    """Whether len(S) <= value <= len(S+) holds within relative slack.

    Both lengths come from the oracle clipper; the slack is relative to the
    expanded-square length on both sides.
    """
    if square.dim != curve.dim or expanded.dim != curve.dim:
        raise DimensionMismatchError("square dimension does not match the curve")
    inside = box_length_inside(curve, square.lo, square.hi)
    inside_plus = box_length_inside(curve, expanded.lo, expanded.hi)
    slack = rel_slack * inside_plus
    return (inside - slack <= value) and (value <= inside_plus + slack)


def dense_packedness_scan(curve: Curve, center, r_samples: int) -> list[tuple[float, float]]:
    """Packedness values at log-spaced radii between the extreme event radii.

    Pure sampling via the main packedness function; used to cross-check that
    no sweep interval hides a larger value than its endpoints.
    """
    if r_samples < 3:
        raise ValueError("r_samples must be >= 3")
    center = as_point(center)
    events = radial_events(curve, center)
    if not events:
        raise ValueError("no positive event radii at this center")
    r_min = events[0].radius
    r_max = events[-1].radius
    radii = np.geomspace(r_min, r_max, r_samples)
    return [(float(r), packedness(curve, Cube(center, float(r)))) for r in radii]


def _grid_axes(curve: Curve, resolution: int) -> list[np.ndarray]:
    """Per-axis grid coordinates over the bounding box inflated by one cell.

    Degenerate axes (zero extent) collapse to a single coordinate.
    """
    lo = curve.points.min(axis=0)
    hi = curve.points.max(axis=0)
    axes = []
    for k in range(curve.dim):
        cell = (hi[k] - lo[k]) / (resolution - 1)
        if cell == 0.0:
            axes.append(np.array([lo[k]]))
        else:
            axes.append(np.linspace(lo[k] - cell, hi[k] + cell, resolution))
    return axes


def grid_lower_bound(curve: Curve, resolution: int) -> OracleBound:
    """Certified lower bound on the maximum packedness from a center grid.

    Evaluates the exact fixed-center optimum at every curve vertex and every
    point of a resolution^d grid over the inflated bounding box, and returns
    the best.  Grid cells whose entire center range provably cannot beat the
    current best are pruned by a sound bound (the inside-length profile of
    the cell midpoint evaluated with a shifted denominator), so the result
    equals the exhaustive maximum while touching far fewer centers.  The
    reported value is re-certified as the packedness of the witness cube.
    """
    if resolution < 2:
        raise ValueError("resolution must be >= 2")
    from . import _kernels

    pts = curve.points
    best_val = -1.0
    best_center = None
    best_r = 0.0

    vertices = np.unique(pts, axis=0)  # sorted rows: deterministic order
    vals, rads = _kernels.eval_centers_batch(pts, vertices, 0.0)
    for i in range(vertices.shape[0]):
        if vals[i] > best_val:
            best_val = float(vals[i])
            best_center = vertices[i]
            best_r = float(rads[i])

    axes = _grid_axes(curve, resolution)
    root = tuple((0, ax.size - 1) for ax in axes)
    # best-first over cells, batching bound evaluations; entries are
    # (cached bound, tiebreak counter, box) and a cell is re-checked against
    # the current best when popped, so stale entries die cheaply
    pending: list[tuple[float, int, tuple]] = [(np.inf, 0, root)]
    counter = 1
    round_size = 1024
    while pending:
        pending.sort(key=lambda e: (-e[0], e[1]))
        take = pending[:round_size]
        pending = pending[round_size:]
        expand = [box for bound, _, box in take if bound > best_val]
        if not expand:
            continue
        children: list[tuple] = []
        leaves: list[tuple] = []
        for box in expand:
            split = int(np.argmax([axes[k][b] - axes[k][a] for k, (a, b) in enumerate(box)]))
            a, b = box[split]
            m = (a + b) // 2
            for lo_i, hi_i in ((a, m), (m + 1, b)):
                child = tuple((lo_i, hi_i) if k == split else span for k, span in enumerate(box))
                npts = int(np.prod([bb - aa + 1 for aa, bb in child]))
                if npts <= _LEAF_BATCH:
                    leaves.append(child)
                else:
                    children.append(child)
        if leaves:
            blocks = []
            for box in leaves:
                coords = [axes[k][a : b + 1] for k, (a, b) in enumerate(box)]
                blocks.append(np.array(list(itertools.product(*coords))))
            centers = np.vstack(blocks)
            vals, rads = _kernels.eval_centers_batch(pts, centers, 0.0)
            for i in range(centers.shape[0]):
                if vals[i] > best_val:
                    best_val = float(vals[i])
                    best_center = centers[i]
                    best_r = float(rads[i])
        if children:
            mids = np.empty((len(children), curve.dim))
            halves = np.empty(len(children))
            for idx, box in enumerate(children):
                for k, (a, b) in enumerate(box):
                    mids[idx, k] = 0.5 * (axes[k][a] + axes[k][b])
                halves[idx] = max(0.5 * (axes[k][b] - axes[k][a]) for k, (a, b) in enumerate(box))
            bounds = _kernels.eval_bounds_batch(pts, mids, halves)
            for idx, box in enumerate(children):
                if bounds[idx] > best_val:
                    pending.append((float(bounds[idx]), counter, box))
                    counter += 1

    witness = Cube(best_center, best_r)
    return OracleBound(lower=cube_packedness(curve, witness), witness=witness, method="grid")


def grid_lower_bound_exhaustive(curve: Curve, resolution: int) -> OracleBound:
    """Reference implementation of the grid bound without pruning.

    Kept for validating that pruning never changes the returned value; do not
    use on large grids.
    """
    if resolution < 2:
        raise ValueError("resolution must be >= 2")
    from . import _kernels

    pts = curve.points
    vertices = np.unique(pts, axis=0)
    axes = _grid_axes(curve, resolution)
    grid = np.array(list(itertools.product(*axes)))
    centers = np.vstack([vertices, grid])
    vals, rads = _kernels.eval_centers_batch(pts, centers, 0.0)
    best = 0
    for i in range(1, centers.shape[0]):
        if vals[i] > vals[best]:
            best = i
    witness = Cube(centers[best], float(rads[best]))
    return OracleBound(lower=cube_packedness(curve, witness), witness=witness, method="grid")
