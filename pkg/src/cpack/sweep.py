"""Fixed-center radial sweeps and the vertex-centered 2-approximation.

Growing an axis-aligned cube around a fixed center p, the packedness value
psi_p(r) = (curve length inside the cube of radius r) / r is piecewise
hyperbolic in r: between two consecutive event radii it has the form
a*(1/r) + b.  Events are the radii where a curve vertex lands on a cube face
or where the face clipping a segment changes.  The maximum of psi_p over all
r > 0 is therefore attained at an event radius, which the sweep exploits:
it maintains the linear coefficients of the inside-length function
incrementally across sorted events instead of re-clipping the curve at every
radius.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import Cube, Curve, DimensionMismatchError, as_point, packedness

VERTEX_EVENT = "vertex-on-face"
EDGE_EVENT = "edge-on-lower-face"


@dataclass(frozen=True)
class RadialEvent:
    """A radius at which the cube/curve intersection combinatorics change.

    For vertex events `index` is the curve vertex landing on a face; for edge
    events it is the segment whose clipped portion gains or switches a face.
    """

    radius: float
    kind: str
    index: int


@dataclass(frozen=True)
class PackednessResult:
    """An approximate packedness value with its witness cube and guarantee."""

    value: float
    witness: Cube
    factor: float
    algorithm: str


@dataclass
class SweepProfile:
    """The full piecewise description of psi_p(r) at one center.

    `radii` are the distinct positive event radii in increasing order and
    `psi_values[i]` equals psi_p(radii[i]).  `intervals[i] = (slope,
    intercept)` gives the inside-length function L(r) = slope*r + intercept
    valid on [radii[i], radii[i+1]]; the last entry covers [radii[-1], inf).
    """

    center: np.ndarray
    events: list[RadialEvent]
    radii: np.ndarray
    psi_values: np.ndarray
    upsilon_values: np.ndarray
    intervals: list[tuple[float, float]] = field(default_factory=list)

    def psi_on_interval(self, i: int, r: float) -> float:
        slope, intercept = self.intervals[i]
        return slope + intercept / r


def _linear_pieces(u: np.ndarray, v: np.ndarray):
    """Maximal intervals of [0,1] where f(t) = ||u + t v||_inf is one linear form.

    Returns a list of (ta, tb, m, c) with f(t) = m*t + c on [ta, tb].  Cut
    candidates are the per-coordinate sign changes and the pairwise
    coordinate ties |y_k| = |y_j|; equal adjacent forms are merged back.
    """
    d = u.size
    cands = [0.0, 1.0]
    for k in range(d):
        if v[k] != 0.0:
            t = -u[k] / v[k]
            if 0.0 < t < 1.0:
                cands.append(t)
    for k in range(d):
        for j in range(k + 1, d):
            dv = v[k] - v[j]
            if dv != 0.0:
                t = (u[j] - u[k]) / dv
                if 0.0 < t < 1.0:
                    cands.append(t)
            sv = v[k] + v[j]
            if sv != 0.0:
                t = -(u[k] + u[j]) / sv
                if 0.0 < t < 1.0:
                    cands.append(t)
    cands.sort()
    pieces: list[tuple[float, float, float, float]] = []
    for ta, tb in zip(cands[:-1], cands[1:]):
        if tb <= ta:
            continue
        tm = 0.5 * (ta + tb)
        y = u + tm * v
        k = int(np.argmax(np.abs(y)))
        sign = 1.0 if y[k] >= 0.0 else -1.0
        m = sign * v[k]
        c = sign * u[k]
        if pieces and pieces[-1][2] == m and pieces[-1][3] == c:
            prev = pieces[-1]
            pieces[-1] = (prev[0], tb, m, c)
        else:
            pieces.append((ta, tb, m, c))
    return pieces


def _ramp_events(curve: Curve, center: np.ndarray):
    """Sweep events (radius, d_slope, d_intercept) of the inside-length function.

    Each linear piece of a segment's Chebyshev-distance profile contributes a
    ramp: zero until the piece's smaller end radius, then linear in r, then
    constant.  Flat pieces (segment portion equidistant from the center)
    contribute a jump, consistent with cubes being closed regions.
    """
    pts = curve.points
    radii: list[float] = []
    d_slope: list[float] = []
    d_icept: list[float] = []
    for i in range(curve.n_segments):
        u = pts[i] - center
        v = pts[i + 1] - pts[i]
        seg_len = float(np.linalg.norm(v))
        # radii that are pure cancellation dust stand for an exact 0 (the
        # center lies on the segment); keeping them would put 1/r noise into
        # the profile
        snap = 1e-13 * max(np.max(np.abs(u)), np.max(np.abs(u + v)))
        for ta, tb, m, c in _linear_pieces(u, v):
            fa = m * ta + c
            fb = m * tb + c
            if abs(fa) <= snap:
                fa = 0.0
            if abs(fb) <= snap:
                fb = 0.0
            content = (tb - ta) * seg_len
            if fa == fb:
                radii.append(fa)
                d_slope.append(0.0)
                d_icept.append(content)
            else:
                r_lo, r_hi = (fa, fb) if fa < fb else (fb, fa)
                rate = content / (r_hi - r_lo)
                radii.append(r_lo)
                d_slope.append(rate)
                d_icept.append(-r_lo * rate)
                radii.append(r_hi)
                d_slope.append(-rate)
                d_icept.append(r_hi * rate)
    return np.array(radii), np.array(d_slope), np.array(d_icept)


def radial_events(curve: Curve, center) -> list[RadialEvent]:
    """All event radii of the growing cube at `center`, sorted ascending.

    Vertex events occur at the Chebyshev distance from the center to each
    curve vertex; edge events at the radii where a segment's clipped portion
    first appears at an interior point or switches dominating face.  Events
    at radius 0 (the center coincides with a vertex) are suppressed.
    """
    center = as_point(center)
    if center.size != curve.dim:
        raise DimensionMismatchError(f"center is {center.size}-D but curve is {curve.dim}-D")
    pts = curve.points
    events: dict[tuple[float, str, int], RadialEvent] = {}
    vertex_r = np.max(np.abs(pts - center), axis=1)
    for vi, r in enumerate(vertex_r):
        r = float(r)
        if r > 0.0:
            key = (r, VERTEX_EVENT, vi)
            events[key] = RadialEvent(r, VERTEX_EVENT, vi)
    for i in range(curve.n_segments):
        u = pts[i] - center
        v = pts[i + 1] - pts[i]
        snap = 1e-13 * max(np.max(np.abs(u)), np.max(np.abs(u + v)))
        pieces = _linear_pieces(u, v)
        # every flat piece (jump) borders either a kink or a segment endpoint,
        # so kinks plus vertex radii cover all breakpoints
        for _, tb, m, c in pieces[:-1]:
            r = m * tb + c
            if r > snap:
                key = (float(r), EDGE_EVENT, i)
                events[key] = RadialEvent(float(r), EDGE_EVENT, i)
    out = sorted(events.values(), key=lambda e: (e.radius, e.kind, e.index))
    return out


def sweep_profile(curve: Curve, center) -> SweepProfile:
    """Evaluate psi_p at every event radius by one incremental pass.

    The inside-length function L(r) is maintained as slope*r + intercept;
    deltas of both coefficients are accumulated at each event radius, so the
    whole profile costs one sort plus linear work instead of re-clipping the
    curve per radius.
    """
    center = as_point(center)
    if center.size != curve.dim:
        raise DimensionMismatchError(f"center is {center.size}-D but curve is {curve.dim}-D")
    radii, d_slope, d_icept = _ramp_events(curve, center)
    order = np.argsort(radii, kind="stable")
    radii = radii[order]
    cum_slope = np.cumsum(d_slope[order])
    cum_icept = np.cumsum(d_icept[order])
    # evaluate after the last event at each distinct radius
    last_of_run = np.ones(radii.size, dtype=bool)
    last_of_run[:-1] = radii[1:] != radii[:-1]
    r_distinct = radii[last_of_run]
    slope_at = cum_slope[last_of_run]
    icept_at = cum_icept[last_of_run]
    positive = r_distinct > 0.0
    r_distinct = r_distinct[positive]
    slope_at = slope_at[positive]
    icept_at = icept_at[positive]
    upsilon = slope_at * r_distinct + icept_at
    psi = slope_at + icept_at / r_distinct
    intervals = [(float(s), float(b)) for s, b in zip(slope_at, icept_at)]
    return SweepProfile(
        center=center,
        events=radial_events(curve, center),
        radii=r_distinct,
        psi_values=psi,
        upsilon_values=upsilon,
        intervals=intervals,
    )


def best_radius_at_center(curve: Curve, center) -> tuple[float, float]:
    """Radius and value maximizing psi_p over all r > 0 at a fixed center.

    The maximum over each inter-event interval sits at one of its ends, so
    only event radii are evaluated.  Ties break to the smallest radius.
    """
    center = as_point(center)
    if center.size != curve.dim:
        raise DimensionMismatchError(f"center is {center.size}-D but curve is {curve.dim}-D")
    from . import _kernels

    val, r, _ = _kernels.eval_center(curve.points, center, 0.0)
    return float(r), float(val)


def _unique_rows_keep_order(arr: np.ndarray) -> np.ndarray:
    _, idx = np.unique(arr, axis=0, return_index=True)
    return arr[np.sort(idx)]


def approx2(curve: Curve) -> PackednessResult:
    """2-approximate packedness: best cube among those centered at vertices.

    Some cube centered at a curve vertex achieves at least half the optimal
    packedness value, so the returned value V satisfies V <= c <= 2*V for the
    true packedness c.  The reported value is achieved by the witness cube.
    Runs one radial sweep per distinct vertex.
    """
    from . import _kernels

    centers = _unique_rows_keep_order(curve.points)
    vals, rads = _kernels.eval_centers_batch(curve.points, centers, 0.0)
    best = int(np.argmax(vals))
    witness = Cube(centers[best], float(rads[best]))
    return PackednessResult(
        value=float(vals[best]),
        witness=witness,
        factor=2.0,
        algorithm="approx2",
    )


def check_profile_consistency(curve: Curve, profile: SweepProfile, rel_tol: float = 1e-9) -> bool:
    """Verify the incrementally maintained psi values against direct clipping."""
    for r, claimed in zip(profile.radii, profile.psi_values):
        direct = packedness(curve, Cube(profile.center, float(r)))
        if abs(direct - claimed) > rel_tol * max(abs(direct), abs(claimed), 1.0):
            return False
    return True
