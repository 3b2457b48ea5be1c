"""Exact geometric primitives: polygonal curves, axis-aligned cubes, clip lengths.

A "cube" here is an axis-aligned d-cube given by its center and its radius,
where the radius is half the side length.  All cubes are closed regions: a
segment lying exactly on a face contributes its full length.  The two
functionals of interest are the total curve length inside a cube and the
packedness value (length inside divided by the cube radius).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Absolute tolerance for coordinate equality (duplicate collapsing etc.).
COORD_TOL = 1e-12


class DimensionMismatchError(ValueError):
    """Raised when two geometric objects live in different dimensions."""


def as_point(p) -> np.ndarray:
    """Validate and convert a point-like to a 1-D float64 array."""
    arr = np.asarray(p, dtype=np.float64)
    if arr.ndim != 1 or arr.size < 1:
        raise ValueError(f"a point must be a 1-D sequence of >= 1 coordinates, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("point coordinates must be finite")
    return arr


@dataclass(frozen=True, eq=False)
class Segment:
    """A nondegenerate line segment between two points of equal dimension."""

    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        a = as_point(self.a)
        b = as_point(self.b)
        if a.shape != b.shape:
            raise DimensionMismatchError("segment endpoints have different dimensions")
        if np.max(np.abs(a - b)) <= COORD_TOL:
            raise ValueError("degenerate segment: endpoints coincide")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def dim(self) -> int:
        return self.a.size

    @property
    def length(self) -> float:
        return float(np.linalg.norm(self.b - self.a))


@dataclass(frozen=True, eq=False)
class Cube:
    """Closed axis-aligned d-cube: all x with |x_k - center_k| <= radius."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        c = as_point(self.center)
        r = float(self.radius)
        if not np.isfinite(r) or r <= 0.0:
            raise ValueError(f"cube radius must be positive and finite, got {r}")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "radius", r)

    @property
    def dim(self) -> int:
        return self.center.size

    @property
    def lo(self) -> np.ndarray:
        return self.center - self.radius

    @property
    def hi(self) -> np.ndarray:
        return self.center + self.radius

    def contains(self, p) -> bool:
        p = as_point(p)
        return bool(np.all(np.abs(p - self.center) <= self.radius))


class Curve:
    """An ordered polyline with >= 2 distinct vertices, all of one dimension.

    Construction normalizes the input: consecutive points equal within
    COORD_TOL are collapsed, and a curve with fewer than two distinct points
    is rejected.
    """

    __slots__ = ("points", "dim")

    def __init__(self, points):
        arr = np.asarray(points, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] < 2 or arr.shape[1] < 1:
            raise ValueError(f"a curve needs a (n>=2, d>=1) array of vertices, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("curve coordinates must be finite")
        keep = np.empty(arr.shape[0], dtype=bool)
        keep[0] = True
        keep[1:] = np.max(np.abs(np.diff(arr, axis=0)), axis=1) > COORD_TOL
        arr = arr[keep]
        if arr.shape[0] < 2:
            raise ValueError("degenerate curve: fewer than 2 distinct points")
        arr = np.ascontiguousarray(arr)
        arr.setflags(write=False)
        self.points = arr
        self.dim = arr.shape[1]

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def n_segments(self) -> int:
        return self.points.shape[0] - 1

    def segment(self, i: int) -> Segment:
        return Segment(self.points[i], self.points[i + 1])

    def segment_arrays(self):
        """Endpoint arrays (starts, ends), each of shape (n-1, d)."""
        return self.points[:-1], self.points[1:]

    @property
    def total_length(self) -> float:
        return float(np.sum(np.linalg.norm(np.diff(self.points, axis=0), axis=1)))

    def translated(self, t) -> "Curve":
        return Curve(self.points + as_point(t))

    def scaled(self, factor: float) -> "Curve":
        if factor <= 0:
            raise ValueError("scale factor must be positive")
        return Curve(self.points * float(factor))

    def __repr__(self):
        return f"Curve(n={self.n}, dim={self.dim})"


def _clip_fractions(starts: np.ndarray, ends: np.ndarray, center: np.ndarray, radius: float) -> np.ndarray:
    """Fraction of each segment [start, end] inside the closed cube.

    Parametric clipping against the 2d half-spaces |x_k - c_k| <= r.
    Axes with zero direction either keep the full range (coordinate inside,
    boundary included) or empty it.
    """
    u = starts - center
    v = ends - starts
    with np.errstate(divide="ignore", invalid="ignore"):
        t_enter = (-radius - u) / v
        t_exit = (radius - u) / v
    lo = np.minimum(t_enter, t_exit)
    hi = np.maximum(t_enter, t_exit)
    flat = v == 0.0
    if np.any(flat):
        inside = np.abs(u) <= radius
        lo = np.where(flat, np.where(inside, -np.inf, np.inf), lo)
        hi = np.where(flat, np.where(inside, np.inf, -np.inf), hi)
    t_lo = np.maximum(np.max(lo, axis=-1), 0.0)
    t_hi = np.minimum(np.min(hi, axis=-1), 1.0)
    return np.clip(t_hi - t_lo, 0.0, None)


def clip_length(seg: Segment, cube: Cube) -> float:
    """Euclidean length of the part of `seg` inside the closed cube."""
    if seg.dim != cube.dim:
        raise DimensionMismatchError(f"segment is {seg.dim}-D but cube is {cube.dim}-D")
    frac = _clip_fractions(seg.a[None, :], seg.b[None, :], cube.center, cube.radius)
    return float(frac[0] * seg.length)


def length_in_cube(curve: Curve, cube: Cube) -> float:
    """Total length of the curve inside the closed cube (sum over segments)."""
    if curve.dim != cube.dim:
        raise DimensionMismatchError(f"curve is {curve.dim}-D but cube is {cube.dim}-D")
    starts, ends = curve.segment_arrays()
    frac = _clip_fractions(starts, ends, cube.center, cube.radius)
    seg_len = np.linalg.norm(ends - starts, axis=1)
    return float(np.dot(frac, seg_len))


def packedness(curve: Curve, cube: Cube) -> float:
    """Packedness value of the cube: curve length inside divided by radius.

    The curve's packedness constant c is the supremum of this value over all
    cubes; the approximation algorithms in this package bound that supremum.
    """
    return length_in_cube(curve, cube) / cube.radius
