"""Approximate c-packedness of polygonal curves.

A curve is c-packed when its length inside any axis-aligned cube of radius r
(half the side length) is at most c*r.  This package estimates the smallest
such c for a given polygonal curve:

* :func:`approx2` — 2-approximation in any dimension via radial sweeps
  centered at curve vertices.
* :func:`approx6` — (6+eps)-approximation in the plane via well-separated
  pair candidate squares queried against a multi-level segment tree.
* :mod:`cpack.oracle` — brute-force reference bounds used to validate both.
"""

from .geometry import (
    COORD_TOL,
    Cube,
    Curve,
    DimensionMismatchError,
    Segment,
    as_point,
    clip_length,
    length_in_cube,
    packedness,
)
from .sweep import (
    PackednessResult,
    RadialEvent,
    SweepProfile,
    approx2,
    best_radius_at_center,
    radial_events,
    sweep_profile,
)

__version__ = "0.1.0"
