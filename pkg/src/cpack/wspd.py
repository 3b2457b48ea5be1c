"""Fair split tree, well-separated pair decomposition, candidate squares.

The planar (6+eps)-approximation only needs to examine squares centered at
curve vertices whose boundary passes near another vertex.  A well-separated
pair decomposition of the vertex set with separation 720/eps compresses all
vertex pairs into groups that agree on such a square up to the allowed error;
two candidate squares per group suffice.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import COORD_TOL, Cube, Curve


class SplitTree:
    """Fair split tree: recursive midpoint splits of the longest box side.

    Nodes are stored in arrays; node i owns the point subset
    ``perm[start[i]:end[i]]`` (indices into the input points), its bounding
    box, and the circumscribed ball of that box.  Leaves hold exactly one
    point.  Structure is deterministic given the input order.
    """

    def __init__(self, points: np.ndarray):
        pts = np.asarray(points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[0] < 1:
            raise ValueError("need a nonempty (n, d) array of points")
        if not np.all(np.isfinite(pts)):
            raise ValueError("point coordinates must be finite")
        if np.unique(pts, axis=0).shape[0] != pts.shape[0]:
            raise ValueError("duplicate points: deduplicate before building the tree")
        self.points = pts
        n, d = pts.shape
        self.perm = np.arange(n)
        max_nodes = 2 * n - 1
        self.start = np.empty(max_nodes, dtype=np.int64)
        self.end = np.empty(max_nodes, dtype=np.int64)
        self.left = np.full(max_nodes, -1, dtype=np.int64)
        self.right = np.full(max_nodes, -1, dtype=np.int64)
        self.box_lo = np.empty((max_nodes, d))
        self.box_hi = np.empty((max_nodes, d))
        self.min_index = np.empty(max_nodes, dtype=np.int64)

        count = 0
        stack = [(0, n, -1, False)]  # (lo, hi, parent, is_right_child)
        while stack:
            lo, hi, parent, is_right = stack.pop()
            node = count
            count += 1
            if parent >= 0:
                if is_right:
                    self.right[parent] = node
                else:
                    self.left[parent] = node
            idx = self.perm[lo:hi]
            sub = pts[idx]
            self.start[node] = lo
            self.end[node] = hi
            self.box_lo[node] = sub.min(axis=0)
            self.box_hi[node] = sub.max(axis=0)
            self.min_index[node] = idx.min()
            if hi - lo == 1:
                continue
            ext = self.box_hi[node] - self.box_lo[node]
            axis = int(np.argmax(ext))
            mid = 0.5 * (self.box_lo[node][axis] + self.box_hi[node][axis])
            coords = sub[:, axis]
            go_left = coords <= mid
            nl = int(np.count_nonzero(go_left))
            if nl == 0 or nl == hi - lo:
                # midpoint degenerated in floats: split at the median instead
                order = np.argsort(coords, kind="stable")
                nl = (hi - lo) // 2
                self.perm[lo:hi] = idx[order]
            else:
                self.perm[lo:hi] = np.concatenate([idx[go_left], idx[~go_left]])
            # push right first so the left child is numbered next (pre-order)
            stack.append((lo + nl, hi, node, True))
            stack.append((lo, lo + nl, node, False))
        self.n_nodes = count

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def is_leaf(self, node: int) -> bool:
        return self.left[node] < 0

    def subset_indices(self, node: int) -> np.ndarray:
        return self.perm[self.start[node] : self.end[node]]

    def ball(self, node: int) -> tuple[np.ndarray, float]:
        """Center and radius of the ball circumscribing the node's box."""
        lo = self.box_lo[node]
        hi = self.box_hi[node]
        return 0.5 * (lo + hi), 0.5 * float(np.linalg.norm(hi - lo))

    def longest_side(self, node: int) -> float:
        return float(np.max(self.box_hi[node] - self.box_lo[node]))


def build_split_tree(points) -> SplitTree:
    """Build a fair split tree over distinct points (>= 1, same dimension)."""
    return SplitTree(points)


@dataclass(frozen=True)
class WspdPair:
    """One well-separated pair with its separation certificate.

    `a` and `b` are the point-index subsets; the certificate consists of two
    equal-radius balls enclosing the subsets' bounding boxes and the distance
    between their centers.
    """

    a: np.ndarray
    b: np.ndarray
    ball_center_a: np.ndarray
    ball_center_b: np.ndarray
    ball_radius: float
    center_distance: float

    def separation_ok(self, s: float) -> bool:
        """Check dist(ball_a, ball_b) >= s * radius from the certificate."""
        return self.center_distance - 2.0 * self.ball_radius >= s * self.ball_radius


def _well_separated(tree: SplitTree, u: int, v: int, s: float):
    cu, ru = tree.ball(u)
    cv, rv = tree.ball(v)
    r = max(ru, rv)
    dist = float(np.linalg.norm(cu - cv))
    return dist >= (s + 2.0) * r, cu, cv, r, dist


def wspd_pairs(tree: SplitTree, s: float) -> list[WspdPair]:
    """All well-separated pairs of the decomposition for separation s.

    Every unordered pair of distinct input points is covered by exactly one
    returned pair.  The node with the longer box side is split when a pair is
    not yet separated.
    """
    if s <= 0:
        raise ValueError("separation must be positive")
    pairs: list[WspdPair] = []

    def rec(u: int, v: int) -> None:
        ok, cu, cv, r, dist = _well_separated(tree, u, v, s)
        if ok:
            pairs.append(
                WspdPair(
                    a=np.sort(tree.subset_indices(u)),
                    b=np.sort(tree.subset_indices(v)),
                    ball_center_a=cu,
                    ball_center_b=cv,
                    ball_radius=r,
                    center_distance=dist,
                )
            )
            return
        split_u = not tree.is_leaf(u) and (tree.is_leaf(v) or tree.longest_side(u) >= tree.longest_side(v))
        if split_u:
            rec(int(tree.left[u]), v)
            rec(int(tree.right[u]), v)
        else:
            rec(u, int(tree.left[v]))
            rec(u, int(tree.right[v]))

    for node in range(tree.n_nodes):
        if not tree.is_leaf(node):
            rec(int(tree.left[node]), int(tree.right[node]))
    return pairs


def _rep_pairs(tree: SplitTree, s: float) -> tuple[np.ndarray, np.ndarray]:
    """Representative indices (min original index per side) of every pair.

    Compiled two-pass traversal; mirrors `wspd_pairs` exactly but never
    materializes the subsets, so it scales to millions of pairs.
    """
    from ._wspd_kernels import count_pairs, fill_pairs

    n_pairs = count_pairs(
        tree.left, tree.right, tree.box_lo, tree.box_hi, tree.n_nodes, float(s)
    )
    ia = np.empty(n_pairs, dtype=np.int64)
    ib = np.empty(n_pairs, dtype=np.int64)
    fill_pairs(
        tree.left, tree.right, tree.box_lo, tree.box_hi, tree.min_index, tree.n_nodes, float(s), ia, ib
    )
    return ia, ib


def wspd_pair_count(points, s: float) -> int:
    """Number of pairs in the decomposition (no materialization)."""
    tree = build_split_tree(points)
    from ._wspd_kernels import count_pairs

    return int(count_pairs(tree.left, tree.right, tree.box_lo, tree.box_hi, tree.n_nodes, float(s)))


class CandidateSquareSet:
    """Candidate squares that provably include a near-optimal one.

    Two squares per well-separated pair (centered at each representative,
    radius max coordinate difference plus eps/120 times the representative
    distance), deduplicated by center and radius within 1e-12.
    """

    def __init__(self, centers, radii, pair_index, rep_a, rep_b, eps, n_pairs, n_before_dedup):
        self.centers = centers
        self.radii = radii
        self.pair_index = pair_index
        self.rep_a = rep_a
        self.rep_b = rep_b
        self.eps = eps
        self.n_pairs = n_pairs
        self.n_before_dedup = n_before_dedup

    def __len__(self) -> int:
        return self.radii.size

    def cube(self, i: int) -> Cube:
        return Cube(self.centers[i], float(self.radii[i]))

    def __iter__(self):
        return (self.cube(i) for i in range(len(self)))


def candidate_squares(curve: Curve, eps: float) -> CandidateSquareSet:
    """The candidate square set for a 2-D curve at accuracy eps in (0, 1].

    Builds the decomposition over the curve's distinct vertices with
    separation 720/eps; representatives are the lowest original vertex index
    on each side.  Some returned square is within a factor 6 + eps/8 of the
    best square overall.
    """
    if curve.dim != 2:
        raise ValueError("candidate squares are defined for 2-D curves only")
    eps = float(eps)
    if not (0.0 < eps <= 1.0):
        raise ValueError("eps must lie in (0, 1]")
    pts = curve.points
    _, first_idx = np.unique(pts, axis=0, return_index=True)
    first_idx = np.sort(first_idx)
    verts = pts[first_idx]  # distinct vertices in first-occurrence order

    tree = build_split_tree(verts)
    s = 720.0 / eps
    ia, ib = _rep_pairs(tree, s)
    n_pairs = ia.size

    a = verts[ia]
    b = verts[ib]
    diff = np.abs(a - b)
    r = np.maximum(diff[:, 0], diff[:, 1]) + (eps / 120.0) * np.linalg.norm(a - b, axis=1)
    centers = np.concatenate([a, b], axis=0)
    radii = np.concatenate([r, r])
    pair_index = np.concatenate([np.arange(n_pairs)] * 2)
    rep_a = first_idx[np.concatenate([ia, ia])]
    rep_b = first_idx[np.concatenate([ib, ib])]

    # deduplicate by (center, radius) within 1e-12, keeping first occurrences
    key = np.column_stack([centers, radii])
    order = np.lexsort((key[:, 2], key[:, 1], key[:, 0]))
    sorted_key = key[order]
    dup_follow = np.zeros(key.shape[0], dtype=bool)
    if key.shape[0] > 1:
        close = np.all(np.abs(np.diff(sorted_key, axis=0)) <= COORD_TOL, axis=1)
        dup_follow[order[1:]] = close
    keep = ~dup_follow
    return CandidateSquareSet(
        centers=centers[keep],
        radii=radii[keep],
        pair_index=pair_index[keep],
        rep_a=rep_a[keep],
        rep_b=rep_b[keep],
        eps=eps,
        n_pairs=n_pairs,
        n_before_dedup=key.shape[0],
    )
