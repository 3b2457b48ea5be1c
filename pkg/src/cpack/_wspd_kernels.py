"""Compiled well-separated pair traversal (count and fill passes).

Mirrors the recursion in `wspd.wspd_pairs`: a candidate (u, v) is emitted
when the circumscribed balls pass the separation test, otherwise the node
with the longer box side is split.  Kept free of subset materialization so
quadratic-size decompositions (tiny point sets under huge separation) stay
cheap to enumerate.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def _ball(box_lo, box_hi, node, d):
    r2 = 0.0
    for k in range(d):
        e = box_hi[node, k] - box_lo[node, k]
        r2 += e * e
    return 0.5 * np.sqrt(r2)


@njit(cache=True)
def _separated(box_lo, box_hi, u, v, s, d):
    ru = _ball(box_lo, box_hi, u, d)
    rv = _ball(box_lo, box_hi, v, d)
    r = ru if ru > rv else rv
    dist2 = 0.0
    for k in range(d):
        e = 0.5 * (box_lo[u, k] + box_hi[u, k]) - 0.5 * (box_lo[v, k] + box_hi[v, k])
        dist2 += e * e
    return np.sqrt(dist2) >= (s + 2.0) * r


@njit(cache=True)
def _longest(box_lo, box_hi, node, d):
    best = 0.0
    for k in range(d):
        e = box_hi[node, k] - box_lo[node, k]
        if e > best:
            best = e
    return best


@njit(cache=True)
def count_pairs(left, right, box_lo, box_hi, n_nodes, s):
    d = box_lo.shape[1]
    cap = 4 * n_nodes + 16
    su = np.empty(cap, np.int64)
    sv = np.empty(cap, np.int64)
    total = 0
    for node in range(n_nodes):
        if left[node] < 0:
            continue
        top = 0
        su[top] = left[node]
        sv[top] = right[node]
        top += 1
        while top > 0:
            top -= 1
            u = su[top]
            v = sv[top]
            if _separated(box_lo, box_hi, u, v, s, d):
                total += 1
                continue
            u_leaf = left[u] < 0
            v_leaf = left[v] < 0
            split_u = (not u_leaf) and (v_leaf or _longest(box_lo, box_hi, u, d) >= _longest(box_lo, box_hi, v, d))
            if top + 2 > cap:
                # grow stacks
                new_cap = cap * 2
                su2 = np.empty(new_cap, np.int64)
                sv2 = np.empty(new_cap, np.int64)
                su2[:top] = su[:top]
                sv2[:top] = sv[:top]
                su = su2
                sv = sv2
                cap = new_cap
            if split_u:
                su[top] = right[u]
                sv[top] = v
                top += 1
                su[top] = left[u]
                sv[top] = v
                top += 1
            else:
                su[top] = u
                sv[top] = right[v]
                top += 1
                su[top] = u
                sv[top] = left[v]
                top += 1
    return total


@njit(cache=True)
def fill_pairs(left, right, box_lo, box_hi, min_index, n_nodes, s, out_a, out_b):
    d = box_lo.shape[1]
    cap = 4 * n_nodes + 16
    su = np.empty(cap, np.int64)
    sv = np.empty(cap, np.int64)
    pos = 0
    for node in range(n_nodes):
        if left[node] < 0:
            continue
        top = 0
        su[top] = left[node]
        sv[top] = right[node]
        top += 1
        while top > 0:
            top -= 1
            u = su[top]
            v = sv[top]
            if _separated(box_lo, box_hi, u, v, s, d):
                out_a[pos] = min_index[u]
                out_b[pos] = min_index[v]
                pos += 1
                continue
            u_leaf = left[u] < 0
            v_leaf = left[v] < 0
            split_u = (not u_leaf) and (v_leaf or _longest(box_lo, box_hi, u, d) >= _longest(box_lo, box_hi, v, d))
            if top + 2 > cap:
                new_cap = cap * 2
                su2 = np.empty(new_cap, np.int64)
                sv2 = np.empty(new_cap, np.int64)
                su2[:top] = su[:top]
                sv2[:top] = sv[:top]
                su = su2
                sv = sv2
                cap = new_cap
            if split_u:
                su[top] = right[u]
                sv[top] = v
                top += 1
                su[top] = left[u]
                sv[top] = v
                top += 1
            else:
                su[top] = u
                sv[top] = right[v]
                top += 1
                su[top] = u
                sv[top] = left[v]
                top += 1
    return pos
