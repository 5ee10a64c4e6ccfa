"""Slow, obviously-correct reference implementations used as test oracles."""
from __future__ import annotations

import itertools

import numpy as np


def naive_count(s: str, x: str) -> int:
    if not x:
        return len(s)
    return sum(1 for i in range(len(s) - len(x) + 1) if s[i:i + len(x)] == x)


def naive_cross_count(a: str, b: str, x: str, sigma: str) -> int:
    # x ends at k in a, b[k + 1] == sigma
    if not x:
        return b.count(sigma)
    m = len(x)
    return sum(1 for k in range(m - 1, len(a) - 1) if a[k - m + 1:k + 1] == x and b[k + 1] == sigma)


def eig_stationary(m: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eig(m.T)
    i = int(np.argmin(np.abs(w - 1)))
    p = np.real(v[:, i])
    return p / p.sum()


def naive_entropy(p) -> float:
    return -sum(v * np.log2(v) for v in p if v > 0)


def in_triangle(p, a, b, c, tol=1e-12) -> bool:
    def cross(o, u, v):
        return (u[0] - o[0]) * (v[1] - o[1]) - (u[1] - o[1]) * (v[0] - o[0])
    if abs(cross(a, b, c)) <= tol:
        return False  # degenerate; covered by the segment test
    d1, d2, d3 = cross(a, b, p), cross(b, c, p), cross(c, a, p)
    neg = d1 < -tol or d2 < -tol or d3 < -tol
    pos = d1 > tol or d2 > tol or d3 > tol
    return not (neg and pos)


def on_segment(p, a, b, tol=1e-12) -> bool:
    cr = (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0])
    if abs(cr) > tol:
        return False
    return (min(a[0], b[0]) - tol <= p[0] <= max(a[0], b[0]) + tol
            and min(a[1], b[1]) - tol <= p[1] <= max(a[1], b[1]) + tol)


def brute_hull_vertices(points) -> set:
    """Indices of distinct points not inside any triangle/segment of the others."""
    pts = {}
    for i, p in enumerate(points):
        pts.setdefault(tuple(p), i)
    items = list(pts.items())
    out = set()
    for p, i in items:
        others = [q for q, _ in items if q != p]
        if len(others) == 0:
            out.add(i)
            continue
        inside = any(on_segment(p, a, b) for a, b in itertools.combinations(others, 2))
        inside = inside or any(in_triangle(p, a, b, c)
                               for a, b, c in itertools.combinations(others, 3))
        if not inside:
            out.add(i)
    return out


def brute_distance(g1, g2, depth: int) -> float:
    """Enumerate every string and propagate both machines from stationarity."""
    from crosstalk.automata import propagate_distribution
    from crosstalk.errors import ZeroProbabilityHistoryError
    p1, p2 = eig_stationary_pfsa(g1), eig_stationary_pfsa(g2)
    best = 0.0
    for m in range(depth + 1):
        for x in itertools.product(range(g1.alphabet.size), repeat=m):
            try:
                v1 = propagate_distribution(g1, p1, x)
                v2 = propagate_distribution(g2, p2, x)
            except ZeroProbabilityHistoryError:
                continue
            best = max(best, float(np.max(np.abs(v1 @ g1.morph - v2 @ g2.morph))))
    return min(best, 1.0)


def eig_stationary_pfsa(g):
    from crosstalk.automata import transition_matrix
    return eig_stationary(transition_matrix(g))
