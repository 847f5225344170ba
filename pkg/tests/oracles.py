"""Slow, obviously-correct reference implementations used by the tests."""
import itertools
import math

import numpy as np


def mec_brute(points):
    """Smallest circle through 2 or 3 of the points that covers them all: O(n^4)."""
    pts = [tuple(map(float, p)) for p in points]
    if len(set(pts)) == 1:
        return pts[0], 0.0
    best = None

    def covers(c, r):
        return all(math.hypot(x - c[0], y - c[1]) <= r * (1 + 1e-12) + 1e-9 for x, y in pts)

    for a, b in itertools.combinations(pts, 2):
        c = ((a[0] + b[0]) / 2, (a[1] + b[1]) / 2)
        r = math.hypot(a[0] - b[0], a[1] - b[1]) / 2
        if (best is None or r < best[1]) and covers(c, r):
            best = (c, r)
    for a, b, cc in itertools.combinations(pts, 3):
        ax, ay = a
        bx, by = b[0] - ax, b[1] - ay
        cx, cy = cc[0] - ax, cc[1] - ay
        d = 2 * (bx * cy - by * cx)
        if abs(d) < 1e-12:
            continue
        ux = (cy * (bx * bx + by * by) - by * (cx * cx + cy * cy)) / d
        uy = (bx * (cx * cx + cy * cy) - cx * (bx * bx + by * by)) / d
        c = (ux + ax, uy + ay)
        r = math.hypot(ux, uy)
        if (best is None or r < best[1]) and covers(c, r):
            best = (c, r)
    return best


def balanced_splits(points, centroids):
    """Enumerate every half/half split of the points between 2 centroids.

    Returns ``(best_cost, best_labels, n_splits)``; costs are summed in
    point order with plain floats.
    """
    pts = np.asarray(points, dtype=float)
    c = np.asarray(centroids, dtype=float)
    n = len(pts)
    d = [[math.hypot(*(pts[i] - c[j])) for j in range(2)] for i in range(n)]
    best, best_labels, count = math.inf, None, 0
    for group in itertools.combinations(range(n), n // 2):
        labels = [0 if i in group else 1 for i in range(n)]
        cost = math.fsum(d[i][labels[i]] for i in range(n))
        if cost < best:
            best, best_labels = cost, labels
        count += 1
    return best, np.array(best_labels), count


def balanced_splits_cost(points, centroids):
    best, _, count = balanced_splits(points, centroids)
    return best, count
