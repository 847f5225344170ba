"""Balanced k-means user clustering and an exhaustive capacitated-clustering oracle."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.spatial.distance import cdist


class InvalidKError(ValueError):
    pass


class InfeasibleCapacityError(ValueError):
    pass


@dataclass(frozen=True)
class ClusteringResult:
    labels: np.ndarray  # (N,) cluster index per point
    centroids: np.ndarray  # (k, 2)
    objective: float  # total point-to-centroid distance, m
    history: tuple = ()  # objective after each accepted iteration

    @property
    def k(self) -> int:
        return len(self.centroids)

    def sizes(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.k)


def _as_points(points) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("points must be an (N, 2) array")
    return pts


def _check_k(n: int, k: int) -> None:
    if k <= 0 or k > n:
        raise InvalidKError(f"k must be in [1, {n}], got {k}")


def assignment_cost(points, centroids, labels) -> float:
    pts = _as_points(points)
    c = np.asarray(centroids, dtype=float)
    return float(np.linalg.norm(pts - c[labels], axis=1).sum())


def balanced_assignment(points, centroids) -> np.ndarray:
    """Minimum total-distance assignment with cluster sizes ``floor(N/k)`` or ``ceil(N/k)``.

    Solved exactly as a linear assignment problem: every cluster owns
    ``N // k`` mandatory slots plus one optional slot, and ``k - N % k``
    dummy rows soak up the unused optional slots at zero cost.
    """
    pts = _as_points(points)
    cents = np.asarray(centroids, dtype=float)
    n, k = len(pts), len(cents)
    _check_k(n, k)
    q, rem = divmod(n, k)
    dist = cdist(pts, cents)  # (n, k)

    n_dummy = k - rem if rem else 0
    blocks = [np.repeat(dist, q, axis=1)]  # mandatory slots, cluster-major per slot
    if rem:
        blocks.append(dist)  # one optional slot per cluster
    cost = np.hstack(blocks)
    slot_cluster = np.concatenate(
        [np.repeat(np.arange(k), q)] + ([np.arange(k)] if rem else [])
    )
    if n_dummy:
        big = cost.max() * (n + 1) + 1.0
        dummy = np.full((n_dummy, cost.shape[1]), big)
        dummy[:, k * q:] = 0.0
        cost = np.vstack([cost, dummy])
    rows, cols = linear_sum_assignment(cost)
    labels = np.empty(n, dtype=int)
    real = rows < n
    labels[rows[real]] = slot_cluster[cols[real]]
    return labels


def _means(pts: np.ndarray, labels: np.ndarray, k: int) -> np.ndarray:
    sums = np.zeros((k, 2))
    np.add.at(sums, labels, pts)
    counts = np.bincount(labels, minlength=k).astype(float)
    return sums / counts[:, None]


def _kmeanspp_init(pts: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = len(pts)
    centers = [pts[rng.integers(n)]]
    d2 = np.sum((pts - centers[0]) ** 2, axis=1)
    for _ in range(1, k):
        total = d2.sum()
        if total <= 0.0:
            idx = int(rng.integers(n))
        else:
            idx = int(rng.choice(n, p=d2 / total))
        centers.append(pts[idx])
        d2 = np.minimum(d2, np.sum((pts - pts[idx]) ** 2, axis=1))
    return np.array(centers)


def balanced_kmeans(points, k: int, seed: int = 0, max_iters: int = 100) -> ClusteringResult:
    """Balanced k-means: exact balanced assignment alternating with mean updates.

    The objective is the total distance of points to their cluster mean. An
    iteration is only accepted if it strictly lowers the objective, so the
    recorded history is decreasing and the loop stops on stable labels or
    once no improvement is found.
    """
    pts = _as_points(points)
    n = len(pts)
    _check_k(n, k)
    rng = np.random.default_rng(seed)
    centroids = _kmeanspp_init(pts, k, rng)

    best_labels: Optional[np.ndarray] = None
    best_obj = np.inf
    history = []
    for _ in range(max(1, max_iters)):
        labels = balanced_assignment(pts, centroids)
        # balanced sizes are >= floor(N/k) >= 1, so no cluster is ever empty
        means = _means(pts, labels, k)
        obj = assignment_cost(pts, means, labels)
        if best_labels is not None and (
            np.array_equal(labels, best_labels) or obj >= best_obj - 1e-9 * max(1.0, best_obj)
        ):
            break
        best_labels, best_obj = labels, obj
        history.append(obj)
        centroids = means
    return ClusteringResult(best_labels, _means(pts, best_labels, k), float(best_obj), tuple(history))


def ccp_exact(
    points,
    k: int,
    capacities: Sequence[float],
    rates: Sequence[float],
    *,
    max_points: int = 12,
) -> ClusteringResult:
    """Exact capacitated clustering by enumerating every labelling.

    Minimises the total distance of points to their cluster mean subject to
    each cluster's summed demand staying within its capacity and every
    cluster being used. Oracle scale only.
    """
    pts = _as_points(points)
    n = len(pts)
    _check_k(n, k)
    if n > max_points:
        raise ValueError(f"exhaustive oracle limited to {max_points} points")
    caps = np.asarray(capacities, dtype=float)
    dem = np.asarray(rates, dtype=float)
    if caps.shape != (k,) or dem.shape != (n,):
        raise ValueError("capacities must have length k and rates length N")

    best_obj, best_labels = np.inf, None
    # with identical capacities clusters are interchangeable: pin point 0
    symmetric = bool(np.all(caps == caps[0]))
    head = [(0,)] if symmetric else [(j,) for j in range(k)]
    for first in head:
        for rest in itertools.product(range(k), repeat=n - 1):
            labels = np.array(first + rest)
            counts = np.bincount(labels, minlength=k)
            if np.any(counts == 0):
                continue
            if np.any(np.bincount(labels, weights=dem, minlength=k) > caps + 1e-12):
                continue
            obj = assignment_cost(pts, _means(pts, labels, k), labels)
            if obj < best_obj - 1e-12:
                best_obj, best_labels = obj, labels
    if best_labels is None:
        raise InfeasibleCapacityError("no labelling satisfies the capacities")
    return ClusteringResult(best_labels, _means(pts, best_labels, k), float(best_obj))
