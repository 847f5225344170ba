"""Planar geometry: distances, disc tests and the minimum covering circle."""
from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Optional, Sequence

# Coverage slack for closed-disc membership tests.
EPS = 1e-9


class Point2(NamedTuple):
    x: float
    y: float


@dataclass(frozen=True)
class Circle:
    center: Point2
    radius: float

    def __post_init__(self):
        if self.radius < 0:
            raise ValueError("circle radius must be non-negative")


class EmptyClusterError(ValueError):
    pass


def distance(p: Sequence[float], q: Sequence[float]) -> float:
    return math.hypot(p[0] - q[0], p[1] - q[1])


def point_in_disc(p: Sequence[float], c: Circle) -> bool:
    return distance(p, c.center) <= c.radius + EPS


def discs_overlap(a: Circle, b: Circle) -> bool:
    """True when the open discs intersect; tangent discs do not overlap."""
    return distance(a.center, b.center) < a.radius + b.radius


# --------------------------------------------------------------------------
# minimum covering circle (randomised incremental, expected linear time)

def _covers(c: Circle, p: Point2) -> bool:
    # relative slack keeps large-coordinate inputs stable
    return distance(p, c.center) <= c.radius + EPS * max(1.0, c.radius)


def _diameter_circle(a: Point2, b: Point2) -> Circle:
    center = Point2((a.x + b.x) / 2.0, (a.y + b.y) / 2.0)
    return Circle(center, max(distance(center, a), distance(center, b)))


def _circumcircle(a: Point2, b: Point2, c: Point2) -> Optional[Circle]:
    # translate to the bounding-box origin for numerical stability
    ox = (min(a.x, b.x, c.x) + max(a.x, b.x, c.x)) / 2.0
    oy = (min(a.y, b.y, c.y) + max(a.y, b.y, c.y)) / 2.0
    ax, ay = a.x - ox, a.y - oy
    bx, by = b.x - ox, b.y - oy
    cx, cy = c.x - ox, c.y - oy
    d = 2.0 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by))
    if d == 0.0:
        return None
    a2, b2, c2 = ax * ax + ay * ay, bx * bx + by * by, cx * cx + cy * cy
    x = ox + (a2 * (by - cy) + b2 * (cy - ay) + c2 * (ay - by)) / d
    y = oy + (a2 * (cx - bx) + b2 * (ax - cx) + c2 * (bx - ax)) / d
    center = Point2(x, y)
    return Circle(center, max(distance(center, a), distance(center, b), distance(center, c)))


def _cross(ax, ay, bx, by, cx, cy) -> float:
    return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)


def _circle_two(points: Sequence[Point2], p: Point2, q: Point2) -> Circle:
    """Smallest circle covering ``points`` with ``p`` and ``q`` on its boundary."""
    base = _diameter_circle(p, q)
    left: Optional[Circle] = None
    right: Optional[Circle] = None
    for r in points:
        if _covers(base, r):
            continue
        cross = _cross(p.x, p.y, q.x, q.y, r.x, r.y)
        c = _circumcircle(p, q, r)
        if c is None:
            continue
        side = _cross(p.x, p.y, q.x, q.y, c.center.x, c.center.y)
        if cross > 0.0 and (left is None or side > _cross(p.x, p.y, q.x, q.y, left.center.x, left.center.y)):
            left = c
        elif cross < 0.0 and (right is None or side < _cross(p.x, p.y, q.x, q.y, right.center.x, right.center.y)):
            right = c
    if left is None and right is None:
        return base
    if left is None:
        return right
    if right is None:
        return left
    return left if left.radius <= right.radius else right


def _circle_one(points: Sequence[Point2], p: Point2) -> Circle:
    c = Circle(p, 0.0)
    for i, q in enumerate(points):
        if not _covers(c, q):
            if c.radius == 0.0:
                c = _diameter_circle(p, q)
            else:
                c = _circle_two(points[: i + 1], p, q)
    return c


def min_covering_circle(points: Iterable[Sequence[float]], seed: int = 0) -> Circle:
    """Smallest closed disc containing every point.

    Duplicates are removed and the input order is shuffled with ``seed`` so
    repeated calls are reproducible.
    """
    pts = sorted({Point2(float(p[0]), float(p[1])) for p in points})
    if not pts:
        raise EmptyClusterError("cannot cover an empty point set")
    random.Random(seed).shuffle(pts)
    c: Optional[Circle] = None
    for i, p in enumerate(pts):
        if c is None or not _covers(c, p):
            c = _circle_one(pts[: i + 1], p)
    # absorb the covering slack so every point is inside exactly
    reach = max(distance(p, c.center) for p in pts)
    return c if reach <= c.radius else Circle(c.center, reach)
