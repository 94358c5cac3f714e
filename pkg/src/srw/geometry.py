"""Planar geometry for rectangular mobility domains.

Coordinates are float64 throughout. Domains are axis-aligned rectangles,
either bounded (walkers are confined by construction, nothing bounces) or
periodic (torus mode, used to emulate boundary-free experiments).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

KINEMATIC_TOL = 1e-9


class EmptyErosion(ValueError):
    """Raised when eroding a rectangle by a margin that leaves nothing."""


@dataclass(frozen=True, slots=True)
class Point2:
    """A point in the plane. Coordinates must be finite."""

    x: float
    y: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"non-finite point ({self.x}, {self.y})")

    def __iter__(self):
        yield self.x
        yield self.y


@dataclass(frozen=True, slots=True)
class RectDomain:
    """Axis-aligned rectangle [x0, x0+a_x] x [y0, y0+a_y].

    With torus=True opposite edges are identified and distances use the
    minimum image convention.
    """

    a_x: float
    a_y: float
    x0: float = 0.0
    y0: float = 0.0
    torus: bool = False

    def __post_init__(self) -> None:
        if not (self.a_x > 0 and self.a_y > 0):
            raise ValueError(f"domain sides must be positive, got {self.a_x} x {self.a_y}")
        if not all(map(math.isfinite, (self.a_x, self.a_y, self.x0, self.y0))):
            raise ValueError("non-finite domain parameters")

    @property
    def area(self) -> float:
        return self.a_x * self.a_y

    @property
    def diameter(self) -> float:
        """Largest distance between two points of the rectangle."""
        if self.torus:
            return math.hypot(self.a_x / 2.0, self.a_y / 2.0)
        return math.hypot(self.a_x, self.a_y)

    @property
    def center(self) -> Point2:
        return Point2(self.x0 + self.a_x / 2.0, self.y0 + self.a_y / 2.0)

    def contains(self, x: float, y: float, tol: float = 0.0) -> bool:
        return (self.x0 - tol <= x <= self.x0 + self.a_x + tol
                and self.y0 - tol <= y <= self.y0 + self.a_y + tol)

    def wrap(self, x: float, y: float) -> tuple[float, float]:
        """Map a point of the plane to its torus representative."""
        return (self.x0 + (x - self.x0) % self.a_x,
                self.y0 + (y - self.y0) % self.a_y)

    def min_image(self, dx: float, dy: float) -> tuple[float, float]:
        """Shortest displacement vector equivalent to (dx, dy) on the torus."""
        dx = dx - self.a_x * round(dx / self.a_x)
        dy = dy - self.a_y * round(dy / self.a_y)
        return dx, dy


def distance(p: Point2, q: Point2, dom: RectDomain | None = None) -> float:
    """Distance between two points, torus-aware when dom.torus is set."""
    dx, dy = q.x - p.x, q.y - p.y
    if dom is not None and dom.torus:
        dx, dy = dom.min_image(dx, dy)
    return math.hypot(dx, dy)


def erode(dom: RectDomain, margin: float) -> RectDomain:
    """Shrink the rectangle by margin on every side.

    Raises EmptyErosion when 2*margin >= min side.
    """
    if margin < 0:
        raise ValueError("margin must be nonnegative")
    if margin == 0.0:
        return dom
    if 2.0 * margin >= min(dom.a_x, dom.a_y):
        raise EmptyErosion(f"margin {margin} empties a {dom.a_x} x {dom.a_y} rectangle")
    return RectDomain(dom.a_x - 2 * margin, dom.a_y - 2 * margin,
                      dom.x0 + margin, dom.y0 + margin, dom.torus)


def cover_with_balls(region: RectDomain, eps: float) -> np.ndarray:
    """Centers of a square grid whose eps-balls cover the region.

    Grid spacing is at most eps*sqrt(2), so every point of the region is
    within eps of some center. Returns an (m, 2) array.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    spacing = eps * math.sqrt(2.0)
    nx = max(1, math.ceil(region.a_x / spacing))
    ny = max(1, math.ceil(region.a_y / spacing))
    xs = region.x0 + (np.arange(nx) + 0.5) * (region.a_x / nx)
    ys = region.y0 + (np.arange(ny) + 0.5) * (region.a_y / ny)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    return np.column_stack([gx.ravel(), gy.ravel()])


@dataclass(frozen=True, slots=True)
class Segment:
    """A constant-speed straight-line leg traversed over [t_start, t_end].

    speed * (t_end - t_start) must equal the segment length; a zero-speed
    segment (a node standing still) must have coincident endpoints.
    """

    start: Point2
    end: Point2
    t_start: float
    t_end: float
    speed: float

    def __post_init__(self) -> None:
        if self.t_end < self.t_start:
            raise ValueError("t_end before t_start")
        if self.speed < 0:
            raise ValueError("negative speed")
        d = distance(self.start, self.end)
        travel = self.speed * (self.t_end - self.t_start)
        tol = KINEMATIC_TOL * max(1.0, d, travel)
        if abs(d - travel) > tol:
            raise ValueError(f"inconsistent leg: length {d}, speed*dt {travel}")

    @classmethod
    def from_endpoints(cls, start: Point2, end: Point2, t_start: float,
                       speed: float) -> "Segment":
        d = distance(start, end)
        if speed <= 0:
            raise ValueError("speed must be positive for a moving leg")
        return cls(start, end, t_start, t_start + d / speed, speed)

    @property
    def duration(self) -> float:
        return self.t_end - self.t_start

    def position(self, t: float) -> Point2:
        if not (self.t_start - KINEMATIC_TOL <= t <= self.t_end + KINEMATIC_TOL):
            raise ValueError(f"t={t} outside [{self.t_start}, {self.t_end}]")
        if self.duration == 0.0:
            return self.start
        u = min(1.0, max(0.0, (t - self.t_start) / self.duration))
        return Point2(self.start.x + u * (self.end.x - self.start.x),
                      self.start.y + u * (self.end.y - self.start.y))

    def velocity(self) -> tuple[float, float]:
        if self.duration == 0.0:
            return 0.0, 0.0
        return ((self.end.x - self.start.x) / self.duration,
                (self.end.y - self.start.y) / self.duration)


def _earliest_root_in(a: float, b: float, c: float, hi: float) -> float | None:
    """Earliest tau in [0, hi] with a*tau^2 + b*tau + c <= 0, given c > 0.

    Uses the citardauq form so the small root stays accurate when b
    dominates. Returns None when the quadratic never reaches zero in range.
    """
    if a <= 0.0:
        # No relative motion: constant positive distance.
        return None
    disc = b * b - 4.0 * a * c
    if disc < 0.0:
        return None
    sq = math.sqrt(disc)
    qq = -0.5 * (b + math.copysign(sq, b)) if b != 0.0 else -0.5 * sq
    r1 = qq / a
    r2 = c / qq if qq != 0.0 else math.inf
    lo_root = min(r1, r2)
    hi_root = max(r1, r2)
    if hi_root < 0.0 or lo_root > hi:
        return None
    if lo_root >= 0.0:
        return lo_root
    # c > 0 puts tau=0 outside the ball, so lo_root < 0 < hi_root cannot
    # happen except through rounding; treat as contact at 0.
    return 0.0


def min_distance_point_segment(p: Point2, seg: Segment) -> tuple[float, float]:
    """Minimum distance from a static point to the moving point of seg.

    Returns (distance, earliest time at which it is attained).
    """
    vx, vy = seg.velocity()
    dx0, dy0 = seg.start.x - p.x, seg.start.y - p.y
    a = vx * vx + vy * vy
    if a == 0.0:
        return math.hypot(dx0, dy0), seg.t_start
    b = 2.0 * (dx0 * vx + dy0 * vy)
    tau = min(seg.duration, max(0.0, -b / (2.0 * a)))
    dist = math.hypot(dx0 + vx * tau, dy0 + vy * tau)
    return dist, seg.t_start + tau


def first_contact_two_moving(seg_a: Segment, seg_b: Segment,
                             rho: float) -> float | None:
    """Earliest t in the common time window with |A(t) - B(t)| <= rho.

    Returns None when the windows do not overlap or the pair never comes
    within rho. Both segments may be degenerate (zero speed).
    """
    lo = max(seg_a.t_start, seg_b.t_start)
    hi = min(seg_a.t_end, seg_b.t_end)
    if hi < lo:
        return None
    pa = seg_a.position(lo)
    pb = seg_b.position(lo)
    dx, dy = pa.x - pb.x, pa.y - pb.y
    c = dx * dx + dy * dy - rho * rho
    if c <= 0.0:
        return lo
    vax, vay = seg_a.velocity()
    vbx, vby = seg_b.velocity()
    rvx, rvy = vax - vbx, vay - vby
    a = rvx * rvx + rvy * rvy
    b = 2.0 * (dx * rvx + dy * rvy)
    tau = _earliest_root_in(a, b, c, hi - lo)
    return None if tau is None else lo + tau
