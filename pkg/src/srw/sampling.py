"""Point processes and the waypoint / velocity / alarm measures.

Waypoint measures may be centered on a walker's home (ball, annulus, power
tail) or global (uniform, hotspot mixture). On bounded domains, centered
measures are clipped by rejection, which preserves positivity and continuity
of the density on the domain; on a torus, samples are wrapped instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import Point2, RectDomain
from .rng import RngStream

_MAX_REJECT = 100_000


class SupportOutsideDomain(ValueError):
    """The measure's support does not intersect the domain."""


# ---------------------------------------------------------------------------
# waypoint measures


class WaypointMeasure:
    """Base: a distribution for the next waypoint, possibly home-centered."""

    kind: str = "?"

    def sample(self, home: Point2, dom: RectDomain, rng: RngStream) -> tuple[float, float]:
        raise NotImplementedError

    def sample_batch(self, home: Point2, dom: RectDomain, rng: RngStream,
                     n: int) -> np.ndarray:
        out = np.empty((n, 2))
        for i in range(n):
            out[i] = self.sample(home, dom, rng)
        return out

    def density(self, x: np.ndarray, y: np.ndarray, home: Point2,
                dom: RectDomain) -> np.ndarray:
        """Density of the unclipped measure; clipping renormalizes later."""
        raise NotImplementedError

    def max_displacement(self, home: Point2) -> float:
        """Upper bound on |waypoint - home|, inf when unbounded."""
        return math.inf

    def check_support(self, home: Point2, dom: RectDomain) -> None:
        """Raise SupportOutsideDomain when no sample can land in dom."""


def _reject_loop(draw, accept, what: str):
    for _ in range(_MAX_REJECT):
        p = draw()
        if accept(p):
            return p
    raise SupportOutsideDomain(f"rejection sampling starved for {what}")


@dataclass(frozen=True)
class UniformDomain(WaypointMeasure):
    """Uniform over the whole domain (the classical waypoint choice)."""

    kind = "uniform_domain"

    def sample(self, home, dom, rng):
        return (dom.x0 + dom.a_x * rng.u(), dom.y0 + dom.a_y * rng.u())

    def sample_batch(self, home, dom, rng, n):
        u = rng.gen.random((n, 2))
        u[:, 0] = dom.x0 + dom.a_x * u[:, 0]
        u[:, 1] = dom.y0 + dom.a_y * u[:, 1]
        return u

    def density(self, x, y, home, dom):
        return np.full_like(np.asarray(x, dtype=float), 1.0 / dom.area)

    def max_displacement(self, home):
        return math.inf  # bounded by the domain itself, not by home


@dataclass(frozen=True)
class BallUniform(WaypointMeasure):
    """Uniform in the ball of given radius around home."""

    radius: float
    kind = "ball_uniform"

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("ball radius must be positive")

    def _draw_offset(self, rng: RngStream) -> tuple[float, float]:
        r = self.radius * math.sqrt(rng.u())
        th = 2.0 * math.pi * rng.u()
        return r * math.cos(th), r * math.sin(th)

    def sample(self, home, dom, rng):
        if dom.torus:
            ox, oy = self._draw_offset(rng)
            return dom.wrap(home.x + ox, home.y + oy)
        self.check_support(home, dom)

        def draw():
            ox, oy = self._draw_offset(rng)
            return home.x + ox, home.y + oy

        return _reject_loop(draw, lambda p: dom.contains(*p), "ball_uniform")

    def sample_batch(self, home, dom, rng, n):
        out = np.empty((n, 2))
        filled = 0
        if not dom.torus:
            self.check_support(home, dom)
        while filled < n:
            m = max(64, int(1.5 * (n - filled)))
            r = self.radius * np.sqrt(rng.gen.random(m))
            th = 2.0 * math.pi * rng.gen.random(m)
            px = home.x + r * np.cos(th)
            py = home.y + r * np.sin(th)
            if dom.torus:
                px = dom.x0 + (px - dom.x0) % dom.a_x
                py = dom.y0 + (py - dom.y0) % dom.a_y
                ok = np.ones(m, dtype=bool)
            else:
                ok = ((px >= dom.x0) & (px <= dom.x0 + dom.a_x)
                      & (py >= dom.y0) & (py <= dom.y0 + dom.a_y))
            take = min(int(ok.sum()), n - filled)
            idx = np.flatnonzero(ok)[:take]
            out[filled:filled + take, 0] = px[idx]
            out[filled:filled + take, 1] = py[idx]
            filled += take
        return out

    def density(self, x, y, home, dom):
        d2 = (np.asarray(x) - home.x) ** 2 + (np.asarray(y) - home.y) ** 2
        return np.where(d2 <= self.radius ** 2, 1.0 / (math.pi * self.radius ** 2), 0.0)

    def max_displacement(self, home):
        return self.radius

    def check_support(self, home, dom):
        # distance from home to the rectangle must not exceed the radius
        dx = max(dom.x0 - home.x, 0.0, home.x - (dom.x0 + dom.a_x))
        dy = max(dom.y0 - home.y, 0.0, home.y - (dom.y0 + dom.a_y))
        if math.hypot(dx, dy) > self.radius:
            raise SupportOutsideDomain(
                f"ball of radius {self.radius} around {tuple(home)} misses the domain")


@dataclass(frozen=True)
class AnnulusUniform(WaypointMeasure):
    """Uniform on the domain with the ball of given radius around home removed.

    This is the long-trip measure: the next waypoint is forced to be at
    least `radius` away from home.
    """

    radius: float
    kind = "annulus_uniform"

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("annulus radius must be positive")

    def sample(self, home, dom, rng):
        self.check_support(home, dom)
        r2 = self.radius ** 2

        def far(p):
            dx, dy = p[0] - home.x, p[1] - home.y
            if dom.torus:
                dx, dy = dom.min_image(dx, dy)
            return dx * dx + dy * dy > r2

        return _reject_loop(
            lambda: (dom.x0 + dom.a_x * rng.u(), dom.y0 + dom.a_y * rng.u()),
            far, "annulus_uniform")

    def sample_batch(self, home, dom, rng, n):
        out = np.empty((n, 2))
        filled = 0
        self.check_support(home, dom)
        r2 = self.radius ** 2
        while filled < n:
            m = max(64, int(1.5 * (n - filled)))
            px = dom.x0 + dom.a_x * rng.gen.random(m)
            py = dom.y0 + dom.a_y * rng.gen.random(m)
            dx, dy = px - home.x, py - home.y
            if dom.torus:
                dx = dx - dom.a_x * np.round(dx / dom.a_x)
                dy = dy - dom.a_y * np.round(dy / dom.a_y)
            ok = dx * dx + dy * dy > r2
            take = min(int(ok.sum()), n - filled)
            idx = np.flatnonzero(ok)[:take]
            out[filled:filled + take, 0] = px[idx]
            out[filled:filled + take, 1] = py[idx]
            filled += take
        return out

    def density(self, x, y, home, dom):
        dx = np.asarray(x) - home.x
        dy = np.asarray(y) - home.y
        if dom.torus:
            dx = dx - dom.a_x * np.round(dx / dom.a_x)
            dy = dy - dom.a_y * np.round(dy / dom.a_y)
        # support is already domain-relative; uniform height, normalized later
        return np.where(dx * dx + dy * dy > self.radius ** 2, 1.0, 0.0)

    def check_support(self, home, dom):
        cs = [(dom.x0, dom.y0), (dom.x0 + dom.a_x, dom.y0),
              (dom.x0, dom.y0 + dom.a_y), (dom.x0 + dom.a_x, dom.y0 + dom.a_y)]
        if dom.torus:
            if self.radius >= min(dom.a_x, dom.a_y) / 2.0:
                raise SupportOutsideDomain("annulus hole covers the torus")
            return
        if all(math.hypot(cx - home.x, cy - home.y) <= self.radius for cx, cy in cs):
            raise SupportOutsideDomain(
                f"annulus hole of radius {self.radius} covers the whole domain")

    def max_displacement(self, home):
        return math.inf


@dataclass(frozen=True)
class CenteredPowerTail(WaypointMeasure):
    """Rotationally symmetric around home with polynomial trip-length tail.

    The planar density is proportional to (1 + d/scale)^-(beta+2), so the
    trip length satisfies P(d > s) ~ (beta+1) (s/scale)^-beta for large s,
    with beta > 1 keeping the mean trip finite. The radius is sampled
    exactly as scale * Y/(1-Y) with Y ~ Beta(2, beta).
    """

    beta: float
    scale: float
    kind = "centered_power_tail"

    def __post_init__(self):
        if self.beta <= 1:
            raise ValueError("beta must exceed 1 for a finite mean trip")
        if self.scale <= 0:
            raise ValueError("scale must be positive")

    def _radius(self, rng: RngStream) -> float:
        y = rng.gen.beta(2.0, self.beta)
        return self.scale * y / (1.0 - y)

    def sample(self, home, dom, rng):
        if dom.torus:
            r = self._radius(rng)
            th = 2.0 * math.pi * rng.u()
            return dom.wrap(home.x + r * math.cos(th), home.y + r * math.sin(th))

        def draw():
            r = self._radius(rng)
            th = 2.0 * math.pi * rng.u()
            return home.x + r * math.cos(th), home.y + r * math.sin(th)

        return _reject_loop(draw, lambda p: dom.contains(*p), "centered_power_tail")

    def sample_batch(self, home, dom, rng, n):
        out = np.empty((n, 2))
        filled = 0
        while filled < n:
            m = max(64, int(2.0 * (n - filled)))
            y = rng.gen.beta(2.0, self.beta, size=m)
            r = self.scale * y / (1.0 - y)
            th = 2.0 * math.pi * rng.gen.random(m)
            px = home.x + r * np.cos(th)
            py = home.y + r * np.sin(th)
            if dom.torus:
                px = dom.x0 + (px - dom.x0) % dom.a_x
                py = dom.y0 + (py - dom.y0) % dom.a_y
                ok = np.ones(m, dtype=bool)
            else:
                ok = ((px >= dom.x0) & (px <= dom.x0 + dom.a_x)
                      & (py >= dom.y0) & (py <= dom.y0 + dom.a_y))
            take = min(int(ok.sum()), n - filled)
            idx = np.flatnonzero(ok)[:take]
            out[filled:filled + take, 0] = px[idx]
            out[filled:filled + take, 1] = py[idx]
            filled += take
        return out

    def density(self, x, y, home, dom):
        d = np.hypot(np.asarray(x) - home.x, np.asarray(y) - home.y)
        c = self.beta * (self.beta + 1.0) / (2.0 * math.pi * self.scale ** 2)
        return c * (1.0 + d / self.scale) ** (-(self.beta + 2.0))

    def tail_probability(self, s: float) -> float:
        """P(raw trip length > s) before any domain clipping."""
        w = 1.0 + s / self.scale
        return (self.beta + 1.0) * w ** (-self.beta) - self.beta * w ** (-(self.beta + 1.0))


@dataclass(frozen=True)
class Hotspot:
    center: Point2
    radius: float
    weight: float


@dataclass(frozen=True)
class HotspotMixture(WaypointMeasure):
    """Mixture of uniform discs at fixed attraction points plus a uniform
    background over the domain. Not home-centered."""

    hotspots: tuple[Hotspot, ...]
    background_weight: float = 0.0
    kind = "hotspot_mixture"

    def __post_init__(self):
        if not self.hotspots and self.background_weight <= 0:
            raise ValueError("mixture needs at least one component")
        if any(h.weight < 0 or h.radius <= 0 for h in self.hotspots) or self.background_weight < 0:
            raise ValueError("weights must be nonnegative and radii positive")
        if sum(h.weight for h in self.hotspots) + self.background_weight <= 0:
            raise ValueError("total weight must be positive")

    def _weights(self):
        w = [h.weight for h in self.hotspots] + [self.background_weight]
        tot = sum(w)
        return [x / tot for x in w]

    def sample(self, home, dom, rng):
        self.check_support(home, dom)
        w = self._weights()
        u = rng.u()
        acc = 0.0
        pick = len(w) - 1
        for i, wi in enumerate(w):
            acc += wi
            if u < acc:
                pick = i
                break
        if pick == len(self.hotspots):
            return (dom.x0 + dom.a_x * rng.u(), dom.y0 + dom.a_y * rng.u())
        h = self.hotspots[pick]
        sub = BallUniform(h.radius)
        return sub.sample(h.center, dom, rng)

    def density(self, x, y, home, dom):
        w = self._weights()
        out = np.zeros_like(np.asarray(x, dtype=float))
        for h, wi in zip(self.hotspots, w[:-1]):
            d2 = (np.asarray(x) - h.center.x) ** 2 + (np.asarray(y) - h.center.y) ** 2
            out = out + wi * np.where(d2 <= h.radius ** 2, 1.0 / (math.pi * h.radius ** 2), 0.0)
        out = out + w[-1] / dom.area
        return out

    def check_support(self, home, dom):
        if self.background_weight > 0:
            return
        for h in self.hotspots:
            if h.weight > 0:
                try:
                    BallUniform(h.radius).check_support(h.center, dom)
                    return
                except SupportOutsideDomain:
                    continue
        raise SupportOutsideDomain("every mixture component misses the domain")


# ---------------------------------------------------------------------------
# velocity and alarm measures


class VelocityMeasure:
    v_min: float = 0.0
    v_max: float = math.inf

    def sample(self, rng: RngStream) -> float:
        raise NotImplementedError

    def sample_batch(self, rng: RngStream, n: int) -> np.ndarray:
        return np.array([self.sample(rng) for _ in range(n)])


@dataclass(frozen=True)
class UniformVelocity(VelocityMeasure):
    lo: float
    hi: float

    def __post_init__(self):
        if not (0 < self.lo <= self.hi):
            raise ValueError("need 0 < v_min <= v_max")

    @property
    def v_min(self):
        return self.lo

    @property
    def v_max(self):
        return self.hi

    def sample(self, rng):
        return self.lo + (self.hi - self.lo) * rng.u()

    def sample_batch(self, rng, n):
        return self.lo + (self.hi - self.lo) * rng.gen.random(n)


@dataclass(frozen=True)
class TabulatedVelocity(VelocityMeasure):
    """Piecewise-linear speed density given as (speed, weight) knots."""

    speeds: tuple[float, ...]
    weights: tuple[float, ...]

    def __post_init__(self):
        v = np.asarray(self.speeds, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        if v.ndim != 1 or v.size < 2 or v.size != w.size:
            raise ValueError("need matching speed and weight knots, at least two")
        if v[0] <= 0 or np.any(np.diff(v) <= 0):
            raise ValueError("speeds must be positive and strictly increasing")
        if np.any(w < 0) or w.sum() <= 0:
            raise ValueError("weights must be nonnegative, not all zero")

    def _grid(self):
        v = np.asarray(self.speeds, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        xs = np.linspace(v[0], v[-1], 1025)
        dens = np.interp(xs, v, w)
        cdf = np.concatenate([[0.0], np.cumsum((dens[1:] + dens[:-1]) / 2.0 * np.diff(xs))])
        cdf /= cdf[-1]
        return xs, cdf

    @property
    def v_min(self):
        return float(self.speeds[0])

    @property
    def v_max(self):
        return float(self.speeds[-1])

    def sample(self, rng):
        xs, cdf = self._grid()
        return float(np.interp(rng.u(), cdf, xs))

    def sample_batch(self, rng, n):
        xs, cdf = self._grid()
        return np.interp(rng.gen.random(n), cdf, xs)


class AlarmMeasure:
    def sample(self, rng: RngStream) -> float:
        raise NotImplementedError

    def upper_bound(self) -> float:
        return math.inf


@dataclass(frozen=True)
class DeterministicAlarm(AlarmMeasure):
    duration: float

    def __post_init__(self):
        if self.duration < 0:
            raise ValueError("alarm duration must be nonnegative")

    def sample(self, rng):
        return self.duration

    def upper_bound(self):
        return self.duration


@dataclass(frozen=True)
class ExponentialAlarm(AlarmMeasure):
    rate: float

    def __post_init__(self):
        if self.rate <= 0:
            raise ValueError("alarm rate must be positive")

    def sample(self, rng):
        u = rng.u()
        return -math.log(1.0 - u) / self.rate


@dataclass(frozen=True)
class UniformAlarm(AlarmMeasure):
    lo: float
    hi: float

    def __post_init__(self):
        if not (0 <= self.lo <= self.hi):
            raise ValueError("need 0 <= lo <= hi")

    def sample(self, rng):
        return self.lo + (self.hi - self.lo) * rng.u()

    def upper_bound(self):
        return self.hi


# ---------------------------------------------------------------------------
# point process helpers


def sample_ppp(intensity: float, dom: RectDomain, rng: RngStream) -> np.ndarray:
    """Homogeneous Poisson process on the domain; returns an (n, 2) array."""
    if intensity < 0:
        raise ValueError("intensity must be nonnegative")
    n = int(rng.gen.poisson(intensity * dom.area))
    pts = rng.gen.random((n, 2))
    pts[:, 0] = dom.x0 + dom.a_x * pts[:, 0]
    pts[:, 1] = dom.y0 + dom.a_y * pts[:, 1]
    return pts


def thin(points: np.ndarray, keep_prob: float, rng: RngStream) -> np.ndarray:
    """Independent thinning: keep each point with probability keep_prob."""
    if not 0.0 <= keep_prob <= 1.0:
        raise ValueError("keep_prob must lie in [0, 1]")
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    mask = rng.gen.random(len(pts)) < keep_prob
    return pts[mask]


def sample_waypoint(measure: WaypointMeasure, home: Point2, dom: RectDomain,
                    rng: RngStream) -> tuple[float, float]:
    return measure.sample(home, dom, rng)


def sample_velocity(measure: VelocityMeasure, rng: RngStream) -> float:
    return measure.sample(rng)


def sample_alarm(measure: AlarmMeasure, rng: RngStream) -> float:
    return measure.sample(rng)


# ---------------------------------------------------------------------------
# quadrature


def _clip_mass_polar(measure, home, dom, center, rho, n) -> float:
    """Midpoint rule in polar coordinates around `center` for the mass of
    the unclipped density inside B(center, rho) intersected with dom."""
    rs = (np.arange(n) + 0.5) * (rho / n)
    ths = (np.arange(n) + 0.5) * (2.0 * math.pi / n)
    r, th = np.meshgrid(rs, ths, indexing="ij")
    px = center.x + r * np.cos(th)
    py = center.y + r * np.sin(th)
    inside = ((px >= dom.x0) & (px <= dom.x0 + dom.a_x)
              & (py >= dom.y0) & (py <= dom.y0 + dom.a_y))
    dens = measure.density(px, py, home, dom)
    cell = (rho / n) * (2.0 * math.pi / n)
    return float(np.sum(dens * inside * r) * cell)


def _domain_mass_cartesian(measure, home, dom, n) -> float:
    xs = dom.x0 + (np.arange(n) + 0.5) * (dom.a_x / n)
    ys = dom.y0 + (np.arange(n) + 0.5) * (dom.a_y / n)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    dens = measure.density(gx, gy, home, dom)
    return float(dens.sum() * (dom.a_x / n) * (dom.a_y / n))


def measure_mass_on_ball(measure: WaypointMeasure, home: Point2, dom: RectDomain,
                         center: Point2, rho: float, tol: float = 1e-4) -> float:
    """Mass the clipped measure assigns to B(center, rho) intersected with dom.

    Deterministic midpoint quadrature, refined until two successive
    refinements differ by less than tol in absolute value.
    """
    if rho <= 0:
        raise ValueError("rho must be positive")
    if dom.torus:
        raise ValueError("mass quadrature expects a bounded domain")
    prev = None
    n = 64
    while n <= 4096:
        num = _clip_mass_polar(measure, home, dom, center, rho, n)
        den = _domain_mass_cartesian(measure, home, dom, n)
        if den <= 0:
            raise SupportOutsideDomain("measure has zero mass on the domain")
        val = num / den
        if prev is not None and abs(val - prev) < tol:
            return val
        prev = val
        n *= 2
    return prev
