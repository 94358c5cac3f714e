"""Detection and coverage times, survival estimation, and tail-bound constants.

Contact is geometric: a static target at w is detected the first instant a
walker comes within the contact range rho of w; coverage of a region means
every point of the region has been within range r of some walker's path.
All first-contact computations are event-driven (exact per-leg quadratics),
never time-stepped; the kernels module supplies the hot loops.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import partial

import numpy as np

from . import kernels
from .geometry import Point2, RectDomain, EmptyErosion, cover_with_balls, erode
from .mobility import (MobilityModel, WalkerTrajectory, advance_to,
                       init_walker, next_leg)
from .replication import run_indexed
from .rng import RngStream
from .sampling import measure_mass_on_ball, sample_ppp

Z_95 = 1.959963984540054   # two-sided 95% normal quantile, frozen


class TargetOutsideErodedDomain(UserWarning):
    """Target violates the interior-margin hypothesis; results still valid
    as raw first-contact times, only the tail bound may not apply."""


class EpsNotLessThanR(ValueError):
    pass


class DegenerateBound(ValueError):
    """Raised when the tail-bound constants carry no information."""


# ---------------------------------------------------------------------------
# first-contact queries on simulated trajectories


def _merged_legs(walkers: list[WalkerTrajectory], t_max: float) -> np.ndarray:
    """All walkers' legs with t0 <= t_max, sorted by start time."""
    chunks = [w.legs_array() for w in walkers if w.n_legs]
    if not chunks:
        return np.empty((0, 6))
    legs = np.vstack(chunks)
    legs = legs[legs[:, 4] <= t_max]
    return legs[np.argsort(legs[:, 4], kind="stable")]


def _image_shifts(dom: RectDomain) -> list[tuple[float, float]]:
    if not dom.torus:
        return [(0.0, 0.0)]
    return [(i * dom.a_x, j * dom.a_y) for i in (-1, 0, 1) for j in (-1, 0, 1)]


def _check_target_margin(dom: RectDomain, w: Point2, rho: float) -> None:
    if dom.torus:
        return
    try:
        inner = erode(dom, rho)
    except EmptyErosion:
        inner = None
    if inner is None or not inner.contains(w.x, w.y):
        warnings.warn(f"target {('%g, %g' % (w.x, w.y))} closer than {rho} "
                      "to the boundary; tail bound hypotheses not met",
                      TargetOutsideErodedDomain, stacklevel=3)


def detect_static(walkers: list[WalkerTrajectory], w: Point2, rho: float,
                  t_max: float) -> float | None:
    """Earliest time any walker comes within rho of the static point w,
    or None if that does not happen by t_max."""
    if rho <= 0:
        raise ValueError("rho must be positive")
    if walkers:
        _check_target_margin(walkers[0].dom, w, rho)
    legs = _merged_legs(walkers, t_max)
    if legs.shape[0] == 0:
        return None
    dom = walkers[0].dom
    t = min(kernels.first_hit_static(legs, w.x + sx, w.y + sy, rho)
            for sx, sy in _image_shifts(dom))
    return t if t <= t_max else None


def detect_mobile(walkers: list[WalkerTrajectory], extra: WalkerTrajectory,
                  rho: float, t_max: float) -> float | None:
    """Earliest time any walker comes within rho of the moving extra walker."""
    if rho <= 0:
        raise ValueError("rho must be positive")
    extra_legs = extra.legs_array()
    extra_legs = extra_legs[extra_legs[:, 4] <= t_max]
    shifts = _image_shifts(extra.dom)
    best = math.inf
    for traj in walkers:
        legs = traj.legs_array()
        legs = legs[legs[:, 4] <= t_max]
        for sx, sy in shifts:
            if sx == 0.0 and sy == 0.0:
                shifted = extra_legs
            else:
                shifted = extra_legs.copy()
                shifted[:, 0] += sx
                shifted[:, 2] += sx
                shifted[:, 1] += sy
                shifted[:, 3] += sy
            t = kernels.first_contact_two(legs, shifted, rho)
            if t < best:
                best = t
    return best if best <= t_max else None


def coverage_time(walkers: list[WalkerTrajectory], region: RectDomain,
                  r: float, eps: float,
                  t_max: float) -> tuple[float | None, np.ndarray]:
    """Time until every point of region has been within r of some walker.

    The region is covered by balls of radius eps; a ball is swept as soon
    as a walker passes within r - eps of its center, so the returned time
    is the max of per-center first hits (second return value, inf where a
    center was never approached within the simulated span).
    """
    if not 0 < eps < r:
        raise EpsNotLessThanR(f"need 0 < eps < r, got eps={eps}, r={r}")
    centers = cover_with_balls(region, eps)
    legs = _merged_legs(walkers, t_max)
    if legs.shape[0] == 0:
        return None, np.full(centers.shape[0], np.inf)
    rho = r - eps
    hits = kernels.first_hit_static_multi(legs, centers, rho)
    if walkers[0].dom.torus:
        for sx, sy in _image_shifts(walkers[0].dom):
            if sx == 0.0 and sy == 0.0:
                continue
            hits = np.minimum(hits, kernels.first_hit_static_multi(
                legs, centers + (sx, sy), rho))
    t_cov = float(hits.max())
    return (t_cov if t_cov <= t_max else None), hits


# ---------------------------------------------------------------------------
# survival estimation


@dataclass
class SurvivalCurve:
    """Empirical tail P(T > t) on a grid with Wilson 95% bands."""

    t_grid: np.ndarray
    survival: np.ndarray
    ci_lo: np.ndarray
    ci_hi: np.ndarray
    censored_frac: float
    bound: np.ndarray | None = None

    def __post_init__(self):
        s = self.survival
        if np.any(s < -1e-12) or np.any(s > 1 + 1e-12):
            raise ValueError("survival values must lie in [0, 1]")
        if np.any(np.diff(s) > 1e-12):
            raise ValueError("survival must be non-increasing in t")
        if np.any(self.ci_lo > s + 1e-12) or np.any(self.ci_hi < s - 1e-12):
            raise ValueError("confidence bands must bracket the estimate")

    def write_csv(self, fh) -> None:
        fh.write("t,survival,ci_lo,ci_hi,bound\n")
        bound = self.bound if self.bound is not None else [None] * len(self.t_grid)
        for t, s, lo, hi, b in zip(self.t_grid, self.survival, self.ci_lo,
                                   self.ci_hi, bound):
            tail = "" if b is None else f"{b:.10g}"
            fh.write(f"{t:.10g},{s:.10g},{lo:.10g},{hi:.10g},{tail}\n")


def _one_rep(sampler, _index: int, stream: RngStream) -> float:
    t = sampler(stream)
    return math.inf if t is None else float(t)


def wilson_interval(k: int, n: int, z: float = Z_95) -> tuple[float, float]:
    """Wilson score interval for k successes out of n."""
    if n == 0:
        return 0.0, 1.0
    p = k / n
    denom = 1.0 + z * z / n
    center = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    return max(0.0, center - half), min(1.0, center + half)


def estimate_survival(sampler, reps: int, t_grid, t_max: float,
                      rng: RngStream, workers: int | None = None) -> SurvivalCurve:
    """Monte Carlo survival curve of the time returned by sampler(stream).

    sampler is called once per replication with a dedicated child stream and
    returns a detection/coverage time, or None/inf when censored at t_max.
    Censored replications count as survivors at every grid point, so the
    estimate upper-bounds the true tail.
    """
    if reps < 1:
        raise ValueError("reps must be >= 1")
    if np.max(t_grid) > t_max:
        raise ValueError("t_grid extends past t_max")
    times = np.asarray(run_indexed(partial(_one_rep, sampler), reps, rng,
                                   workers=workers))
    return survival_from_times(times, t_grid)


def survival_from_times(times, t_grid) -> SurvivalCurve:
    """Survival curve with Wilson bands from raw event times (inf = censored)."""
    times = np.asarray(times, dtype=float)
    t_grid = np.asarray(t_grid, dtype=float)
    reps = times.size
    surv = np.empty(len(t_grid))
    lo = np.empty(len(t_grid))
    hi = np.empty(len(t_grid))
    for i, t in enumerate(t_grid):
        k = int(np.count_nonzero(times > t))
        surv[i] = k / reps
        lo[i], hi[i] = wilson_interval(k, reps)
    return SurvivalCurve(t_grid, surv, lo, hi,
                         censored_frac=float(np.mean(np.isinf(times))))


# ---------------------------------------------------------------------------
# theoretical tail-bound constants


@dataclass(frozen=True)
class BoundConstants:
    """Constants of the exponential detection-tail bound c1 * exp(-c2 t).

    c1 is reconstructed from the proof (exponent -lambda * pi * (2r)^2);
    c1_as_printed keeps the published closed form, whose positive exponent
    disagrees with the proof, for side-by-side reporting. q is the waypoint
    mass of the contact ball, q_star the chance the first trip ends before
    the first alarm, c_mobile the rate of the moving-target variant.
    """

    c1: float
    c2: float
    q: float
    q_star: float
    c1_as_printed: float
    c_mobile: float
    q_star_se: float = field(default=0.0, compare=False)

    def __post_init__(self):
        if not 0.0 < self.q < 1.0:
            raise ValueError("q must lie in (0, 1)")
        if not 0.0 < self.q_star <= 1.0:
            raise ValueError("q_star must lie in (0, 1]")
        if self.c2 <= 0.0:
            raise ValueError("c2 must be positive")

    def bound_values(self, t_grid) -> np.ndarray:
        return self.c1 * np.exp(-self.c2 * np.asarray(t_grid, dtype=float))


def _occupation_fraction(model: MobilityModel, home: Point2, r: float,
                         n_legs: int, rng: RngStream,
                         burn_in_legs: int = 100) -> float:
    """Long-run fraction of time the walker spends within r of its home,
    accumulated exactly from the per-leg quadratic."""
    state, traj = init_walker(model, home, rng)
    for _ in range(burn_in_legs):
        next_leg(state, traj, model, rng)
    traj.prune_before(state.t0)
    t_anchor = state.t0
    for _ in range(n_legs):
        next_leg(state, traj, model, rng)
    legs = traj.legs_array()
    legs = legs[legs[:, 4] >= t_anchor - 1e-12]
    occupied = segment_ball_occupation(legs, home.x, home.y, r,
                                       torus_dom=model.dom if model.dom.torus else None)
    total = legs[:, 5].max() - legs[:, 4].min()
    return occupied / total


def segment_ball_occupation(legs: np.ndarray, cx: float, cy: float,
                            rho: float, torus_dom: RectDomain | None = None) -> float:
    """Total time the piecewise-linear motion spends inside the disc."""
    if legs.shape[0] == 0:
        return 0.0
    shifts = [(0.0, 0.0)]
    if torus_dom is not None:
        shifts = _image_shifts(torus_dom)
    total = 0.0
    dt = legs[:, 5] - legs[:, 4]
    safe = np.where(dt > 0, dt, 1.0)
    vx = np.where(dt > 0, (legs[:, 2] - legs[:, 0]) / safe, 0.0)
    vy = np.where(dt > 0, (legs[:, 3] - legs[:, 1]) / safe, 0.0)
    for sx, sy in shifts:
        dx = legs[:, 0] - (cx + sx)
        dy = legs[:, 1] - (cy + sy)
        a = vx * vx + vy * vy
        b = 2.0 * (dx * vx + dy * vy)
        c = dx * dx + dy * dy - rho * rho
        # static legs: inside the whole duration or not at all
        static = a <= 0.0
        total += float(np.sum(np.where(static & (c <= 0.0), dt, 0.0)))
        disc = b * b - 4.0 * a * c
        sol = (~static) & (disc > 0.0)
        sq = np.sqrt(np.where(sol, disc, 0.0))
        asafe = np.where(sol, a, 1.0)
        t1 = np.clip((-b - sq) / (2.0 * asafe), 0.0, dt)
        t2 = np.clip((-b + sq) / (2.0 * asafe), 0.0, dt)
        total += float(np.sum(np.where(sol, t2 - t1, 0.0)))
    return total


def compute_bound_constants(cfg, mc_reps: int = 100_000,
                            rng: RngStream | None = None) -> BoundConstants:
    """Evaluate the tail-bound constants for a homogeneous configuration.

    The contact ball mass q is integrated at the domain center (the target
    convention used by every experiment here); q_star is Monte Carlo over
    mc_reps fresh walkers; the mobile rate uses the long-run near-home
    occupation fraction of a single long simulation.
    """
    from .config import MobilityConfig   # cycle-free: config never imports us
    if not isinstance(cfg, MobilityConfig):
        raise TypeError("cfg must be a MobilityConfig")
    if rng is None:
        rng = RngStream(0)
    model = cfg.build_model()
    dom = model.dom
    target = Point2(*dom.center)
    r = cfg.r
    lam = cfg.intensity

    q = measure_mass_on_ball(model.waypoints, target, dom, target, 2.0 * r,
                             tol=1e-7)
    if q >= 1.0:
        raise DegenerateBound(f"contact ball carries all waypoint mass (q={q})")
    if q <= 0.0:
        raise DegenerateBound("contact ball carries no waypoint mass")

    # q_star: P(first trip over before the first alarm draw)
    st = rng.child(0)
    hits = 0
    for _ in range(mc_reps):
        hx = dom.x0 + dom.a_x * st.u()
        hy = dom.y0 + dom.a_y * st.u()
        home = Point2(hx, hy)
        wx, wy = model.waypoints.sample(home, dom, st)
        ddx, ddy = wx - hx, wy - hy
        if dom.torus:
            ddx, ddy = dom.min_image(ddx, ddy)
        s1 = math.hypot(ddx, ddy) / model.velocity.sample(st)
        z = model.alarm.sample(st) if model.alarm is not None else math.inf
        if s1 < z:
            hits += 1
    q_star = hits / mc_reps
    q_star_se = math.sqrt(max(q_star * (1 - q_star), 0.0) / mc_reps)

    v_min = model.v_min
    diam = dom.diameter
    log_qs = -math.inf if q_star >= 1.0 else math.log1p(-q_star)
    c2 = -(v_min / diam) * max(log_qs, math.log1p(-q))
    if c2 <= 0.0:
        raise DegenerateBound(f"bound rate is not positive (c2={c2})")

    ball_area = math.pi * (2.0 * r) ** 2
    p_start = 1.0 - math.exp(-lam * ball_area)
    c1 = p_start + (1.0 - p_start) / (1.0 - q)
    e_pos = math.exp(lam * math.pi * r * r)
    c1_printed = max(1.0 - e_pos, e_pos) / (1.0 - q)

    home = Point2(*dom.center)
    p_min = _occupation_fraction(model, home, r, n_legs=20_000, rng=rng.child(1))
    c_mobile = lam * v_min * p_min / diam

    return BoundConstants(c1=c1, c2=c2, q=q, q_star=q_star,
                          c1_as_printed=c1_printed, c_mobile=c_mobile,
                          q_star_se=q_star_se)


# ---------------------------------------------------------------------------
# experiment drivers (one replication each); used by the CLI and the
# acceptance suite


def _simulate_walkers(model: MobilityModel, homes: np.ndarray,
                      rng: RngStream, horizon: float):
    pairs = []
    for i, (hx, hy) in enumerate(homes):
        st = rng.child(i + 1)
        state, traj = init_walker(model, Point2(float(hx), float(hy)), st)
        advance_to(state, traj, model, st, horizon)
        pairs.append((state, traj, st))
    return pairs


def _extend_walkers(pairs, model: MobilityModel, horizon: float) -> None:
    for state, traj, st in pairs:
        advance_to(state, traj, model, st, horizon)


def static_detection_rep(model: MobilityModel, lam: float, target: Point2,
                         rho: float, t_max: float, stream: RngStream,
                         h0: float = 8.0) -> float:
    """One replication: homes ~ PPP(lam), walkers from their homes, first
    detection of the target; inf when censored at t_max. Simulation grows
    by horizon doubling so easy replications stay cheap."""
    homes = sample_ppp(lam, model.dom, stream.child(0))
    if homes.shape[0] == 0:
        return math.inf
    horizon = min(h0, t_max)
    pairs = _simulate_walkers(model, homes, stream, horizon)
    while True:
        t = detect_static([p[1] for p in pairs], target, rho, t_max=horizon)
        if t is not None:
            return t
        if horizon >= t_max:
            return math.inf
        horizon = min(2.0 * horizon, t_max)
        _extend_walkers(pairs, model, horizon)


def coverage_rep(model: MobilityModel, lam: float, region: RectDomain,
                 r: float, eps: float, t_max: float, stream: RngStream,
                 h0: float = 32.0) -> float:
    """One replication of the coverage experiment; inf when censored."""
    homes = sample_ppp(lam, model.dom, stream.child(0))
    if homes.shape[0] == 0:
        return math.inf
    horizon = min(h0, t_max)
    pairs = _simulate_walkers(model, homes, stream, horizon)
    while True:
        t, _ = coverage_time([p[1] for p in pairs], region, r, eps,
                             t_max=horizon)
        if t is not None:
            return t
        if horizon >= t_max:
            return math.inf
        horizon = min(2.0 * horizon, t_max)
        _extend_walkers(pairs, model, horizon)


def mobile_detection_rep(model: MobilityModel, target_model: MobilityModel,
                         lam: float, rho: float, t_max: float,
                         stream: RngStream, h0: float = 8.0) -> float:
    """One replication with a mobile target walker started at the domain
    center; inf when censored at t_max."""
    dom = model.dom
    homes = sample_ppp(lam, dom, stream.child(0))
    if homes.shape[0] == 0:
        return math.inf
    t_stream = stream.child(0).child(0)
    t_state, t_traj = init_walker(target_model, Point2(*dom.center), t_stream)
    horizon = min(h0, t_max)
    advance_to(t_state, t_traj, target_model, t_stream, horizon)
    pairs = _simulate_walkers(model, homes, stream, horizon)
    while True:
        t = detect_mobile([p[1] for p in pairs], t_traj, rho, t_max=horizon)
        if t is not None:
            return t
        if horizon >= t_max:
            return math.inf
        horizon = min(2.0 * horizon, t_max)
        advance_to(t_state, t_traj, target_model, t_stream, horizon)
        _extend_walkers(pairs, model, horizon)
