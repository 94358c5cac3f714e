"""Geometric-graph percolation over walker snapshots.

A snapshot of walker positions is turned into the graph connecting points
within a fixed distance; percolation in the finite window is read off as a
component touching both opposite boundary strips. On top of that sit the
critical-intensity sweep and the home-thinning phase experiment, where
walkers far from home are deleted and the survivors are tested for
supercriticality at a reduced connection radius.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize
from scipy.special import expit

from . import kernels
from .config import MobilityConfig, ValidationError, with_overrides
from .geometry import Point2, RectDomain, distance
from .mobility import (ModelVariant, WalkerTrajectory, advance_to,
                       init_walker)
from .rng import RngStream
from .sampling import sample_ppp

_BALL_PAIR_MEAN = 128.0 / (45.0 * math.pi)   # mean distance, two uniform
_SQUARE_PAIR_MEAN = 0.5214054331647207       # points: unit disc / unit square


class RadiusUnderflow(ValueError):
    """The thinned-graph radius 2(r - R/2) is not positive."""


def thinned_connect_radius(r: float, R: float) -> float:
    """Connection distance of the graph on home-thinned walkers.

    Two retained walkers are adjacent when their homes-plus-excursions can
    communicate, i.e. within 2(r - R/2)."""
    radius = 2.0 * (r - R / 2.0)
    if radius <= 0.0:
        raise RadiusUnderflow(f"r={r} <= R/2={R / 2.0}, no thinned graph")
    return radius


def _as_points(points) -> np.ndarray:
    if isinstance(points, (list, tuple)) and points \
            and isinstance(points[0], Point2):
        return np.array([[q.x, q.y] for q in points], dtype=float)
    return np.asarray(points, dtype=float).reshape(-1, 2)


@dataclass(frozen=True)
class GilbertGraph:
    points: np.ndarray
    connect_radius: float
    dom: RectDomain
    edges: np.ndarray

    @property
    def n(self) -> int:
        return self.points.shape[0]


@dataclass(frozen=True)
class ClusterReport:
    labels: np.ndarray            # component id per point (min vertex index)
    sizes: np.ndarray             # component sizes, descending
    largest: int
    crossing_lr: bool
    crossing_tb: bool


def build_graph(points, connect_radius: float, dom: RectDomain) -> GilbertGraph:
    """Connect every pair of points within connect_radius (torus-aware)."""
    if connect_radius <= 0:
        raise ValueError("connect_radius must be positive")
    pts = _as_points(points)
    edges = kernels.pair_edges(pts, connect_radius, dom.a_x, dom.a_y,
                               dom.x0, dom.y0, torus=dom.torus)
    return GilbertGraph(pts, connect_radius, dom, edges)


def clusters(g: GilbertGraph) -> ClusterReport:
    """Union-find components plus window-crossing flags.

    A crossing exists when one component has points in both opposite
    boundary strips of width connect_radius."""
    labels = kernels.component_labels(g.n, g.edges)
    if g.n == 0:
        return ClusterReport(labels, np.empty(0, dtype=np.int64), 0, False, False)
    sizes = np.sort(np.bincount(labels, minlength=0)[np.unique(labels)])[::-1]
    w = g.connect_radius
    x, y = g.points[:, 0], g.points[:, 1]
    lo_x = labels[x <= g.dom.x0 + w]
    hi_x = labels[x >= g.dom.x0 + g.dom.a_x - w]
    lo_y = labels[y <= g.dom.y0 + w]
    hi_y = labels[y >= g.dom.y0 + g.dom.a_y - w]
    crossing_lr = bool(np.intersect1d(lo_x, hi_x).size)
    crossing_tb = bool(np.intersect1d(lo_y, hi_y).size)
    return ClusterReport(labels, sizes, int(sizes[0]), crossing_lr, crossing_tb)


# ---------------------------------------------------------------------------
# critical intensity


def _fit_logistic_midpoint(lams: np.ndarray, hits: np.ndarray,
                           reps: int) -> float:
    """Binomial MLE of a logistic crossing curve; returns its midpoint."""
    span = lams[-1] - lams[0]

    def nll(theta):
        m, log_s = theta
        p = expit((lams - m) / math.exp(log_s))
        p = np.clip(p, 1e-9, 1 - 1e-9)
        return -float(np.sum(hits * np.log(p) + (reps - hits) * np.log1p(-p)))

    # crude initial midpoint: first lambda with majority crossing
    above = np.nonzero(hits >= reps / 2)[0]
    m0 = lams[above[0]] if above.size else lams[-1]
    best = minimize(nll, x0=np.array([m0, math.log(max(span / 10, 1e-3))]),
                    method="Nelder-Mead",
                    options={"maxiter": 4000, "xatol": 1e-6, "fatol": 1e-9})
    mid = float(best.x[0])
    return min(max(mid, lams[0] - span), lams[-1] + span)


def estimate_lambda_c(connect_radius: float, a: float, lambda_grid, reps: int,
                      rng: RngStream) -> tuple[float, np.ndarray]:
    """Crossing probability per intensity and the logistic-fit midpoint.

    Points are fresh Poisson samples on [0, a]^2 per replication; crossing
    means a left-right spanning component."""
    lams = np.asarray(lambda_grid, dtype=float)
    if lams.size < 2 or np.any(np.diff(lams) <= 0):
        raise ValueError("lambda_grid must be increasing with >= 2 entries")
    if reps < 1:
        raise ValueError("reps must be >= 1")
    dom = RectDomain(a, a)
    hits = np.zeros(lams.size, dtype=np.int64)
    for li, lam in enumerate(lams):
        stream = rng.child(li)
        for k in range(reps):
            pts = sample_ppp(float(lam), dom, stream.child(k))
            rep = clusters(build_graph(pts, connect_radius, dom))
            hits[li] += rep.crossing_lr
    curve = hits / reps
    return _fit_logistic_midpoint(lams, hits, reps), curve


# ---------------------------------------------------------------------------
# the home-thinning phase experiment


def near_home_thinning(walkers: list[WalkerTrajectory], s: float,
                       R: float) -> np.ndarray:
    """Positions at time s of walkers whose recent travel stayed near home.

    A walker is retained when its two most recently completed waypoints
    strictly before the leg in progress at s (waypoints M(s)-1 and M(s)-2)
    both lie within R of its home. Judging by those embedded waypoints
    rather than the leg covering s avoids the length bias of the covering
    leg: long excursions are exactly the legs most likely to contain any
    fixed time instant. Walkers with fewer than three completed waypoints
    are dropped so the start-at-home waypoint never takes part.
    """
    kept = []
    for traj in walkers:
        m = traj.waypoint_count(s)
        if m < 3:
            continue
        home = traj.home
        near = True
        for k in (m - 1, m - 2):
            wx, wy = traj.waypoint(k)
            if distance(Point2(wx, wy), home, traj.dom) > R:
                near = False
                break
        if near:
            p = traj.position_at(s)
            kept.append((p.x, p.y))
    return np.asarray(kept, dtype=float).reshape(-1, 2)


@dataclass
class PhaseResult:
    """Per-p aggregates of the thinning experiment plus raw CSV rows."""

    p_grid: np.ndarray
    crossing_thinned: np.ndarray     # fraction of reps with lr crossing
    crossing_full: np.ndarray
    retained: np.ndarray             # total retained walkers per p
    walkers: np.ndarray              # total walkers per p
    thinned_radius: float | None     # None when r <= R/2 (comparison skipped)
    rows: list = field(default_factory=list)
    snapshots: dict = field(default_factory=dict)

    def retained_fraction(self, i: int) -> float:
        return self.retained[i] / max(self.walkers[i], 1)


def _mean_leg_seconds(cfg: MobilityConfig, p: float) -> float:
    """Rough expected leg duration of the interpolation model, used only to
    schedule the snapshot time. A leg is short only when both endpoints are
    near-home waypoints, which happens with probability (1-p)^2; any far
    endpoint makes the length domain-scale."""
    near = _BALL_PAIR_MEAN * cfg.R
    far = _SQUARE_PAIR_MEAN * math.sqrt(cfg.a_x * cfg.a_y)
    vel = cfg.velocity_measure()
    lo, hi = vel.v_min, vel.v_max
    inv_v = 1.0 / lo if hi <= lo else (math.log(hi) - math.log(lo)) / (hi - lo)
    w_near = (1.0 - p) ** 2
    return (w_near * near + (1.0 - w_near) * far) * inv_v


def phase_experiment(cfg: MobilityConfig, p_grid, reps: int, rng: RngStream,
                     trips_to_snapshot: float = 40.0,
                     keep_snapshots_for: tuple = ()) -> PhaseResult:
    """Crossing probability of the thinned and full snapshot graphs per p.

    Homes are Poisson of the configured intensity; each replication runs
    the interpolation walkers to a snapshot time of about trips_to_snapshot
    mean trips, applies near-home thinning at radius R, and reports window
    crossings of the thinned graph (radius 2(r - R/2)) and the full
    snapshot graph (radius 2r).
    """
    if ModelVariant(cfg.variant) is not ModelVariant.INTERPOLATION:
        raise ValidationError("variant", "phase experiment needs interpolation")
    ps = np.asarray(p_grid, dtype=float)
    try:
        thinned_radius = thinned_connect_radius(cfg.r, cfg.R)
        skip_thinned = False
    except RadiusUnderflow:
        thinned_radius = 0.0       # comparison skipped, recorded as None
        skip_thinned = True
    dom = cfg.domain()
    full_radius = 2.0 * cfg.r

    crossing_thin = np.zeros(ps.size)
    crossing_full = np.zeros(ps.size)
    retained = np.zeros(ps.size, dtype=np.int64)
    walkers_total = np.zeros(ps.size, dtype=np.int64)
    rows = []
    snapshots: dict[float, list] = {float(p): [] for p in keep_snapshots_for}

    for pi, p in enumerate(ps):
        cfg_p = with_overrides(cfg, p=float(p))
        model = cfg_p.build_model()
        s_time = trips_to_snapshot * _mean_leg_seconds(cfg, float(p))
        p_stream = rng.child(pi)
        for k in range(reps):
            stream = p_stream.child(k)
            homes = sample_ppp(cfg.intensity, dom, stream.child(0))
            trajs = []
            for i, (hx, hy) in enumerate(homes):
                st = stream.child(i + 1)
                state, traj = init_walker(model, Point2(float(hx), float(hy)), st)
                advance_to(state, traj, model, st, s_time)
                trajs.append(traj)
            snapshot = np.array([[pt.x, pt.y] for pt in
                                 (t.position_at(s_time) for t in trajs)]) \
                .reshape(-1, 2)
            rep_full = clusters(build_graph(snapshot, full_radius, dom)) \
                if snapshot.shape[0] else None
            if rep_full is not None:
                crossing_full[pi] += rep_full.crossing_lr
            thin_pts = near_home_thinning(trajs, s_time, cfg.R)
            retained[pi] += thin_pts.shape[0]
            walkers_total[pi] += len(trajs)
            rep_thin = None
            if not skip_thinned and thin_pts.shape[0]:
                rep_thin = clusters(build_graph(thin_pts, thinned_radius, dom))
                crossing_thin[pi] += rep_thin.crossing_lr
            rows.append({
                "replication": k,
                "lambda": cfg.intensity,
                "p": float(p),
                "points": thin_pts.shape[0],
                "largest": rep_thin.largest if rep_thin else 0,
                "crossing_lr": int(rep_thin.crossing_lr) if rep_thin else 0,
                "crossing_tb": int(rep_thin.crossing_tb) if rep_thin else 0,
            })
            if float(p) in snapshots:
                snapshots[float(p)].append(snapshot)
    return PhaseResult(ps, crossing_thin / reps, crossing_full / reps,
                       retained, walkers_total,
                       None if skip_thinned else thinned_radius,
                       rows, snapshots)


def border_center_densities(snapshot, a: float, stripe: float,
                            core_half: float) -> tuple[float, float]:
    """Empirical intensities in the boundary frame of the given width and
    in the central square of the given half-width."""
    pts = np.asarray(snapshot, dtype=float).reshape(-1, 2)
    if stripe <= 0 or core_half <= 0:
        raise ValueError("stripe and core_half must be positive")
    x, y = pts[:, 0], pts[:, 1]
    inner = a - 2.0 * stripe
    border_area = a * a - max(inner, 0.0) ** 2
    in_border = (x <= stripe) | (x >= a - stripe) | (y <= stripe) | (y >= a - stripe)
    half = min(core_half, a / 2.0)
    lo, hi = a / 2.0 - half, a / 2.0 + half
    in_core = (x >= lo) & (x <= hi) & (y >= lo) & (y <= hi)
    core_area = (2.0 * half) ** 2
    return (float(np.count_nonzero(in_border) / border_area),
            float(np.count_nonzero(in_core) / core_area))


def displaced_homogeneity_check(homes, displacement, dom: RectDomain,
                                rng: RngStream, cells: int = 4) -> float:
    """Chi-square statistic of cell counts after displacing each point.

    Works on a torus (so displacement cannot push mass out of the window);
    the statistic is the usual multinomial chi-square against equal cell
    probabilities, df = cells^2 - 1. displacement=None keeps points as-is.
    """
    if not dom.torus:
        raise ValueError("homogeneity check requires a torus domain")
    pts = np.asarray(homes, dtype=float).reshape(-1, 2)
    n = pts.shape[0]
    if n == 0:
        return 0.0
    if displacement is not None:
        moved = np.empty_like(pts)
        for i, (hx, hy) in enumerate(pts):
            moved[i] = displacement.sample(Point2(float(hx), float(hy)), dom, rng)
        pts = moved
    # wrap defensively: a displacement measure may hand back unwrapped points
    fx = ((pts[:, 0] - dom.x0) % dom.a_x) / dom.a_x
    fy = ((pts[:, 1] - dom.y0) % dom.a_y) / dom.a_y
    ix = np.clip((fx * cells).astype(int), 0, cells - 1)
    iy = np.clip((fy * cells).astype(int), 0, cells - 1)
    counts = np.bincount(ix * cells + iy, minlength=cells * cells)
    expected = n / (cells * cells)
    return float(np.sum((counts - expected) ** 2 / expected))
