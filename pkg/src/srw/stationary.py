"""Long-run behavior: stationary position sampling, Palm-ratio estimation,
mean trip duration, and the polynomial density of the classical model.

Position snapshots are taken after a burn-in and spaced at least one
domain-crossing time apart, which is the cheap decorrelation device used
throughout: after diam(D)/v_minus every walker has finished at least one
leg. Occupation times are integrated per leg on a fixed fractional grid
with bisection refinement at indicator sign changes, so arbitrary region
predicates are supported without time-stepping the whole trajectory.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import MobilityConfig
from .geometry import RectDomain, Point2
from .mobility import advance_to, init_walker, next_leg
from .rng import RngStream

_OCC_GRID = 33          # fractional grid points per leg
_OCC_BISECT = 40        # bisection steps per boundary crossing


@dataclass(frozen=True)
class SpatialHistogram:
    """Counts of points over an n_x by n_y grid on a rectangle."""

    dom: RectDomain
    nx: int
    ny: int
    counts: np.ndarray

    def __post_init__(self):
        if self.counts.shape != (self.nx, self.ny):
            raise ValueError("counts shape must match the grid")

    @classmethod
    def from_points(cls, points, dom: RectDomain, nx: int, ny: int) -> "SpatialHistogram":
        pts = np.asarray(points, dtype=float).reshape(-1, 2)
        ix = np.clip(((pts[:, 0] - dom.x0) / dom.a_x * nx).astype(int), 0, nx - 1)
        iy = np.clip(((pts[:, 1] - dom.y0) / dom.a_y * ny).astype(int), 0, ny - 1)
        counts = np.zeros((nx, ny), dtype=np.int64)
        np.add.at(counts, (ix, iy), 1)
        return cls(dom, nx, ny, counts)

    def __add__(self, other: "SpatialHistogram") -> "SpatialHistogram":
        if (self.nx, self.ny) != (other.nx, other.ny) or self.dom != other.dom:
            raise ValueError("histograms live on different grids")
        return SpatialHistogram(self.dom, self.nx, self.ny,
                                self.counts + other.counts)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def bin_area(self) -> float:
        return self.dom.area / (self.nx * self.ny)

    def bin_centers(self) -> tuple[np.ndarray, np.ndarray]:
        xs = self.dom.x0 + (np.arange(self.nx) + 0.5) * (self.dom.a_x / self.nx)
        ys = self.dom.y0 + (np.arange(self.ny) + 0.5) * (self.dom.a_y / self.ny)
        return np.meshgrid(xs, ys, indexing="ij")

    def write_csv(self, fh, density=None) -> None:
        fh.write("bin_x,bin_y,count,expected\n")
        if density is not None:
            cx, cy = self.bin_centers()
            expected = np.asarray(density(cx, cy), dtype=float) \
                * self.bin_area * self.total
        for i in range(self.nx):
            for j in range(self.ny):
                tail = "" if density is None else f"{expected[i, j]:.10g}"
                fh.write(f"{i},{j},{self.counts[i, j]},{tail}\n")


def default_burn_in(cfg: MobilityConfig) -> float:
    model = cfg.build_model()
    return 50.0 * model.dom.diameter / model.v_min


def default_sample_times(cfg: MobilityConfig, n: int) -> np.ndarray:
    model = cfg.build_model()
    spacing = model.dom.diameter / model.v_min
    return spacing * np.arange(n, dtype=float)


def stationary_positions(cfg: MobilityConfig, n_walkers: int, burn_in: float,
                         sample_times, rng: RngStream) -> np.ndarray:
    """Walker positions at burn_in + each sample time.

    Returns an array of shape (len(sample_times), n_walkers, 2). Walkers
    start at independently uniform homes per the initialization rule; the
    sample times must be spaced at least one crossing time diam/v_minus
    apart so successive snapshots are effectively decorrelated.
    """
    if burn_in <= 0:
        raise ValueError("burn_in must be positive")
    ts = np.asarray(sample_times, dtype=float)
    model = cfg.build_model()
    spacing = model.dom.diameter / model.v_min
    if ts.size > 1 and np.any(np.diff(ts) < spacing - 1e-9):
        raise ValueError(f"sample times must be at least {spacing:.6g} apart")
    out = np.empty((ts.size, n_walkers, 2))
    if n_walkers == 0 or ts.size == 0:
        return out
    abs_times = burn_in + ts
    horizon = float(abs_times.max())
    dom = model.dom
    for i in range(n_walkers):
        st = rng.child(i)
        home = Point2(dom.x0 + dom.a_x * st.u(), dom.y0 + dom.a_y * st.u())
        state, traj = init_walker(model, home, st)
        advance_to(state, traj, model, st, horizon)
        out[:, i, :] = traj.positions_at(abs_times)
    return out


# ---------------------------------------------------------------------------
# per-leg occupation of an arbitrary region predicate


def _legs_occupation(legs: np.ndarray, indicator) -> np.ndarray:
    """Time each leg spends where indicator(x, y) is true.

    Fixed fractional grid per leg plus bisection at sign changes; exact up
    to features of the region smaller than duration/(_OCC_GRID-1)."""
    n = legs.shape[0]
    if n == 0:
        return np.empty(0)
    u = np.linspace(0.0, 1.0, _OCC_GRID)
    px = legs[:, 0, None] + u[None, :] * (legs[:, 2] - legs[:, 0])[:, None]
    py = legs[:, 1, None] + u[None, :] * (legs[:, 3] - legs[:, 1])[:, None]
    flags = np.asarray(indicator(px, py), dtype=bool)
    du = u[1] - u[0]
    # cells where both ends are inside count fully
    both = flags[:, :-1] & flags[:, 1:]
    frac = both.sum(axis=1) * du
    # cells with a crossing: locate it by bisection, vectorized over cells
    change = flags[:, :-1] != flags[:, 1:]
    leg_idx, cell_idx = np.nonzero(change)
    if leg_idx.size:
        lo = u[cell_idx]
        hi = u[cell_idx + 1]
        left = flags[leg_idx, cell_idx]
        x0 = legs[leg_idx, 0]
        dx = legs[leg_idx, 2] - x0
        y0 = legs[leg_idx, 1]
        dy = legs[leg_idx, 3] - y0
        for _ in range(_OCC_BISECT):
            mid = 0.5 * (lo + hi)
            fm = np.asarray(indicator(x0 + mid * dx, y0 + mid * dy), dtype=bool)
            same = fm == left
            lo = np.where(same, mid, lo)
            hi = np.where(same, hi, mid)
        cross = 0.5 * (lo + hi)
        # inside part of a crossed cell: [u_lo, cross] if entering false,
        # [cross, u_hi] if entering true
        inside_part = np.where(left, cross - u[cell_idx], u[cell_idx + 1] - cross)
        np.add.at(frac, leg_idx, inside_part)
    return frac * (legs[:, 5] - legs[:, 4])


def _chain_legs(cfg: MobilityConfig, n_trips: int, rng: RngStream,
                burn_in_legs: int = 100) -> np.ndarray:
    """Simulate one walker and return n_trips post-burn-in legs."""
    model = cfg.build_model()
    dom = model.dom
    home = Point2(dom.x0 + dom.a_x * rng.u(), dom.y0 + dom.a_y * rng.u())
    state, traj = init_walker(model, home, rng)
    for _ in range(burn_in_legs):
        next_leg(state, traj, model, rng)
    traj.prune_before(state.t0)
    collected = []
    remaining = n_trips
    while remaining > 0:
        batch = min(remaining, 50_000)
        for _ in range(batch):
            next_leg(state, traj, model, rng)
        legs = traj.legs_array()
        collected.append(legs[-batch:])
        traj.prune_before(state.t0)
        remaining -= batch
    return np.vstack(collected)


def palm_ratio_estimate(cfg: MobilityConfig, indicator, n_trips: int,
                        rng: RngStream) -> float:
    """Stationary probability of the region as mean per-trip occupation
    over mean trip duration, sampled from the embedded chain."""
    if n_trips < 1:
        raise ValueError("n_trips must be >= 1")
    legs = _chain_legs(cfg, n_trips, rng)
    occ = _legs_occupation(legs, indicator)
    durations = legs[:, 5] - legs[:, 4]
    return float(occ.mean() / durations.mean())


def time_average_occupation(cfg: MobilityConfig, indicator, horizon: float,
                            rng: RngStream, burn_in: float | None = None) -> float:
    """Fraction of [burn_in, burn_in + horizon] spent inside the region;
    the direct time-integral counterpart of palm_ratio_estimate."""
    model = cfg.build_model()
    dom = model.dom
    if burn_in is None:
        burn_in = 50.0 * dom.diameter / model.v_min
    home = Point2(dom.x0 + dom.a_x * rng.u(), dom.y0 + dom.a_y * rng.u())
    state, traj = init_walker(model, home, rng)
    end = burn_in + horizon
    advance_to(state, traj, model, rng, end)
    legs = traj.legs_array()
    # clip legs to the averaging window
    t0 = np.maximum(legs[:, 4], burn_in)
    t1 = np.minimum(legs[:, 5], end)
    keep = t1 > t0
    legs = legs[keep]
    dt_full = legs[:, 5] - legs[:, 4]
    safe = np.where(dt_full > 0, dt_full, 1.0)
    u0 = (t0[keep] - legs[:, 4]) / safe
    u1 = (t1[keep] - legs[:, 4]) / safe
    clipped = legs.copy()
    clipped[:, 0] = legs[:, 0] + u0 * (legs[:, 2] - legs[:, 0])
    clipped[:, 1] = legs[:, 1] + u0 * (legs[:, 3] - legs[:, 1])
    clipped[:, 2] = legs[:, 0] + u1 * (legs[:, 2] - legs[:, 0])
    clipped[:, 3] = legs[:, 1] + u1 * (legs[:, 3] - legs[:, 1])
    clipped[:, 4] = t0[keep]
    clipped[:, 5] = t1[keep]
    occ = _legs_occupation(clipped, indicator)
    return float(occ.sum() / horizon)


def mean_leg_duration(cfg: MobilityConfig, n_trips: int,
                      rng: RngStream) -> tuple[float, float]:
    """Monte Carlo mean trip duration with its standard error."""
    if n_trips < 1:
        raise ValueError("n_trips must be >= 1")
    legs = _chain_legs(cfg, n_trips, rng)
    durations = legs[:, 5] - legs[:, 4]
    mean = float(durations.mean())
    se = float(durations.std(ddof=1) / math.sqrt(n_trips)) if n_trips > 1 else math.inf
    return mean, se


# ---------------------------------------------------------------------------
# classical-model position density


def rwp_density(x, y, a: float):
    """Polynomial approximation of the classical random-waypoint stationary
    position density on [0, a]^2; integrates to one, peaks 9/(4 a^2)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    val = 36.0 / a ** 6 * (x * x - a * x) * (y * y - a * y)
    return val if val.shape else float(val)


def density_distance(hist: SpatialHistogram, f) -> float:
    """Total-variation distance between the histogram's empirical mass and
    the bin masses of density f (midpoint rule per bin)."""
    if hist.total <= 0:
        raise ValueError("histogram is empty")
    cx, cy = hist.bin_centers()
    expected = np.asarray(f(cx, cy), dtype=float) * hist.bin_area
    emp = hist.counts / hist.total
    return float(0.5 * np.abs(emp - expected).sum())
