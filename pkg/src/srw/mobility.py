"""Walker dynamics: random waypoint motion with home-return variants.

A walker lives at a home site, picks waypoints from a measure, travels in
straight legs at a speed drawn per leg, and (depending on the variant)
carries an alarm clock that forces a trip back home when it rings:

* ``srw_carryover``   the remaining alarm ticks down across legs; when a leg
  ends with the alarm expired the next waypoint is the home, and a fresh
  alarm is set to ring after the new alarm duration plus the trip home.
* ``srw_reset``       a fresh alarm is drawn at every waypoint and compared
  against the duration of the leg just finished.
* ``interpolation``   no alarm; each waypoint is a long trip (uniform on the
  domain minus the ball of radius ``home_radius`` around home) with
  probability ``long_trip_prob``, otherwise uniform inside that ball.
* ``classical_rwp``   plain random waypoint, never returns home.

Walkers start at their home at time zero.

Draw order per leg is fixed and documented so that runs are reproducible
stream-for-stream: carryover/classical draw (waypoint, speed) and, on a
forced home trip, (speed, alarm); reset draws (alarm, waypoint?, speed);
interpolation draws (trip coin, waypoint, speed).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .geometry import Point2, RectDomain
from .rng import RngStream
from .sampling import (AlarmMeasure, AnnulusUniform, BallUniform,
                       VelocityMeasure, WaypointMeasure)

FLAG_WAYPOINT = "W"
FLAG_HOME = "H"


class HorizonExceeded(ValueError):
    """Query time outside the simulated (or retained) part of a trajectory."""


class ModelVariant(str, Enum):
    CARRYOVER = "srw_carryover"
    RESET = "srw_reset"
    INTERPOLATION = "interpolation"
    CLASSICAL = "classical_rwp"


@dataclass(frozen=True)
class MobilityModel:
    """Everything next_leg needs to know, independent of any one walker."""

    variant: ModelVariant
    dom: RectDomain
    waypoints: WaypointMeasure
    velocity: VelocityMeasure
    alarm: AlarmMeasure | None = None
    long_trip_prob: float = 0.0
    home_radius: float = 0.0

    def __post_init__(self):
        if self.variant in (ModelVariant.CARRYOVER, ModelVariant.RESET) and self.alarm is None:
            raise ValueError(f"{self.variant.value} requires an alarm measure")
        if self.variant is ModelVariant.INTERPOLATION:
            if not 0.0 <= self.long_trip_prob <= 1.0:
                raise ValueError("long_trip_prob must lie in [0, 1]")
            if self.home_radius <= 0.0:
                raise ValueError("interpolation requires a positive home_radius")

    @property
    def v_min(self) -> float:
        return self.velocity.v_min

    def near_measure(self) -> WaypointMeasure:
        return BallUniform(self.home_radius)

    def far_measure(self) -> WaypointMeasure:
        return AnnulusUniform(self.home_radius)


@dataclass(slots=True)
class WalkerState:
    """Current leg of one walker plus the alarm bookkeeping.

    The leg runs from (x0, y0) at t0 to (x1, y1) at t1. On a torus the
    endpoint is unwrapped (the straight line may leave the box); wrapping
    happens when positions are read out. alarm_rem is the remaining alarm
    attached to the current leg; +inf when the variant keeps no alarm.
    """

    home: Point2
    x0: float
    y0: float
    x1: float
    y1: float
    t0: float
    t1: float
    speed: float
    alarm_rem: float
    leg_index: int
    going_home: bool

    def copy(self) -> "WalkerState":
        return WalkerState(self.home, self.x0, self.y0, self.x1, self.y1,
                           self.t0, self.t1, self.speed, self.alarm_rem,
                           self.leg_index, self.going_home)


class WalkerTrajectory:
    """Append-only log of reached waypoints with torus-aware interpolation."""

    __slots__ = ("home", "dom", "_vmin_over_diam", "_wt", "_wx", "_wy",
                 "_ex", "_ey", "_speed", "_flag", "_n_pruned", "_t_pruned",
                 "_cache")

    def __init__(self, home: Point2, dom: RectDomain, v_min: float):
        self.home = home
        self.dom = dom
        self._vmin_over_diam = v_min / dom.diameter
        self._wt = [0.0]
        self._wx = [home.x]
        self._wy = [home.y]
        self._ex: list[float] = []   # unwrapped leg endpoints
        self._ey: list[float] = []
        self._speed: list[float] = []
        self._flag = [FLAG_HOME]
        self._n_pruned = 0
        self._t_pruned = 0.0
        self._cache: dict | None = None

    # -- building ----------------------------------------------------------

    def append_leg(self, ex: float, ey: float, t_end: float, speed: float,
                   flag: str) -> None:
        if t_end < self._wt[-1]:
            raise ValueError("legs must advance time")
        wx, wy = (self.dom.wrap(ex, ey) if self.dom.torus else (ex, ey))
        self._wt.append(t_end)
        self._wx.append(wx)
        self._wy.append(wy)
        self._ex.append(ex)
        self._ey.append(ey)
        self._speed.append(speed)
        self._flag.append(flag)
        self._cache = None

    def prune_before(self, t: float) -> None:
        """Drop legs that end strictly before t; queries older than the cut
        raise HorizonExceeded afterwards."""
        times = self.times
        k = int(np.searchsorted(times, t, side="right")) - 1
        if k <= 0:
            return
        del self._wt[:k], self._wx[:k], self._wy[:k], self._flag[:k]
        del self._ex[:k], self._ey[:k], self._speed[:k]
        self._n_pruned += k
        self._t_pruned = self._wt[0]
        self._cache = None

    # -- views --------------------------------------------------------------

    def _arrays(self) -> dict:
        if self._cache is None:
            self._cache = {
                "t": np.asarray(self._wt),
                "wx": np.asarray(self._wx),
                "wy": np.asarray(self._wy),
                "ex": np.asarray(self._ex),
                "ey": np.asarray(self._ey),
            }
        return self._cache

    @property
    def times(self) -> np.ndarray:
        return self._arrays()["t"]

    @property
    def horizon(self) -> float:
        return self._wt[-1]

    @property
    def n_legs(self) -> int:
        return len(self._ex)

    @property
    def last_waypoint(self) -> tuple[float, float]:
        return self._wx[-1], self._wy[-1]

    def waypoint(self, k: int) -> tuple[float, float]:
        """Waypoint k in absolute numbering (0 = the start at home), wrapped
        coordinates; raises if k was pruned away or not yet reached."""
        local = k - self._n_pruned
        if local < 0 or local >= len(self._wx):
            raise HorizonExceeded(f"waypoint {k} not retained")
        return self._wx[local], self._wy[local]

    @property
    def total_legs(self) -> int:
        return len(self._ex) + self._n_pruned

    def waypoints(self) -> np.ndarray:
        a = self._arrays()
        return np.column_stack([a["wx"], a["wy"]])

    def flags(self) -> list[str]:
        return list(self._flag)

    def speeds(self) -> np.ndarray:
        return np.asarray(self._speed)

    def legs_array(self) -> np.ndarray:
        """Legs as rows (x0, y0, x1, y1, t0, t1), endpoints unwrapped."""
        a = self._arrays()
        return np.column_stack([a["wx"][:-1], a["wy"][:-1], a["ex"], a["ey"],
                                a["t"][:-1], a["t"][1:]])

    # -- queries -------------------------------------------------------------

    def positions_at(self, ts: np.ndarray) -> np.ndarray:
        ts = np.asarray(ts, dtype=float)
        a = self._arrays()
        t = a["t"]
        if ts.size and (ts.min() < self._t_pruned or ts.max() > t[-1]):
            raise HorizonExceeded(
                f"queries outside retained range [{self._t_pruned}, {t[-1]}]")
        k = np.clip(np.searchsorted(t, ts, side="left"), 1, len(t) - 1)
        dt = t[k] - t[k - 1]
        u = np.where(dt > 0, (ts - t[k - 1]) / np.where(dt > 0, dt, 1.0), 1.0)
        px = a["wx"][k - 1] + u * (a["ex"][k - 1] - a["wx"][k - 1])
        py = a["wy"][k - 1] + u * (a["ey"][k - 1] - a["wy"][k - 1])
        if self.dom.torus:
            px = self.dom.x0 + (px - self.dom.x0) % self.dom.a_x
            py = self.dom.y0 + (py - self.dom.y0) % self.dom.a_y
        return np.column_stack([px, py])

    def position_at(self, t: float) -> Point2:
        p = self.positions_at(np.array([t]))
        return Point2(float(p[0, 0]), float(p[0, 1]))

    def waypoint_count(self, t: float) -> int:
        """M(t): waypoints reached by time t (the start home not counted).

        Hard-checks the kinematic lower bound floor(t * v_min / diam): every
        trip takes at most diam/v_min, so at least that many arrivals fit.
        """
        if t < self._t_pruned or t > self.horizon:
            raise HorizonExceeded(f"t={t} outside retained range")
        m = int(np.searchsorted(self.times, t, side="right")) - 1 + self._n_pruned
        lower = math.floor(t * self._vmin_over_diam + 1e-12)
        if m < lower:
            raise AssertionError(
                f"waypoint count {m} below kinematic lower bound {lower} at t={t}")
        return m

    def homecoming_times(self) -> np.ndarray:
        ts = [self._wt[k] for k in range(1, len(self._wt))
              if self._flag[k] == FLAG_HOME]
        return np.asarray(ts)


# ---------------------------------------------------------------------------
# leg construction


def _travel(model: MobilityModel, fx: float, fy: float, tx: float, ty: float):
    """Displacement actually travelled from (fx, fy) toward waypoint (tx, ty):
    min-image on a torus, direct otherwise. Returns (dx, dy, length)."""
    dx, dy = tx - fx, ty - fy
    if model.dom.torus:
        dx, dy = model.dom.min_image(dx, dy)
    return dx, dy, math.hypot(dx, dy)


def init_walker(model: MobilityModel, home: Point2,
                rng: RngStream) -> tuple[WalkerState, WalkerTrajectory]:
    """Place the walker at home at t=0 and draw its first leg.

    For the alarm variants the first alarm is set to ring only after the
    first trip is over (remaining = alarm draw + first trip duration), so a
    walker never turns straight around at its first waypoint because of an
    alarm that rang while it was still leaving.
    """
    traj = WalkerTrajectory(home, model.dom, model.v_min)
    variant = model.variant

    if variant is ModelVariant.INTERPOLATION:
        long_trip = rng.u() < model.long_trip_prob
        mu = model.far_measure() if long_trip else model.near_measure()
        tx, ty = mu.sample(home, model.dom, rng)
    else:
        tx, ty = model.waypoints.sample(home, model.dom, rng)
    v = model.velocity.sample(rng)
    dx, dy, d = _travel(model, home.x, home.y, tx, ty)
    s1 = d / v

    if variant is ModelVariant.CARRYOVER:
        alarm_rem = model.alarm.sample(rng) + s1
    elif variant is ModelVariant.RESET:
        alarm_rem = math.inf   # fresh draw happens at every arrival
    else:
        alarm_rem = math.inf

    state = WalkerState(home=home, x0=home.x, y0=home.y,
                        x1=home.x + dx, y1=home.y + dy,
                        t0=0.0, t1=s1, speed=v, alarm_rem=alarm_rem,
                        leg_index=1, going_home=False)
    traj.append_leg(state.x1, state.y1, state.t1, v, FLAG_WAYPOINT)
    return state, traj


def next_leg(state: WalkerState, traj: WalkerTrajectory, model: MobilityModel,
             rng: RngStream) -> None:
    """Advance the walker by one leg, mutating state and trajectory."""
    s_n = state.t1 - state.t0
    fx, fy = (state.x1, state.y1) if not model.dom.torus else traj.last_waypoint
    home = state.home
    variant = model.variant
    going_home = False
    alarm_rem = state.alarm_rem

    if variant is ModelVariant.CARRYOVER:
        if alarm_rem - s_n <= 0.0:
            going_home = True
            v = model.velocity.sample(rng)
            _, _, d = _travel(model, fx, fy, home.x, home.y)
            alarm_rem = model.alarm.sample(rng) + d / v
            tx, ty = home.x, home.y
        else:
            alarm_rem -= s_n
            tx, ty = model.waypoints.sample(home, model.dom, rng)
            v = model.velocity.sample(rng)
    elif variant is ModelVariant.RESET:
        fresh = model.alarm.sample(rng)
        if fresh <= s_n:
            going_home = True
            tx, ty = home.x, home.y
        else:
            tx, ty = model.waypoints.sample(home, model.dom, rng)
        v = model.velocity.sample(rng)
        alarm_rem = math.inf
    elif variant is ModelVariant.CLASSICAL:
        tx, ty = model.waypoints.sample(home, model.dom, rng)
        v = model.velocity.sample(rng)
        alarm_rem = math.inf
    else:  # interpolation
        long_trip = rng.u() < model.long_trip_prob
        mu = model.far_measure() if long_trip else model.near_measure()
        tx, ty = mu.sample(home, model.dom, rng)
        v = model.velocity.sample(rng)
        alarm_rem = math.inf

    dx, dy, d = _travel(model, fx, fy, tx, ty)
    state.x0, state.y0 = fx, fy
    state.x1, state.y1 = fx + dx, fy + dy
    state.t0 = state.t1
    state.t1 = state.t0 + d / v
    state.speed = v
    state.alarm_rem = alarm_rem
    state.leg_index += 1
    state.going_home = going_home
    traj.append_leg(state.x1, state.y1, state.t1, v,
                    FLAG_HOME if going_home else FLAG_WAYPOINT)


def advance_to(state: WalkerState, traj: WalkerTrajectory, model: MobilityModel,
               rng: RngStream, t_target: float) -> None:
    """Extend the trajectory until it strictly covers t_target."""
    guard = 0
    while traj.horizon <= t_target:
        next_leg(state, traj, model, rng)
        guard += 1
        if guard > 50_000_000:
            raise RuntimeError("advance_to is not making progress")


# module-level wrappers matching the functional surface


def position_at(traj: WalkerTrajectory, t: float) -> Point2:
    return traj.position_at(t)


def waypoint_count(traj: WalkerTrajectory, t: float) -> int:
    return traj.waypoint_count(t)


def homecoming_times(traj: WalkerTrajectory) -> np.ndarray:
    return traj.homecoming_times()
