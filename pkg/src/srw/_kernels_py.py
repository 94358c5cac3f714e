"""Vectorized reference implementations of the hot kernels.

Same contracts as the compiled extension; the import selector in
kernels.py picks whichever is available. Legs are float64 arrays of rows
(x0, y0, x1, y1, t0, t1) with motion at constant velocity inside each row.

All times returned are absolute; math.inf means "never".
"""

from __future__ import annotations

import math

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

_CHUNK = 512


def _leg_velocities(legs: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    dt = legs[:, 5] - legs[:, 4]
    safe = np.where(dt > 0.0, dt, 1.0)
    vx = np.where(dt > 0.0, (legs[:, 2] - legs[:, 0]) / safe, 0.0)
    vy = np.where(dt > 0.0, (legs[:, 3] - legs[:, 1]) / safe, 0.0)
    return vx, vy, dt


def _earliest_tau(a: np.ndarray, b: np.ndarray, c: np.ndarray,
                  hi: np.ndarray) -> np.ndarray:
    """Smallest tau in [0, hi] with a*tau^2 + b*tau + c <= 0, assuming c > 0.

    inf where there is none. Uses the citardauq form: with c > 0 the roots
    share a sign, are positive only when b < 0, and the smaller one is
    2c / (-b + sqrt(disc)), which stays stable when a is tiny.
    """
    disc = b * b - 4.0 * a * c
    ok = (a > 0.0) & (b < 0.0) & (disc >= 0.0)
    q = 0.5 * (-b + np.sqrt(np.where(ok, disc, 0.0)))
    tau = np.where(ok & (q > 0.0), c / np.where(q > 0.0, q, 1.0), np.inf)
    return np.where(tau <= hi, tau, np.inf)


def first_hit_static(legs: np.ndarray, cx: float, cy: float, rho: float) -> float:
    """Earliest absolute time any leg comes within rho of (cx, cy)."""
    if legs.shape[0] == 0:
        return math.inf
    vx, vy, dt = _leg_velocities(legs)
    dx = legs[:, 0] - cx
    dy = legs[:, 1] - cy
    c = dx * dx + dy * dy - rho * rho
    a = vx * vx + vy * vy
    b = 2.0 * (dx * vx + dy * vy)
    tau = np.where(c <= 0.0, 0.0, _earliest_tau(a, b, c, dt))
    hit = legs[:, 4] + tau
    return float(hit.min())


def first_hit_static_multi(legs: np.ndarray, centers: np.ndarray,
                           rho: float) -> np.ndarray:
    """Per-center earliest hit times. legs must be sorted by start time."""
    m = centers.shape[0]
    best = np.full(m, np.inf)
    if legs.shape[0] == 0 or m == 0:
        return best
    if np.any(np.diff(legs[:, 4]) < 0.0):
        raise ValueError("legs must be sorted by start time")
    idx = np.arange(m)
    for lo in range(0, legs.shape[0], _CHUNK):
        chunk = legs[lo:lo + _CHUNK]
        # a center whose best hit precedes every remaining start is settled
        live = best > chunk[0, 4]
        if not live.any():
            break
        cs = centers[live]
        vx, vy, dt = _leg_velocities(chunk)
        dx = chunk[:, None, 0] - cs[None, :, 0]
        dy = chunk[:, None, 1] - cs[None, :, 1]
        c = dx * dx + dy * dy - rho * rho
        a = (vx * vx + vy * vy)[:, None]
        b = 2.0 * (dx * vx[:, None] + dy * vy[:, None])
        tau = np.where(c <= 0.0, 0.0,
                       _earliest_tau(a, b, c, dt[:, None] * np.ones_like(c)))
        hit = (chunk[:, 4, None] + tau).min(axis=0)
        sel = idx[live]
        best[sel] = np.minimum(best[sel], hit)
    return best


def _interval_grid(legs_a: np.ndarray, legs_b: np.ndarray):
    start = max(legs_a[0, 4], legs_b[0, 4])
    end = min(legs_a[-1, 5], legs_b[-1, 5])
    if end < start:
        return None
    ts = np.union1d(legs_a[:, 4:6].ravel(), legs_b[:, 4:6].ravel())
    ts = ts[(ts >= start) & (ts <= end)]
    if ts.size == 0 or ts[0] > start:
        ts = np.concatenate([[start], ts])
    if ts[-1] < end:
        ts = np.concatenate([ts, [end]])
    return ts


def first_contact_two(legs_a: np.ndarray, legs_b: np.ndarray,
                      rho: float) -> float:
    """Earliest time two moving walkers are within rho of each other.

    Each legs array must be its walker's contiguous, time-sorted log;
    only the overlap of the two time spans is searched.
    """
    if legs_a.shape[0] == 0 or legs_b.shape[0] == 0:
        return math.inf
    ts = _interval_grid(legs_a, legs_b)
    if ts is None:
        return math.inf
    t_lo, t_hi = ts[:-1], ts[1:]
    if t_lo.size == 0:                      # spans touch at a single instant
        t_lo = t_hi = ts[:1]

    ia = np.clip(np.searchsorted(legs_a[:, 4], t_lo, side="right") - 1,
                 0, legs_a.shape[0] - 1)
    ib = np.clip(np.searchsorted(legs_b[:, 4], t_lo, side="right") - 1,
                 0, legs_b.shape[0] - 1)
    vax, vay, _ = _leg_velocities(legs_a)
    vbx, vby, _ = _leg_velocities(legs_b)
    la, lb = legs_a[ia], legs_b[ib]
    pax = la[:, 0] + (t_lo - la[:, 4]) * vax[ia]
    pay = la[:, 1] + (t_lo - la[:, 4]) * vay[ia]
    pbx = lb[:, 0] + (t_lo - lb[:, 4]) * vbx[ib]
    pby = lb[:, 1] + (t_lo - lb[:, 4]) * vby[ib]

    dx, dy = pax - pbx, pay - pby
    ux, uy = vax[ia] - vbx[ib], vay[ia] - vby[ib]
    c = dx * dx + dy * dy - rho * rho
    a = ux * ux + uy * uy
    b = 2.0 * (dx * ux + dy * uy)
    tau = np.where(c <= 0.0, 0.0, _earliest_tau(a, b, c, t_hi - t_lo))
    return float((t_lo + tau).min())


def pair_edges(pts: np.ndarray, radius: float, ax: float, ay: float,
               x0: float, y0: float, torus: bool) -> np.ndarray:
    """Index pairs (i < j) at distance <= radius; unordered rows."""
    n = pts.shape[0]
    if n < 2:
        return np.empty((0, 2), dtype=np.int64)
    if torus:
        box = (ax, ay)
        q = (pts - (x0, y0)) % box
        # boxsize trees want coordinates strictly inside the box
        q = np.minimum(q, np.nextafter(box, 0.0))
        tree = cKDTree(q, boxsize=box)
    else:
        tree = cKDTree(pts)
    pairs = tree.query_pairs(radius, output_type="ndarray")
    return pairs.astype(np.int64, copy=False)


def component_labels(n: int, edges: np.ndarray) -> np.ndarray:
    """Connected-component label per vertex; the label is the smallest
    vertex index inside the component."""
    if n == 0:
        return np.empty(0, dtype=np.int64)
    if edges.shape[0] == 0:
        return np.arange(n, dtype=np.int64)
    ones = np.ones(edges.shape[0], dtype=np.int8)
    g = coo_matrix((ones, (edges[:, 0], edges[:, 1])), shape=(n, n))
    _, raw = connected_components(g, directed=False)
    first = np.full(raw.max() + 1, n, dtype=np.int64)
    np.minimum.at(first, raw, np.arange(n, dtype=np.int64))
    return first[raw]
