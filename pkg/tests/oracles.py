"""Independent reference implementations used to cross-check the package.

Everything here is deliberately naive: dense time stepping instead of
event-driven quadratics, O(n^2) pair scans instead of grid buckets, BFS
instead of union-find. Slow but hard to get wrong.
"""

import math

import numpy as np


def interp_positions(traj, ts):
    """Piecewise-linear positions from the raw waypoint log, bypassing the
    package's own interpolation (legs reconstructed event by event)."""
    legs = traj.legs_array()
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    out = np.empty((ts.size, 2))
    for j, t in enumerate(ts):
        row = None
        for x0, y0, x1, y1, t0, t1 in legs:
            if t0 <= t <= t1:
                row = (x0, y0, x1, y1, t0, t1)
                break
        assert row is not None, f"t={t} outside trajectory"
        x0, y0, x1, y1, t0, t1 = row
        u = 0.0 if t1 == t0 else (t - t0) / (t1 - t0)
        x, y = x0 + u * (x1 - x0), y0 + u * (y1 - y0)
        if traj.dom.torus:
            x, y = traj.dom.wrap(x, y)
        out[j] = (x, y)
    return out


def stepped_first_hit(walkers, cx, cy, rho, t_max, dt=1e-3):
    """First grid time at which any walker is within rho of (cx, cy)."""
    ts = np.arange(0.0, t_max + dt / 2, dt)
    best = math.inf
    for traj in walkers:
        tcut = min(t_max, traj.horizon)
        sub = ts[ts <= tcut]
        pos = interp_positions(traj, sub)
        dx = pos[:, 0] - cx
        dy = pos[:, 1] - cy
        if traj.dom.torus:
            dx -= traj.dom.a_x * np.round(dx / traj.dom.a_x)
            dy -= traj.dom.a_y * np.round(dy / traj.dom.a_y)
        hit = np.nonzero(dx * dx + dy * dy <= rho * rho)[0]
        if hit.size:
            best = min(best, float(sub[hit[0]]))
    return best


def interp_positions_fast(traj, ts):
    """Same reconstruction as interp_positions (raw leg log, not the
    package's interpolation) but locating legs with searchsorted so large
    grids stay affordable."""
    legs = traj.legs_array()
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    idx = np.clip(np.searchsorted(legs[:, 5], ts, side="left"),
                  0, legs.shape[0] - 1)
    x0, y0, x1, y1 = (legs[idx, k] for k in range(4))
    t0, t1 = legs[idx, 4], legs[idx, 5]
    assert np.all(ts >= t0 - 1e-9) and np.all(ts <= t1 + 1e-9)
    span = np.where(t1 > t0, t1 - t0, 1.0)
    u = np.where(t1 > t0, (ts - t0) / span, 0.0)
    x = x0 + u * (x1 - x0)
    y = y0 + u * (y1 - y0)
    if traj.dom.torus:
        x = (x - traj.dom.x0) % traj.dom.a_x + traj.dom.x0
        y = (y - traj.dom.y0) % traj.dom.a_y + traj.dom.y0
    return np.column_stack([x, y])


def stepped_first_hit_fast(walkers, cx, cy, rho, t_max, dt=1e-3):
    """stepped_first_hit with the vectorized interpolator."""
    ts = np.arange(0.0, t_max + dt / 2, dt)
    best = math.inf
    for traj in walkers:
        tcut = min(t_max, traj.horizon)
        sub = ts[ts <= tcut]
        pos = interp_positions_fast(traj, sub)
        dx = pos[:, 0] - cx
        dy = pos[:, 1] - cy
        if traj.dom.torus:
            dx -= traj.dom.a_x * np.round(dx / traj.dom.a_x)
            dy -= traj.dom.a_y * np.round(dy / traj.dom.a_y)
        hit = np.nonzero(dx * dx + dy * dy <= rho * rho)[0]
        if hit.size:
            best = min(best, float(sub[hit[0]]))
    return best


def stepped_first_contact_fast(traj_a, traj_b, rho, t_max, dt=1e-3):
    """stepped_first_contact with the vectorized interpolator."""
    hi = min(t_max, traj_a.horizon, traj_b.horizon)
    if hi < 0.0:
        return math.inf
    ts = np.arange(0.0, hi + dt / 2, dt)
    ts = ts[ts <= hi]
    pa = interp_positions_fast(traj_a, ts)
    pb = interp_positions_fast(traj_b, ts)
    dx = pa[:, 0] - pb[:, 0]
    dy = pa[:, 1] - pb[:, 1]
    if traj_a.dom.torus:
        dx -= traj_a.dom.a_x * np.round(dx / traj_a.dom.a_x)
        dy -= traj_a.dom.a_y * np.round(dy / traj_a.dom.a_y)
    hit = np.nonzero(dx * dx + dy * dy <= rho * rho)[0]
    return float(ts[hit[0]]) if hit.size else math.inf


def stepped_first_contact(traj_a, traj_b, rho, t_max, dt=1e-3):
    """First grid time at which two walkers are within rho of each other."""
    lo = 0.0
    hi = min(t_max, traj_a.horizon, traj_b.horizon)
    if hi < lo:
        return math.inf
    ts = np.arange(lo, hi + dt / 2, dt)
    ts = ts[ts <= hi]
    pa = interp_positions(traj_a, ts)
    pb = interp_positions(traj_b, ts)
    dx = pa[:, 0] - pb[:, 0]
    dy = pa[:, 1] - pb[:, 1]
    if traj_a.dom.torus:
        dx -= traj_a.dom.a_x * np.round(dx / traj_a.dom.a_x)
        dy -= traj_a.dom.a_y * np.round(dy / traj_a.dom.a_y)
    hit = np.nonzero(dx * dx + dy * dy <= rho * rho)[0]
    return float(ts[hit[0]]) if hit.size else math.inf


def brute_edges(points, radius, a_x=None, a_y=None, torus=False):
    """All i<j pairs within radius, O(n^2), min-image when torus."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    n = pts.shape[0]
    out = []
    for i in range(n):
        for j in range(i + 1, n):
            dx = pts[i, 0] - pts[j, 0]
            dy = pts[i, 1] - pts[j, 1]
            if torus:
                dx -= a_x * round(dx / a_x)
                dy -= a_y * round(dy / a_y)
            if dx * dx + dy * dy <= radius * radius:
                out.append((i, j))
    return np.asarray(out, dtype=np.int64).reshape(-1, 2)


def bfs_components(n, edges):
    """Component id per vertex via BFS; ids are min vertex index."""
    adj = [[] for _ in range(n)]
    for i, j in np.asarray(edges).reshape(-1, 2):
        adj[int(i)].append(int(j))
        adj[int(j)].append(int(i))
    label = np.full(n, -1, dtype=np.int64)
    for s in range(n):
        if label[s] != -1:
            continue
        queue = [s]
        label[s] = s
        while queue:
            v = queue.pop()
            for w in adj[v]:
                if label[w] == -1:
                    label[w] = s
                    queue.append(w)
    return label


def partition_sets(labels):
    """Frozen set-of-frozensets view of a labeling, for order-free equality."""
    groups = {}
    for idx, lab in enumerate(np.asarray(labels)):
        groups.setdefault(int(lab), []).append(idx)
    return frozenset(frozenset(g) for g in groups.values())
