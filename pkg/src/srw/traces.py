"""Trace files: native waypoint-event format and BonnMotion-style lines.

Native format is one header line ``#srw-trace v1 a_x a_y`` followed by one
line per waypoint event: ``node_id t x y flag`` with flag W (ordinary
waypoint) or H (home arrival; the t=0 start counts as one). Floats carry
six decimals. The BonnMotion-style export writes one line per node of
whitespace-separated ``t x y`` triples beginning with the home at t=0;
home arrivals are indistinguishable from waypoints there, as piecewise
linear motion between listed points is all that dialect encodes.
"""

from __future__ import annotations

import math
from typing import TextIO

from .geometry import Point2, RectDomain
from .mobility import WalkerTrajectory

NATIVE_HEADER = "#srw-trace v1"

_FORMATS = ("native", "bonnmotion")


def export_trace(trajectories: list[WalkerTrajectory], fmt: str,
                 fh: TextIO) -> None:
    if fmt not in _FORMATS:
        raise ValueError(f"unknown trace format {fmt!r}")
    if not trajectories:
        raise ValueError("no trajectories to export")
    if fmt == "native":
        _export_native(trajectories, fh)
    else:
        _export_bonnmotion(trajectories, fh)


def _export_native(trajectories, fh) -> None:
    dom = trajectories[0].dom
    fh.write(f"{NATIVE_HEADER} {dom.a_x:.6f} {dom.a_y:.6f}\n")
    for node, traj in enumerate(trajectories):
        wps = traj.waypoints()
        ts = traj.times
        for t, (x, y), flag in zip(ts, wps, traj.flags()):
            fh.write(f"{node} {t:.6f} {x:.6f} {y:.6f} {flag}\n")


def _export_bonnmotion(trajectories, fh) -> None:
    for traj in trajectories:
        wps = traj.waypoints()
        ts = traj.times
        fh.write(" ".join(f"{t:.6f} {x:.6f} {y:.6f}"
                          for t, (x, y) in zip(ts, wps)))
        fh.write("\n")


def import_trace(fh: TextIO, torus: bool = False) -> list[WalkerTrajectory]:
    """Rebuild trajectories from a native trace.

    The header records only the domain extent; pass torus=True when the
    trace came from a wrapping domain so legs whose endpoints sit across a
    boundary are reconstructed by minimum-image displacement, the same rule
    the simulator used to create them.
    """
    # tolerate leading "# ..." metadata comments above the format header
    header = fh.readline()
    while header and (header.startswith("# ") or not header.strip()):
        header = fh.readline()
    parts = header.split()
    if parts[:2] != NATIVE_HEADER.split() or len(parts) != 4:
        raise ValueError("not a native trace: bad header")
    dom = RectDomain(float(parts[2]), float(parts[3]), torus=torus)

    events: dict[int, list[tuple[float, float, float, str]]] = {}
    for lineno, line in enumerate(fh, start=2):
        line = line.strip()
        if not line:
            continue
        toks = line.split()
        if len(toks) != 5 or toks[4] not in ("W", "H"):
            raise ValueError(f"bad trace line {lineno}")
        node = int(toks[0])
        events.setdefault(node, []).append(
            (float(toks[1]), float(toks[2]), float(toks[3]), toks[4]))

    trajectories = []
    for node in sorted(events):
        evs = events[node]
        t0, x0, y0, flag0 = evs[0]
        if t0 != 0.0 or flag0 != "H":
            raise ValueError(f"node {node}: trace must start at home, t=0")
        # v_min is unknown for imported data; zero disables the
        # waypoint-count sanity bound without affecting interpolation.
        traj = WalkerTrajectory(Point2(x0, y0), dom, v_min=0.0)
        for t, x, y, flag in evs[1:]:
            ax, ay = traj.last_waypoint
            if torus:
                dx, dy = dom.min_image(x - ax, y - ay)
            else:
                dx, dy = x - ax, y - ay
            prev_t = traj.horizon
            dist = math.hypot(dx, dy)
            speed = dist / (t - prev_t) if t > prev_t else 0.0
            traj.append_leg(ax + dx, ay + dy, t, speed, flag)
        trajectories.append(traj)
    return trajectories
