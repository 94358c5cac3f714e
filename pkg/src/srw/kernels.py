"""Backend selection for the hot kernels.

The compiled extension is used when it imported cleanly; otherwise the
numpy implementations take over with identical semantics. Setting the
environment variable SRW_PURE_PYTHON (to anything non-empty) forces the
fallback, which the cross-checking tests and the benchmark rely on.
"""

from __future__ import annotations

import os

import numpy as np

from . import _kernels_py

if os.environ.get("SRW_PURE_PYTHON"):
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]
        BACKEND = "compiled"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"

__all__ = ["BACKEND", "first_hit_static", "first_hit_static_multi",
           "first_contact_two", "pair_edges", "component_labels"]


def _legs(arr) -> np.ndarray:
    out = np.ascontiguousarray(arr, dtype=np.float64)
    if out.ndim != 2 or out.shape[1] != 6:
        raise ValueError("legs must be an (n, 6) array")
    return out


def first_hit_static(legs, cx: float, cy: float, rho: float) -> float:
    """Earliest time the piecewise-linear motion enters the disc, else inf."""
    return float(_impl.first_hit_static(_legs(legs), float(cx), float(cy),
                                        float(rho)))


def first_hit_static_multi(legs, centers, rho: float) -> np.ndarray:
    """Per-center first entry times; legs must be sorted by start time."""
    cs = np.ascontiguousarray(centers, dtype=np.float64).reshape(-1, 2)
    return np.asarray(_impl.first_hit_static_multi(_legs(legs), cs, float(rho)))


def first_contact_two(legs_a, legs_b, rho: float) -> float:
    """Earliest time two walkers come within rho, searched on the overlap
    of their recorded spans; inf when they never meet."""
    return float(_impl.first_contact_two(_legs(legs_a), _legs(legs_b),
                                         float(rho)))


def pair_edges(pts, radius: float, ax: float, ay: float, x0: float = 0.0,
               y0: float = 0.0, torus: bool = False) -> np.ndarray:
    """All index pairs i < j with distance <= radius, rows sorted."""
    p = np.ascontiguousarray(pts, dtype=np.float64).reshape(-1, 2)
    e = np.asarray(_impl.pair_edges(p, float(radius), float(ax), float(ay),
                                    float(x0), float(y0), bool(torus)),
                   dtype=np.int64)
    if e.shape[0] > 1:
        e = e[np.lexsort((e[:, 1], e[:, 0]))]
    return e


def component_labels(n: int, edges) -> np.ndarray:
    """Vertex labels; each label is the least vertex index of its component."""
    e = np.ascontiguousarray(edges, dtype=np.int64).reshape(-1, 2)
    return np.asarray(_impl.component_labels(int(n), e), dtype=np.int64)
