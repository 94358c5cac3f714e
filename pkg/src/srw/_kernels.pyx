# cython: language_level=3
"""Compiled hot kernels; contracts mirror _kernels_py exactly.

Legs are C-contiguous float64 arrays of rows (x0, y0, x1, y1, t0, t1).
"""

import numpy as np

cimport cython
from libc.math cimport INFINITY, floor, sqrt


cdef inline double _earliest_tau(double a, double b, double c, double hi) nogil:
    # smallest tau in [0, hi] with a tau^2 + b tau + c <= 0, given c > 0
    cdef double disc, q, tau
    if a <= 0.0 or b >= 0.0:
        return INFINITY
    disc = b * b - 4.0 * a * c
    if disc < 0.0:
        return INFINITY
    q = 0.5 * (-b + sqrt(disc))
    if q <= 0.0:
        return INFINITY
    tau = c / q
    if tau <= hi:
        return tau
    return INFINITY


cdef inline double _leg_hit(const double[:, ::1] legs, Py_ssize_t i,
                            double cx, double cy, double rho) nogil:
    # earliest absolute hit time of leg i against the static disc, or INFINITY
    cdef double dt, vx, vy, dx, dy, a, b, c, tau
    dt = legs[i, 5] - legs[i, 4]
    dx = legs[i, 0] - cx
    dy = legs[i, 1] - cy
    c = dx * dx + dy * dy - rho * rho
    if c <= 0.0:
        return legs[i, 4]
    if dt <= 0.0:
        return INFINITY
    vx = (legs[i, 2] - legs[i, 0]) / dt
    vy = (legs[i, 3] - legs[i, 1]) / dt
    a = vx * vx + vy * vy
    b = 2.0 * (dx * vx + dy * vy)
    tau = _earliest_tau(a, b, c, dt)
    if tau == INFINITY:
        return INFINITY
    return legs[i, 4] + tau


@cython.boundscheck(False)
@cython.wraparound(False)
def first_hit_static(const double[:, ::1] legs, double cx, double cy,
                     double rho):
    cdef Py_ssize_t i, n = legs.shape[0]
    cdef double best = INFINITY, h
    for i in range(n):
        if legs[i, 4] >= best:
            continue
        h = _leg_hit(legs, i, cx, cy, rho)
        if h < best:
            best = h
    return best


@cython.boundscheck(False)
@cython.wraparound(False)
def first_hit_static_multi(const double[:, ::1] legs,
                           const double[:, ::1] centers, double rho):
    cdef Py_ssize_t i, j, n = legs.shape[0], m = centers.shape[0]
    cdef double h
    out = np.full(m, np.inf)
    cdef double[::1] best = out
    for i in range(1, n):
        if legs[i, 4] < legs[i - 1, 4]:
            raise ValueError("legs must be sorted by start time")
    with nogil:
        for j in range(m):
            for i in range(n):
                if legs[i, 4] >= best[j]:
                    break
                h = _leg_hit(legs, i, centers[j, 0], centers[j, 1], rho)
                if h < best[j]:
                    best[j] = h
    return out


@cython.boundscheck(False)
@cython.wraparound(False)
def first_contact_two(const double[:, ::1] legs_a,
                      const double[:, ::1] legs_b, double rho):
    """Two-pointer sweep over the shared time span of two contiguous logs."""
    cdef Py_ssize_t ia = 0, ib = 0, na = legs_a.shape[0], nb = legs_b.shape[0]
    cdef double w0, w1, dta, dtb, vax, vay, vbx, vby
    cdef double pax, pay, pbx, pby, dx, dy, ux, uy, a, b, c, tau
    if na == 0 or nb == 0:
        return INFINITY
    # align the pointers onto the first overlapping pair of windows
    while ia < na and legs_a[ia, 5] < legs_b[0, 4]:
        ia += 1
    while ib < nb and legs_b[ib, 5] < legs_a[0, 4]:
        ib += 1
    while ia < na and ib < nb:
        w0 = max(legs_a[ia, 4], legs_b[ib, 4])
        w1 = min(legs_a[ia, 5], legs_b[ib, 5])
        if w1 >= w0:
            dta = legs_a[ia, 5] - legs_a[ia, 4]
            dtb = legs_b[ib, 5] - legs_b[ib, 4]
            vax = (legs_a[ia, 2] - legs_a[ia, 0]) / dta if dta > 0.0 else 0.0
            vay = (legs_a[ia, 3] - legs_a[ia, 1]) / dta if dta > 0.0 else 0.0
            vbx = (legs_b[ib, 2] - legs_b[ib, 0]) / dtb if dtb > 0.0 else 0.0
            vby = (legs_b[ib, 3] - legs_b[ib, 1]) / dtb if dtb > 0.0 else 0.0
            pax = legs_a[ia, 0] + (w0 - legs_a[ia, 4]) * vax
            pay = legs_a[ia, 1] + (w0 - legs_a[ia, 4]) * vay
            pbx = legs_b[ib, 0] + (w0 - legs_b[ib, 4]) * vbx
            pby = legs_b[ib, 1] + (w0 - legs_b[ib, 4]) * vby
            dx = pax - pbx
            dy = pay - pby
            ux = vax - vbx
            uy = vay - vby
            c = dx * dx + dy * dy - rho * rho
            if c <= 0.0:
                return w0
            a = ux * ux + uy * uy
            b = 2.0 * (dx * ux + dy * uy)
            tau = _earliest_tau(a, b, c, w1 - w0)
            if tau != INFINITY:
                return w0 + tau
        # advance whichever window closes first
        if legs_a[ia, 5] <= legs_b[ib, 5]:
            ia += 1
        else:
            ib += 1
    return INFINITY


@cython.boundscheck(False)
@cython.wraparound(False)
def pair_edges(const double[:, ::1] pts, double radius, double ax, double ay,
               double x0, double y0, bint torus):
    """Index pairs (i < j) at distance <= radius via a uniform cell grid."""
    cdef Py_ssize_t n = pts.shape[0]
    if n < 2:
        return np.empty((0, 2), dtype=np.int64)
    cdef Py_ssize_t nx = <Py_ssize_t> floor(ax / radius)
    cdef Py_ssize_t ny = <Py_ssize_t> floor(ay / radius)
    if nx < 1:
        nx = 1
    if ny < 1:
        ny = 1
    if torus and (nx < 3 or ny < 3):
        # grid too coarse to distinguish neighbor images; fall back to O(n^2)
        return _pair_edges_dense(pts, radius, ax, ay, torus)

    cdef double csx = ax / nx, csy = ay / ny
    cdef Py_ssize_t i, j, k, cxi, cyi, ncell = nx * ny
    px = np.empty(n)
    py = np.empty(n)
    cdef double[::1] pxv = px, pyv = py
    cell = np.empty(n, dtype=np.int64)
    cdef long long[::1] cellv = cell
    for i in range(n):
        pxv[i] = pts[i, 0] - x0
        pyv[i] = pts[i, 1] - y0
        if torus:
            # fmod keeps the dividend's sign under cdivision
            pxv[i] = pxv[i] % ax
            if pxv[i] < 0.0:
                pxv[i] += ax
            pyv[i] = pyv[i] % ay
            if pyv[i] < 0.0:
                pyv[i] += ay
        cxi = <Py_ssize_t> (pxv[i] / csx)
        cyi = <Py_ssize_t> (pyv[i] / csy)
        if cxi >= nx:
            cxi = nx - 1
        if cyi >= ny:
            cyi = ny - 1
        if cxi < 0:
            cxi = 0
        if cyi < 0:
            cyi = 0
        cellv[i] = cxi * ny + cyi

    order = np.argsort(cell, kind="stable").astype(np.int64)
    cdef long long[::1] orderv = order
    start = np.zeros(ncell + 1, dtype=np.int64)
    cdef long long[::1] startv = start
    for i in range(n):
        startv[cellv[i] + 1] += 1
    for k in range(ncell):
        startv[k + 1] += startv[k]

    out_i, out_j = [], []
    cdef double r2 = radius * radius, dx, dy
    cdef Py_ssize_t a_, b_, b_lo, u, v, gx, gy, hx, hy, c1, c2, dgx, dgy
    cdef bint same
    for gx in range(nx):
        for gy in range(ny):
            c1 = gx * ny + gy
            for dgx in range(-1, 2):
                for dgy in range(-1, 2):
                    hx = gx + dgx
                    hy = gy + dgy
                    if torus:
                        # offsets are -1..1, so shifting keeps operands
                        # non-negative (C modulo truncates toward zero)
                        hx = (hx + nx) % nx
                        hy = (hy + ny) % ny
                    elif hx < 0 or hx >= nx or hy < 0 or hy >= ny:
                        continue
                    c2 = hx * ny + hy
                    if c2 < c1:
                        continue   # each unordered cell pair scanned once
                    same = c2 == c1
                    for a_ in range(startv[c1], startv[c1 + 1]):
                        u = orderv[a_]
                        b_lo = a_ + 1 if same else startv[c2]
                        for b_ in range(b_lo, startv[c2 + 1]):
                            v = orderv[b_]
                            dx = pxv[u] - pxv[v]
                            dy = pyv[u] - pyv[v]
                            if torus:
                                if dx > 0.5 * ax:
                                    dx -= ax
                                elif dx < -0.5 * ax:
                                    dx += ax
                                if dy > 0.5 * ay:
                                    dy -= ay
                                elif dy < -0.5 * ay:
                                    dy += ay
                            if dx * dx + dy * dy <= r2:
                                if u < v:
                                    out_i.append(u)
                                    out_j.append(v)
                                else:
                                    out_i.append(v)
                                    out_j.append(u)
    if not out_i:
        return np.empty((0, 2), dtype=np.int64)
    return np.column_stack([np.asarray(out_i, dtype=np.int64),
                            np.asarray(out_j, dtype=np.int64)])


def _pair_edges_dense(const double[:, ::1] pts, double radius, double ax,
                      double ay, bint torus):
    cdef Py_ssize_t i, j, n = pts.shape[0]
    cdef double dx, dy, r2 = radius * radius
    out_i, out_j = [], []
    for i in range(n):
        for j in range(i + 1, n):
            dx = pts[i, 0] - pts[j, 0]
            dy = pts[i, 1] - pts[j, 1]
            if torus:
                if dx > 0.5 * ax:
                    dx -= ax
                elif dx < -0.5 * ax:
                    dx += ax
                if dy > 0.5 * ay:
                    dy -= ay
                elif dy < -0.5 * ay:
                    dy += ay
            if dx * dx + dy * dy <= r2:
                out_i.append(i)
                out_j.append(j)
    if not out_i:
        return np.empty((0, 2), dtype=np.int64)
    return np.column_stack([np.asarray(out_i, dtype=np.int64),
                            np.asarray(out_j, dtype=np.int64)])


@cython.boundscheck(False)
@cython.wraparound(False)
def component_labels(Py_ssize_t n, const long long[:, :] edges):
    """Union-find with path halving; labels are component-minimum indices."""
    parent = np.arange(n, dtype=np.int64)
    cdef long long[::1] par = parent
    cdef Py_ssize_t e, m = edges.shape[0]
    cdef long long ra, rb, x
    for e in range(m):
        ra = edges[e, 0]
        while par[ra] != ra:
            par[ra] = par[par[ra]]
            ra = par[ra]
        rb = edges[e, 1]
        while par[rb] != rb:
            par[rb] = par[par[rb]]
            rb = par[rb]
        if ra < rb:
            par[rb] = ra
        elif rb < ra:
            par[ra] = rb
    cdef Py_ssize_t i
    for i in range(n):
        x = i
        while par[x] != x:
            x = par[x]
        par[i] = x
    return parent
