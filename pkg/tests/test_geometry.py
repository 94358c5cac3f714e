import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from srw.geometry import (EmptyErosion, Point2, RectDomain, Segment,
                          cover_with_balls, distance, erode,
                          first_contact_two_moving,
                          min_distance_point_segment)


def test_point_rejects_non_finite():
    with pytest.raises(ValueError):
        Point2(math.nan, 0.0)
    with pytest.raises(ValueError):
        Point2(0.0, math.inf)


def test_point_unpacks():
    x, y = Point2(1.5, -2.0)
    assert (x, y) == (1.5, -2.0)


def test_domain_basics():
    dom = RectDomain(10.0, 5.0, x0=1.0, y0=2.0)
    assert dom.area == 50.0
    assert dom.diameter == pytest.approx(math.hypot(10, 5))
    assert dom.center == Point2(6.0, 4.5)
    assert dom.contains(1.0, 2.0) and dom.contains(11.0, 7.0)
    assert not dom.contains(0.99, 4.0)
    with pytest.raises(ValueError):
        RectDomain(0.0, 1.0)


def test_torus_wrap_and_min_image():
    dom = RectDomain(10.0, 10.0, torus=True)
    assert dom.wrap(12.5, -0.5) == (2.5, 9.5)
    dx, dy = dom.min_image(9.0, -9.0)
    assert (dx, dy) == (-1.0, 1.0)
    # torus diameter is half the bounded one for a square
    assert dom.diameter == pytest.approx(math.hypot(5, 5))


def test_distance_torus_vs_plain():
    dom = RectDomain(10.0, 10.0, torus=True)
    p, q = Point2(0.5, 5.0), Point2(9.5, 5.0)
    assert distance(p, q) == pytest.approx(9.0)
    assert distance(p, q, dom) == pytest.approx(1.0)


def test_erode():
    dom = RectDomain(10.0, 6.0)
    inner = erode(dom, 1.0)
    assert (inner.a_x, inner.a_y, inner.x0, inner.y0) == (8.0, 4.0, 1.0, 1.0)
    assert erode(dom, 0.0) == dom
    with pytest.raises(EmptyErosion):
        erode(dom, 3.0)
    with pytest.raises(ValueError):
        erode(dom, -0.1)


@given(st.floats(0.05, 2.0), st.floats(0.5, 8.0), st.floats(0.5, 8.0))
@settings(max_examples=40, deadline=None)
def test_cover_with_balls_covers(eps, ax, ay):
    region = RectDomain(ax, ay, x0=1.0, y0=-2.0)
    centers = cover_with_balls(region, eps)
    xs = np.linspace(region.x0, region.x0 + ax, 13)
    ys = np.linspace(region.y0, region.y0 + ay, 13)
    gx, gy = np.meshgrid(xs, ys)
    pts = np.column_stack([gx.ravel(), gy.ravel()])
    d2 = ((pts[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    assert np.all(d2.min(axis=1) <= eps * eps * (1 + 1e-12))


def test_cover_with_balls_rejects_bad_eps():
    with pytest.raises(ValueError):
        cover_with_balls(RectDomain(1.0, 1.0), 0.0)


def test_segment_consistency_checked():
    with pytest.raises(ValueError):
        Segment(Point2(0, 0), Point2(3, 4), 0.0, 1.0, 1.0)  # length 5 in 1s
    seg = Segment.from_endpoints(Point2(0, 0), Point2(3, 4), 2.0, speed=2.5)
    assert seg.t_end == pytest.approx(4.0)
    mid = seg.position(3.0)
    assert (mid.x, mid.y) == (pytest.approx(1.5), pytest.approx(2.0))


def test_min_distance_point_segment():
    seg = Segment.from_endpoints(Point2(-1, 1), Point2(1, 1), 0.0, speed=1.0)
    d, t = min_distance_point_segment(Point2(0, 0), seg)
    assert d == pytest.approx(1.0)
    assert t == pytest.approx(1.0)  # closest at x=0, one unit in


def test_first_contact_head_on():
    a = Segment.from_endpoints(Point2(0, 0), Point2(10, 0), 0.0, speed=1.0)
    b = Segment.from_endpoints(Point2(10, 0), Point2(0, 0), 0.0, speed=1.0)
    # gap closes at rate 2; contact at distance 1 when gap = 1: t = 4.5
    t = first_contact_two_moving(a, b, rho=1.0)
    assert t == pytest.approx(4.5)


def test_first_contact_respects_windows():
    a = Segment.from_endpoints(Point2(0, 0), Point2(1, 0), 0.0, speed=1.0)
    b = Segment.from_endpoints(Point2(0, 0), Point2(1, 0), 5.0, speed=1.0)
    assert first_contact_two_moving(a, b, rho=0.5) is None


def test_first_contact_already_touching():
    a = Segment.from_endpoints(Point2(0, 0), Point2(1, 0), 1.0, speed=1.0)
    b = Segment(Point2(0.2, 0), Point2(0.2, 0), 0.0, 10.0, 0.0)
    assert first_contact_two_moving(a, b, rho=0.5) == pytest.approx(1.0)


def test_first_contact_near_miss():
    a = Segment.from_endpoints(Point2(-5, 1.001), Point2(5, 1.001), 0.0, 1.0)
    b = Segment(Point2(0, 0), Point2(0, 0), 0.0, 10.0, 0.0)
    assert first_contact_two_moving(a, b, rho=1.0) is None


@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3),
       st.floats(0.1, 2.0))
@settings(max_examples=60, deadline=None)
def test_first_contact_matches_dense_sampling(ax, ay, bx, by, rho):
    a = Segment.from_endpoints(Point2(ax, ay), Point2(bx + 1e-3, by + 2e-3),
                               0.0, speed=1.0)
    b = Segment.from_endpoints(Point2(bx, by), Point2(ax + 1e-3, ay - 1e-3),
                               0.0, speed=1.3)
    t = first_contact_two_moving(a, b, rho)
    lo = max(a.t_start, b.t_start)
    hi = min(a.t_end, b.t_end)
    ts = np.linspace(lo, hi, 4001)
    pa = np.array([[a.position(u).x, a.position(u).y] for u in ts])
    pb = np.array([[b.position(u).x, b.position(u).y] for u in ts])
    d = np.hypot(*(pa - pb).T)
    inside = np.nonzero(d <= rho)[0]
    if t is None:
        # dense sampling may clip the boundary of a tangential contact
        assert inside.size == 0 or d[inside].min() >= rho - 1e-6
    else:
        assert lo <= t <= hi + 1e-12
        step = ts[inside[0]] if inside.size else hi
        assert t <= step + 1e-9
        pa_t, pb_t = a.position(t), b.position(t)
        assert distance(pa_t, pb_t) <= rho + 1e-9
