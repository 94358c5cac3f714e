import math

import numpy as np
import pytest

from srw.geometry import Point2, RectDomain, distance
from srw.mobility import (FLAG_HOME, FLAG_WAYPOINT, HorizonExceeded,
                          MobilityModel, ModelVariant, advance_to,
                          homecoming_times, init_walker, next_leg, position_at,
                          waypoint_count)
from srw.rng import RngStream
from srw.sampling import (DeterministicAlarm, ExponentialAlarm, UniformDomain,
                          UniformVelocity)

DOM = RectDomain(10.0, 10.0)
HOME = Point2(4.0, 6.0)


def carryover(alarm, dom=DOM):
    return MobilityModel(ModelVariant.CARRYOVER, dom, UniformDomain(),
                         UniformVelocity(1.0, 2.0), alarm)


def classical(dom=DOM):
    return MobilityModel(ModelVariant.CLASSICAL, dom, UniformDomain(),
                         UniformVelocity(1.0, 2.0))


def walk(model, t, seed=0, home=HOME):
    state, traj = init_walker(model, home, RngStream(seed))
    advance_to(state, traj, model, RngStream(seed).child(1), t)
    return state, traj


def test_model_validation():
    with pytest.raises(ValueError):
        MobilityModel(ModelVariant.CARRYOVER, DOM, UniformDomain(),
                      UniformVelocity(1.0, 2.0), alarm=None)
    with pytest.raises(ValueError):
        MobilityModel(ModelVariant.INTERPOLATION, DOM, UniformDomain(),
                      UniformVelocity(1.0, 2.0), long_trip_prob=1.5,
                      home_radius=1.0)
    with pytest.raises(ValueError):
        MobilityModel(ModelVariant.INTERPOLATION, DOM, UniformDomain(),
                      UniformVelocity(1.0, 2.0), long_trip_prob=0.5,
                      home_radius=0.0)


def test_start_at_home():
    _, traj = walk(classical(), 10.0)
    assert position_at(traj, 0.0) == Point2(HOME.x, HOME.y)
    assert traj.flags()[0] == FLAG_HOME
    assert traj.flags()[1] == FLAG_WAYPOINT


def test_never_ringing_alarm_reduces_to_classical():
    # deterministic alarms draw nothing from the stream, so carryover with an
    # infinite alarm must retrace classical motion leg for leg
    s1, t1 = init_walker(carryover(DeterministicAlarm(math.inf)), HOME, RngStream(7))
    s2, t2 = init_walker(classical(), HOME, RngStream(7))
    advance_to(s1, t1, carryover(DeterministicAlarm(math.inf)), RngStream(7).child(1), 200.0)
    advance_to(s2, t2, classical(), RngStream(7).child(1), 200.0)
    assert t1.n_legs == t2.n_legs
    np.testing.assert_array_equal(t1.legs_array(), t2.legs_array())
    assert all(f == FLAG_WAYPOINT for f in t1.flags()[1:])
    assert homecoming_times(t1).size == 0


def test_carryover_goes_home_and_resumes():
    _, traj = walk(carryover(DeterministicAlarm(4.0)), 300.0, seed=3)
    hts = homecoming_times(traj)
    assert hts.size >= 5
    for t in hts:
        p = position_at(traj, float(t))
        assert distance(p, HOME) < 1e-9
    # home visits are exactly the H-flagged arrivals
    flags = traj.flags()
    times = traj.times
    flagged = [times[k] for k in range(1, len(flags)) if flags[k] == FLAG_HOME]
    np.testing.assert_array_equal(hts, np.asarray(flagged))


def test_reset_always_home_when_alarm_tiny():
    model = MobilityModel(ModelVariant.RESET, DOM, UniformDomain(),
                          UniformVelocity(1.0, 1.0), DeterministicAlarm(1e-9))
    _, traj = walk(model, 80.0, seed=5)
    flags = traj.flags()
    wps = traj.waypoints()
    assert FLAG_HOME in flags[1:]
    for k in range(1, len(flags)):
        if flags[k] == FLAG_HOME:
            assert math.hypot(wps[k, 0] - HOME.x, wps[k, 1] - HOME.y) < 1e-9
        else:
            # a real excursion leg is always immediately followed by a return
            if k + 1 < len(flags) and traj.times[k] > traj.times[k - 1]:
                assert flags[k + 1] == FLAG_HOME


def test_reset_never_home_when_alarm_huge():
    model = MobilityModel(ModelVariant.RESET, DOM, UniformDomain(),
                          UniformVelocity(1.0, 2.0), DeterministicAlarm(100.0))
    _, traj = walk(model, 200.0, seed=6)
    assert all(f == FLAG_WAYPOINT for f in traj.flags()[1:])


def test_state_is_markov():
    # copying the state mid-run and feeding both copies identical fresh
    # streams must yield identical continuations
    model = carryover(ExponentialAlarm(0.2))
    state, traj = init_walker(model, HOME, RngStream(11))
    rng = RngStream(11).child(1)
    advance_to(state, traj, model, rng, 50.0)

    fork = state.copy()
    cont_a = RngStream(99)
    cont_b = RngStream(99)
    rows_a, rows_b = [], []
    for _ in range(40):
        next_leg(state, traj, model, cont_a)
        rows_a.append((state.x1, state.y1, state.t1, state.speed,
                       state.alarm_rem, state.going_home))
    # replay from the fork on a throwaway trajectory
    traj2 = type(traj)(HOME, model.dom, model.v_min)
    for _ in range(40):
        next_leg(fork, traj2, model, cont_b)
        rows_b.append((fork.x1, fork.y1, fork.t1, fork.speed,
                       fork.alarm_rem, fork.going_home))
    assert rows_a == rows_b


def test_waypoint_count_matches_arrivals():
    _, traj = walk(carryover(ExponentialAlarm(0.1)), 150.0, seed=13)
    times = traj.times
    for t in (0.0, 1.0, 37.5, 149.9, float(times[3])):
        m = waypoint_count(traj, t)
        assert m == int(np.sum(times[1:] <= t))


def test_positions_are_continuous_and_speed_limited():
    _, traj = walk(classical(), 100.0, seed=17)
    ts = np.linspace(0.0, 100.0, 5001)
    ps = traj.positions_at(ts)
    step = np.hypot(np.diff(ps[:, 0]), np.diff(ps[:, 1]))
    assert np.all(step <= 2.0 * (ts[1] - ts[0]) + 1e-9)
    # positions at arrival times reproduce the logged waypoints
    for k in (1, 2, 5):
        wx, wy = traj.waypoint(k)
        p = position_at(traj, float(traj.times[k]))
        assert (p.x, p.y) == pytest.approx((wx, wy), abs=1e-12)


def test_prune_keeps_absolute_indexing():
    _, traj = walk(carryover(DeterministicAlarm(4.0)), 200.0, seed=19)
    ts = np.linspace(80.0, 190.0, 57)
    before = traj.positions_at(ts)
    total = traj.total_legs
    m_before = waypoint_count(traj, 150.0)
    k_keep = waypoint_count(traj, 100.0)
    wp_keep = traj.waypoint(k_keep + 1)

    traj.prune_before(80.0)

    np.testing.assert_array_equal(before, traj.positions_at(ts))
    assert traj.total_legs == total
    assert waypoint_count(traj, 150.0) == m_before
    assert traj.waypoint(k_keep + 1) == wp_keep
    with pytest.raises(HorizonExceeded):
        traj.waypoint(0)
    with pytest.raises(HorizonExceeded):
        traj.positions_at(np.array([1.0]))
    with pytest.raises(HorizonExceeded):
        position_at(traj, 5.0)


def test_interpolation_waypoint_support():
    def interp(p):
        return MobilityModel(ModelVariant.INTERPOLATION, DOM, UniformDomain(),
                             UniformVelocity(1.0, 2.0), long_trip_prob=p,
                             home_radius=1.5)

    _, near = walk(interp(0.0), 150.0, seed=23)
    d = np.hypot(near.waypoints()[1:, 0] - HOME.x, near.waypoints()[1:, 1] - HOME.y)
    assert np.all(d <= 1.5 + 1e-12)

    _, far = walk(interp(1.0), 150.0, seed=23)
    d = np.hypot(far.waypoints()[1:, 0] - HOME.x, far.waypoints()[1:, 1] - HOME.y)
    assert np.all(d > 1.5)

    for traj in (near, far):
        assert all(f == FLAG_WAYPOINT for f in traj.flags()[1:])
        assert homecoming_times(traj).size == 0


def test_torus_positions_stay_in_box():
    tdom = RectDomain(10.0, 10.0, torus=True)
    model = MobilityModel(ModelVariant.CARRYOVER, tdom, UniformDomain(),
                          UniformVelocity(1.0, 2.0), ExponentialAlarm(0.2))
    _, traj = walk(model, 120.0, seed=29, home=Point2(0.2, 9.8))
    ps = traj.positions_at(np.linspace(0.0, 120.0, 2001))
    assert np.all((ps >= 0.0) & (ps < 10.0))
    wps = traj.waypoints()
    assert np.all((wps >= 0.0) & (wps < 10.0))


def test_horizon_enforced():
    _, traj = walk(classical(), 30.0, seed=31)
    hz = traj.horizon
    assert hz > 30.0
    with pytest.raises(HorizonExceeded):
        position_at(traj, hz + 1.0)
    with pytest.raises(HorizonExceeded):
        waypoint_count(traj, hz + 1.0)
    with pytest.raises(HorizonExceeded):
        traj.waypoint(traj.total_legs + 1)
