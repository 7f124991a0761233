from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from brusselator_gsp.frames import Frame, FrameState, Params
from brusselator_gsp.flow import (
    Direction,
    EventSpec,
    IntegratorConfig,
    MaxStepsExceeded,
    NoCrossing,
    TimeLedger,
    WindowError,
    extract_slow_manifold,
    integrate,
    integrate_to_event,
    solve,
)
from brusselator_gsp.geometry import (
    generic_slow_manifold_expansion,
    phi0,
    phi1,
    rescaled_expansion_fields,
    s1_expansion,
)
from brusselator_gsp.poincare import build_sections

P = Params(0.5, 0.05)
TIGHT = IntegratorConfig(rel_tol=1e-12, abs_tol=1e-14)


def _decay(y):
    return [-y[0]]


# ---------------------------------------------------------------- solver


def test_exponential_decay():
    res = solve(_decay, [1.0], 1.0)
    assert res.status == "complete"
    assert res.y[0] == pytest.approx(math.exp(-1), abs=1e-9)
    assert res.t == pytest.approx(1.0, abs=1e-15)


def test_halving_the_step_reduces_error():
    # fixed steps (tolerances too loose to reject anything)
    errs = []
    for h in (0.5, 0.25):
        cfg = IntegratorConfig(rel_tol=1.0, abs_tol=1.0, first_step=h, max_step=h)
        res = solve(_decay, [1.0], 4.0, cfg)
        errs.append(abs(res.y[0] - math.exp(-4)))
    assert errs[0] >= 4 * errs[1]


def test_harmonic_energy():
    res = solve(lambda y: [y[1], -y[0]], [1.0, 0.0], 100.0, TIGHT, record=False)
    e = res.y[0] ** 2 + res.y[1] ** 2
    assert abs(e - 1.0) <= 1e-7


def test_times_strictly_increase():
    res = solve(lambda y: [y[1], -y[0]], [1.0, 0.0], 10.0)
    assert np.all(np.diff(res.times) > 0)


def test_invalid_config():
    with pytest.raises(ValueError):
        IntegratorConfig(rel_tol=0.0)
    with pytest.raises(ValueError):
        IntegratorConfig(max_steps=0)


def test_step_budget():
    cfg = IntegratorConfig(max_steps=3, max_step=0.01)
    with pytest.raises(MaxStepsExceeded):
        solve(_decay, [1.0], 1.0, cfg)


def test_event_location_linear_clock():
    ev = EventSpec(lambda y: y[0] - 1.0, Direction.RISING)
    res = solve(lambda y: [1.0], [0.0], 10.0, events=[ev])
    assert res.status == "event"
    assert res.t == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.05, 0.95))
def test_event_location_on_decay(level):
    ev = EventSpec(lambda y: y[0] - level, Direction.FALLING)
    res = solve(_decay, [1.0], 10.0, TIGHT, events=[ev])
    assert res.t == pytest.approx(-math.log(level), abs=1e-10)


def test_event_without_sign_change():
    start = FrameState(Frame.RESCALED, (1.0, 0.3))
    never = EventSpec(lambda z: 5.0, Direction.ANY)
    with pytest.raises(NoCrossing):
        integrate_to_event(start, never, P, t_max=5.0)


# ---------------------------------------------------------------- clocks


def test_rescaled_ledger_matches_trapezoid():
    start = FrameState(Frame.RESCALED, (1.2, 0.4))
    tr = integrate(start, 20.0, P, TIGHT)
    k = 8
    r = tr.resample(k)[:, 1]
    frac = np.arange(k + 1) / (k + 1)
    t2 = np.concatenate([(a + (b - a) * frac) for a, b in zip(tr.times[:-1], tr.times[1:])] + [tr.times[-1:]])
    f = r**2
    t_trap = float(np.sum(0.5 * (f[1:] + f[:-1]) * np.diff(t2)))
    assert tr.final_ledger.t == pytest.approx(t_trap, rel=1e-6)
    assert tr.final_ledger.t2 == pytest.approx(20.0, rel=1e-14)


def test_ledger_reports_every_clock():
    start = FrameState(Frame.RESCALED, (1.2, 0.4))
    led = integrate(start, 20.0, P, TIGHT).final_ledger
    d = led.as_dict()
    assert set(d) == {"tau", "t", "t1", "t2", "tau2", "chart_time"}
    assert led.t > 0 and led.t1 > 0


def test_ledger_arithmetic():
    a = TimeLedger(1, 2, 3, 4, 5, 6)
    b = TimeLedger.from_array(a.as_array())
    assert b == a
    assert (a + a - a) == a


# ---------------------------------------------------------------- conserved quantities


def _drift(q):
    q = np.asarray(q)
    return float(np.max(np.abs(q - q[0])) / abs(q[0]))


def test_layer_fibre_is_conserved():
    p0 = Params(0.5, 0.0)
    tr = integrate(FrameState(Frame.COMPACT, (1.0, 0.5)), 5.0, p0, TIGHT)
    th, r = tr.states.T
    assert _drift(r / np.sin(th)) <= 1e-8


def test_k1_product_is_conserved():
    tr = integrate(FrameState(Frame.K1, (0.3, 0.4, 0.2)), 2.0, P, TIGHT)
    _, eta, eps = tr.states.T
    assert _drift(eta * eps) <= 1e-8


def test_k3_product_is_conserved():
    tr = integrate(FrameState(Frame.K3, (0.1, 0.3, 0.2)), 2.0, P, TIGHT)
    eta, _, eps = tr.states.T
    assert _drift(eta * eps) <= 1e-8


def test_k3_orbit_invariant_in_eps3_zero_plane():
    tr = integrate(FrameState(Frame.K3, (0.3, 0.3, 0.0)), 3.0, P, TIGHT)
    eta, r, eps = tr.states.T
    assert np.all(eps == 0.0)
    x = eta**6
    assert _drift(r * eta**3 / (np.sin(x) + np.cos(x))) <= 1e-8


# ---------------------------------------------------------------- slow manifolds


def test_first_crossing_of_second_section_follows_expansion():
    # the eps^(3/2) remainder is about 3e-3 at eps = 0.05, so the 1e-3
    # bound is checked where the two-term series is that accurate
    p = Params(0.5, 0.02)
    secs = build_sections(p)
    hit = integrate_to_event(secs.S1.point(0.1), secs.S2.event, p)
    th, r = hit.state.coords
    assert abs(r - (phi0(th, p) + p.epsilon * phi1(th, p))) <= 1e-3


def test_first_crossing_of_second_section_is_on_slow_manifold():
    secs = build_sections(P)
    hit = integrate_to_event(secs.S1.point(0.1), secs.S2.event, P)
    th, r = hit.state.coords
    pl = extract_slow_manifold("S2", P, samples=40)
    assert abs(r - np.interp(th, pl.points[:, 0], pl.points[:, 1])) <= 1e-5


def test_event_reintegration_advances():
    secs = build_sections(P)
    ev = secs.S2.event
    hit = integrate_to_event(secs.S1.point(0.1), ev, P)
    again = EventSpec(ev.event_fn, Direction.ANY, ev.bounds_fn)
    nxt = integrate_to_event(hit.state, again, P, t_max=1e6)
    assert nxt.time >= 0
    assert nxt.time <= 2 * IntegratorConfig().event_tol or nxt.ledger.t2 > 1.0


def test_s2_manifold_is_order_eps_from_critical_manifold():
    pl = extract_slow_manifold("S2", P, samples=40)
    dev = np.array([r - phi0(th, P) for th, r in pl.points])
    corr = np.array([r - phi0(th, P) - P.epsilon * phi1(th, P) for th, r in pl.points])
    assert 0.1 * P.epsilon < np.max(np.abs(dev)) < 10 * P.epsilon
    assert np.max(np.abs(corr)) < 0.3 * np.max(np.abs(dev))
    co = generic_slow_manifold_expansion(rescaled_expansion_fields(P), lambda t: phi0(t, P), order=3)
    e = math.sqrt(P.epsilon)
    third = np.array([r - co.evaluate(th, e) for th, r in pl.points])
    assert np.max(np.abs(third)) < 0.6 * np.max(np.abs(corr))


def test_s2_manifold_at_eps_zero_is_critical_manifold():
    pl = extract_slow_manifold("S2", Params(0.5, 0.0), samples=20)
    for th, r in pl.points:
        assert r == pytest.approx(phi0(th, P), abs=1e-8)


def test_s1_manifold_offset_matches_expansion():
    pl = extract_slow_manifold("S1", P, samples=30)
    th, r = pl.points.T
    off = th - math.pi / 4
    pred = np.array([s1_expansion(v, P) for v in r]) - math.pi / 4
    assert np.all(off > 0)
    assert np.all(np.abs(off / pred - 1) <= 0.25)


def test_s2_window_must_avoid_fold():
    with pytest.raises(WindowError):
        extract_slow_manifold("S2", P, window=(P.theta_star + 0.01, 1.3))
    with pytest.raises(ValueError):
        extract_slow_manifold("S9", P)
