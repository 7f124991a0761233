from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from brusselator_gsp.frames import Frame, Params, p_func
from brusselator_gsp.geometry import (
    FOLD_GUARD,
    CurvePolyline,
    SingularityError,
    dphi0,
    fast_fiber,
    fiber_manifold_intersections,
    generic_slow_manifold_expansion,
    hausdorff_distance,
    hausdorff_semidistance,
    omega_expansion_fields,
    phi0,
    phi1,
    reduced_flow_s2,
    rescaled_expansion_fields,
    rescaled_to_xy_bar,
    s1_expansion,
    sigma_curves,
    singular_cycle,
    to_epsilon_convention,
    truncated_sigma_bar,
)

P = Params(0.5, 0.05)
Q4 = math.pi / 4
TS = math.atan(2.0)

# independent symbolic evaluation of the closed forms (sympy, 20 digits)
PHI_ORACLE = {
    1.2: (0.64253941209267188772, 1.1230229667177509962),
    1.3: (0.61023776119674158726, 0.38089808923938319318),
    1.4: (0.52650782598605617500, 0.13863189750640180184),
}
# roots of rho sin(theta) = phi0(theta) found with mpmath at 30 digits
FIBER_ORACLE = (0.864242950123051016, 1.42538337629347011)


# ---------------------------------------------------------------- closed forms


def test_phi0_endpoints_and_fold():
    assert phi0(Q4, P) == pytest.approx(0.0, abs=1e-15)
    assert phi0(math.pi / 2, P) == pytest.approx(0.0, abs=1e-15)
    assert phi0(TS, P) == pytest.approx(1 / math.sqrt(5 * 0.5), rel=1e-14)
    assert phi0(TS, P) == pytest.approx(0.632455532, rel=1e-9)


@pytest.mark.parametrize("theta", sorted(PHI_ORACLE))
def test_phi0_phi1_against_symbolic_oracle(theta):
    p0, p1 = PHI_ORACLE[theta]
    assert phi0(theta, P) == pytest.approx(p0, rel=1e-13)
    assert phi1(theta, P) == pytest.approx(p1, rel=1e-12)


def test_phi1_zero_at_quarter_pi_and_singular_at_fold():
    assert phi1(Q4, P) == pytest.approx(0.0, abs=1e-14)
    with pytest.raises(SingularityError):
        phi1(TS, P)
    with pytest.raises(SingularityError):
        phi1(TS + 0.5 * FOLD_GUARD, P)


def test_angle_outside_quadrant_is_rejected():
    with pytest.raises(ValueError):
        phi0(0.5, P)


@given(st.floats(Q4, math.pi / 2))
def test_phi0_lies_on_zero_set_of_p(theta):
    assert abs(p_func(theta, phi0(theta, P), P.a)) <= 1e-12


@given(st.floats(Q4 + 1e-3, math.pi / 2 - 1e-3))
def test_dphi0_matches_difference_quotient(theta):
    h = 1e-6
    fd = (phi0(theta + h, P) - phi0(theta - h, P)) / (2 * h)
    assert dphi0(theta, P) == pytest.approx(fd, rel=1e-6, abs=1e-7)


def test_s1_expansion_examples():
    assert s1_expansion(0.0, P) == Q4
    p = Params(0.5, 0.04)
    assert s1_expansion(1.0, p) == pytest.approx(Q4 + 0.008 / math.sqrt(2), rel=1e-14)
    assert s1_expansion(1.0, p) == pytest.approx(0.791056, abs=1e-6)
    assert s1_expansion(3.0, Params(0.5, 0.0)) == Q4


def test_fast_fiber_examples():
    rs = P.rho_star
    assert fast_fiber(0.0, 1.0) == 0.0
    assert fast_fiber(0.7, math.pi / 2) == pytest.approx(0.7)
    assert fast_fiber(rs, TS) == pytest.approx(P.r_star, rel=1e-14)


def test_fiber_intersections_against_oracle():
    lo, hi = fiber_manifold_intersections(0.5, P)
    assert lo == pytest.approx(FIBER_ORACLE[0], abs=1e-12)
    assert hi == pytest.approx(FIBER_ORACLE[1], abs=1e-12)


def test_fiber_intersections_tangent_and_empty():
    roots = fiber_manifold_intersections(P.rho_star, P)
    assert len(roots) == 1
    assert math.tan(roots[0]) == pytest.approx(2.0, rel=1e-10)
    assert fiber_manifold_intersections(2 * P.rho_star, P) == ()
    with pytest.raises(ValueError):
        fiber_manifold_intersections(0.0, P)


@given(st.floats(0.05, 0.999))
def test_fiber_intersections_lie_on_both_curves(frac):
    rho = frac * P.rho_star
    for th in fiber_manifold_intersections(rho, P):
        assert abs(rho * math.sin(th) - phi0(th, P)) <= 1e-10


def test_reduced_flow_points_towards_fold():
    th = np.linspace(Q4 + 0.01, math.pi / 2 - 0.01, 1000)
    th = th[np.abs(th - TS) > FOLD_GUARD]
    v = np.array([reduced_flow_s2(t, P) for t in th])
    assert np.all((th - TS) * v < 0)
    assert reduced_flow_s2(Q4, P) == pytest.approx(0.0, abs=1e-15)
    assert reduced_flow_s2(1.0, P) > 0
    assert reduced_flow_s2(1.3, P) < 0


# ---------------------------------------------------------------- cycle curves


def test_singular_cycle_closes_through_marked_points():
    cyc = singular_cycle(P)
    br = cyc.branches
    for a, b in zip(br, br[1:] + br[:1]):
        assert np.allclose(a.end, b.start, atol=1e-10)
    assert np.allclose(br[1].end, cyc.F) and np.allclose(br[2].start, cyc.F)
    assert np.allclose(br[2].end, cyc.Q, atol=1e-12)
    assert cyc.Q[1] == pytest.approx(1 / (2 * math.sqrt(2 * 0.5)))
    assert np.allclose(cyc.P0, (Q4, 0.0)) and np.allclose(cyc.P1, (math.pi / 2, 0.0))
    assert cyc.as_polyline().frame is Frame.RESCALED


def test_singular_cycle_rejects_tiny_sampling():
    with pytest.raises(ValueError):
        singular_cycle(P, samples_per_branch=1)


def test_sigma_curve_relations():
    rho = 0.05
    c = sigma_curves(P, rho)
    x, y = c["sigma2"].points.T
    assert np.allclose(y, x + P.a / (P.epsilon * x), rtol=1e-9, atol=0)
    x4, y4 = c["sigma4"].points.T
    assert np.array_equal(x4, y4)
    x3 = c["sigma3"].points[0, 0]
    assert x3 == pytest.approx(2 * math.sqrt(P.a) / math.sqrt(P.epsilon), rel=1e-12)
    assert np.allclose(c["sigma1"].points[:, 1], 1 / (rho * math.sqrt(P.epsilon)))


def test_sigma_curves_rejects_nonpositive_height():
    with pytest.raises(ValueError):
        sigma_curves(P, 0.0)


def test_rescaled_sigma_curves_do_not_depend_on_eps():
    a = sigma_curves(Params(0.5, 0.1), 0.05, rescaled=True)
    b = sigma_curves(Params(0.5, 0.01), 0.05, rescaled=True)
    for key in ("sigma2", "sigma3", "sigma4"):
        assert np.allclose(a[key].points, b[key].points, rtol=0, atol=1e-12)
        assert a[key].rescaled


def test_rescaled_sigma_bar_matches_singular_cycle_image():
    # sigma-bar_3 is the image of sigma-hat_3 under (cos, sin)/rbar
    cyc = singular_cycle(P)
    img = rescaled_to_xy_bar(cyc.branches[2])
    bar = sigma_curves(P, 0.05, samples=4096, rescaled=True)["sigma3"]
    assert hausdorff_distance(img, bar) < 1e-3


def test_rescaled_to_xy_bar_guards():
    cyc = singular_cycle(P)
    with pytest.raises(SingularityError):
        rescaled_to_xy_bar(cyc.branches[0])
    with pytest.raises(ValueError):
        rescaled_to_xy_bar(CurvePolyline([[0, 1], [1, 1]], Frame.XYFAST))


def test_truncated_sigma_bar_height():
    rho = 0.05
    pieces = truncated_sigma_bar(P, rho)
    assert [p.label for p in pieces] == ["sigma_bar_2", "sigma_bar_3", "sigma_bar_4"]
    ymax = 1 / (math.sqrt(2) * rho)
    for p in pieces:
        assert p.points[:, 1].max() <= ymax * (1 + 1e-9)


# ---------------------------------------------------------------- expansions


def test_engine_reproduces_phi1_with_exact_partials():
    co = generic_slow_manifold_expansion(rescaled_expansion_fields(P, True), lambda t: phi0(t, P), order=2)
    eps_terms = to_epsilon_convention(co)
    for th in np.linspace(0.9, 1.5, 13):
        if abs(th - TS) < 0.02:
            continue
        assert co[1](th) == pytest.approx(0.0, abs=1e-12)
        assert eps_terms[1.0](th) == pytest.approx(phi1(th, P), rel=1e-12, abs=1e-12)
    assert co[2](1.3) == pytest.approx(PHI_ORACLE[1.3][1], rel=1e-12)


def test_engine_reproduces_phi1_with_difference_partials():
    co = generic_slow_manifold_expansion(rescaled_expansion_fields(P, False), lambda t: phi0(t, P), order=2)
    for th in np.linspace(0.9, 1.5, 13):
        if abs(th - TS) < 0.02:
            continue
        assert co[2](th) == pytest.approx(phi1(th, P), rel=1e-8, abs=1e-8)


def test_omega_expansion_leading_correction():
    co = generic_slow_manifold_expansion(omega_expansion_fields(P), lambda r: 0.0, order=3)
    assert co[3](2.0) == pytest.approx(math.sqrt(2), rel=1e-6)
    for r in (0.3, 1.0, 2.5):
        assert co[3](r) == pytest.approx(r / math.sqrt(2), rel=1e-6)
        assert co[1](r) == pytest.approx(0.0, abs=1e-9)


def test_omega_expansion_agrees_with_s1_expansion():
    co = generic_slow_manifold_expansion(omega_expansion_fields(P), lambda r: 0.0, order=3)
    e = math.sqrt(P.epsilon)
    r = 0.4
    assert Q4 + co.evaluate(r, e) == pytest.approx(s1_expansion(r, P), rel=1e-6)


# ---------------------------------------------------------------- Hausdorff


def _seg(p, q):
    return CurvePolyline([p, q], Frame.XYFAST)


def test_hausdorff_identical_and_parallel():
    a = _seg((0, 0), (1, 0))
    assert hausdorff_distance(a, a) == 0.0
    assert hausdorff_distance(a, _seg((0, 1), (1, 1))) == pytest.approx(1.0, abs=1e-12)


def test_hausdorff_semidistance_is_one_sided():
    short = _seg((0, 0), (1, 0))
    long = _seg((0, 0), (3, 0))
    assert hausdorff_semidistance(short, long) == pytest.approx(0.0, abs=1e-12)
    assert hausdorff_semidistance(long, short) == pytest.approx(2.0, abs=1e-12)


def test_hausdorff_pieces_have_no_joining_segment():
    target = CurvePolyline([[0, 0], [10, 0]], Frame.XYFAST)
    pieces = [_seg((0, 0), (1, 0)), _seg((9, 0), (10, 0))]
    assert hausdorff_semidistance(pieces, target) == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ValueError):
        hausdorff_semidistance([], target)


def test_hausdorff_frame_mismatch():
    a = _seg((0, 0), (1, 0))
    b = CurvePolyline([[0, 0], [1, 0]], Frame.RESCALED)
    with pytest.raises(ValueError):
        hausdorff_distance(a, b)
    c = CurvePolyline([[0, 0], [1, 0]], Frame.XYFAST, rescaled=True)
    with pytest.raises(ValueError):
        hausdorff_distance(a, c)


@settings(max_examples=30, deadline=None)
@given(st.floats(-5, 5), st.floats(-5, 5))
def test_hausdorff_translation_offset(dx, dy):
    base = np.column_stack([np.linspace(0, 1, 50), np.linspace(0, 1, 50) ** 2])
    a = CurvePolyline(base, Frame.XYFAST)
    b = CurvePolyline(base + [dx, dy], Frame.XYFAST)
    d = hausdorff_distance(a, b)
    assert d <= math.hypot(dx, dy) + 1e-9
    assert hausdorff_distance(b, a) == pytest.approx(d, abs=1e-9)


def test_polyline_validation():
    with pytest.raises(ValueError):
        CurvePolyline([[0, 0]], Frame.XYFAST)
    with pytest.raises(ValueError):
        CurvePolyline([[0, 0], [0, 0]], Frame.XYFAST)
