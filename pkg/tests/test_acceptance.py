"""Acceptance criteria, one test per criterion.

Each test records a PASS/FAIL line (printed in the terminal summary and on
stdout) before asserting, so a red criterion still reports its measured
numbers.
"""
from __future__ import annotations

import math

import numpy as np
import pytest

from brusselator_gsp.blowup import appendix_b_constants, exit_bounds_report, exit_image_scaling
from brusselator_gsp.flow import IntegratorConfig, integrate
from brusselator_gsp.frames import (
    ADJACENT_PAIRS,
    Frame,
    FrameState,
    Params,
    jacobian,
    pushforward_defect,
    round_trip_error,
    sample_state,
    transform_state,
)
from brusselator_gsp.geometry import (
    hausdorff_distance,
    hausdorff_semidistance,
    rescaled_to_xy_bar,
    singular_cycle,
    truncated_sigma_bar,
)
from brusselator_gsp.poincare import return_map
from brusselator_gsp.sweep import scaling_report

from conftest import ACCEPTANCE, GRID

A = 0.5
TIGHT = IntegratorConfig(rel_tol=1e-12, abs_tol=1e-14)


def _record(n, ok, detail):
    line = f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE[n] = line
    print(line)
    assert ok, line


@pytest.fixture(scope="module")
def report(cycles):
    for e in GRID:
        cycles(e)
    return scaling_report(Params(A, 0.1), grid=GRID, cache=cycles.cache)["checks"]


def _fmt(v):
    return f"{v:.4g}"


# ---------------------------------------------------------------- 1


def test_criterion_01_hopf_threshold():
    def trace(b):
        p = Params(A, A / b)
        return float(np.trace(jacobian(FrameState(Frame.XY, (A, b / A)), p)))

    lo, hi = 1.0, 2.0
    assert trace(lo) < 0 < trace(hi)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if trace(mid) < 0:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-14:
            break
    b0 = 0.5 * (lo + hi)
    err = abs(b0 - (1 + A * A))
    _record(1, err <= 1e-9, f"trace zero at b = {b0:.12f}, |b - 1.25| = {err:.2e} (tol 1e-9)")


# ---------------------------------------------------------------- 2


def test_criterion_02_frame_coherence():
    rng = np.random.default_rng(2024)
    p = Params(A, 0.05)
    worst_pf = worst_rt = 0.0
    for s, t in ADJACENT_PAIRS:
        for _ in range(100):
            z = sample_state(s, rng, p)
            worst_pf = max(worst_pf, pushforward_defect(z, t, p))
            worst_pf = max(worst_pf, pushforward_defect(transform_state(z, t, p), s, p))
            worst_rt = max(worst_rt, round_trip_error(z, t, p))
    zo = [sample_state(Frame.OMEGA, rng, p) for _ in range(100)]
    for z in zo:
        for f in Frame:
            worst_rt = max(worst_rt, round_trip_error(z, f, p))
    ok = worst_pf <= 1e-6 and worst_rt <= 1e-12
    _record(2, ok, f"max pushforward defect {worst_pf:.2e} (tol 1e-6), max round trip {worst_rt:.2e} (tol 1e-12)")


# ---------------------------------------------------------------- 3


def test_criterion_03_cycle_existence_and_attraction(cycles):
    starts = np.linspace(0.02, 0.25, 5)
    worst_spread = worst_gap = 0.0
    failures = []
    for eps in GRID:
        p = Params(A, eps)
        cyc = cycles(eps)
        finals = []
        for u in starts:
            for _ in range(3):
                u = return_map(u, p, sections=cyc.sections).u
            finals.append(u)
        spread = max(abs(f - cyc.u_fixed) for f in finals)
        worst_spread = max(worst_spread, spread)
        worst_gap = max(worst_gap, cyc.closure_gap)
        if spread > 1e-9 or cyc.closure_gap > 1e-8:
            failures.append(eps)
    _record(
        3,
        not failures,
        f"max distance after 3 circuits {worst_spread:.2e} (tol 1e-9), max closure gap {worst_gap:.2e} (tol 1e-8)"
        + (f", failing eps {failures}" if failures else ""),
    )


# ---------------------------------------------------------------- 4


def test_criterion_04_rho_eps_scaling(report):
    c = report["rho_eps"]
    fit = c["detail"]["fit"]
    ok = 1.35 <= fit["slope"] <= 1.65 and fit["r_squared"] >= 0.98
    _record(4, ok, f"rho_eps slope {_fmt(fit['slope'])} in [1.35, 1.65], r^2 {fit['r_squared']:.4f} (>= 0.98)")


# ---------------------------------------------------------------- 5, 6


def _dwell_line(report, clock):
    parts, ok = [], True
    bands = {"sigma1": (2.6, 3.4), "sigma2": (-1.25, -0.75), "sigma4": (-1.75, -1.25)}
    bounded = {"t": ("sigma3",), "t2": ("sigma1", "sigma3")}[clock]
    for b in ("sigma1", "sigma2", "sigma3", "sigma4"):
        c = report[f"dwell_{clock}_{b}"]
        v = c["value"]
        if b in bounded:
            good = math.isfinite(v) and v <= 3.0
            parts.append(f"{b} ratio {_fmt(v)} (<= 3)")
        else:
            lo, hi = bands[b]
            good = lo <= v <= hi
            parts.append(f"{b} slope {_fmt(v)} in [{lo}, {hi}]")
        if not good:
            parts[-1] += " X"
        ok &= good
    return ok, "; ".join(parts)


def test_criterion_05_dwell_exponents_t(report):
    ok, line = _dwell_line(report, "t")
    _record(5, ok, line)


def test_criterion_06_dwell_exponents_t2(report):
    ok, line = _dwell_line(report, "t2")
    _record(6, ok, line)


# ---------------------------------------------------------------- 7


def test_criterion_07_slow_manifold_expansions(report):
    s2 = report["s2_residual"]["value"]
    s1 = report["s1_offset"]["detail"]
    errs = {e: d["relative_error"] for e, d in s1.items()}
    ok = s2 >= 1.25 and set(errs) == {"0.05", "0.1"} and all(v <= 0.25 for v in errs.values())
    _record(
        7,
        ok,
        f"S2 residual slope {_fmt(s2)} (>= 1.25); S1 offset relative errors "
        + ", ".join(f"eps {e}: {v:.3f}" for e, v in sorted(errs.items()))
        + " (<= 0.25)",
    )


# ---------------------------------------------------------------- 8


def test_criterion_08_fold_passage(report):
    v = report["fold_deviation"]["value"]
    _record(8, 0.5 <= v <= 0.85, f"fold deviation slope {_fmt(v)} in [0.5, 0.85]")


# ---------------------------------------------------------------- 9


def test_criterion_09_exit_chart_bounds():
    k = appendix_b_constants(delta=0.2)
    rep = exit_bounds_report(k, samples=20)
    rows = rep["initials"]
    times_ok = all(r.get("time_ok", False) for r in rows)
    sandwich_ok = all(r.get("sandwich_ok", False) for r in rows)
    fit = exit_image_scaling(Params(A, 0.0), constants=k)
    slope_ok = 2.7 <= fit.slope <= 3.3
    _record(
        9,
        len(rows) == 20 and times_ok and sandwich_ok and slope_ok,
        f"{sum(r['ok'] for r in rows)}/20 starts within hitting-time bounds and sandwich; "
        f"exit-image slope {_fmt(fit.slope)} in [2.7, 3.3]",
    )


# ---------------------------------------------------------------- 10


def test_criterion_10_hausdorff_convergence(cycles):
    grid = (0.1, 0.05, 0.025)
    sc = singular_cycle(Params(A, 0.1)).as_polyline()
    d_hat, d_bar = [], []
    for eps in grid:
        cyc = cycles(eps)
        d_hat.append(hausdorff_distance(cyc.polyline, sc))
        pieces = truncated_sigma_bar(cyc.params, cyc.rho_eps)
        d_bar.append(hausdorff_semidistance(pieces, rescaled_to_xy_bar(cyc.polyline)))
    dec_hat = d_hat[0] > d_hat[1] > d_hat[2]
    dec_bar = d_bar[0] > d_bar[1] > d_bar[2]
    _record(
        10,
        dec_hat and dec_bar,
        "d_H(cycle, sigma-hat) " + " > ".join(f"{v:.4f}" for v in d_hat)
        + "; rescaled " + " > ".join(f"{v:.4f}" for v in d_bar)
        + f" at eps {grid}",
    )


# ---------------------------------------------------------------- 11


def test_criterion_11_conserved_quantities():
    p = Params(A, 0.05)

    def drift(q):
        q = np.asarray(q)
        return float(np.max(np.abs(q - q[0])) / abs(q[0]))

    tr = integrate(FrameState(Frame.K1, (0.3, 0.4, 0.2)), 5.0, p, TIGHT)
    d1 = drift(tr.states[:, 1] * tr.states[:, 2])
    tr = integrate(FrameState(Frame.K3, (0.1, 0.3, 0.2)), 5.0, p, TIGHT)
    d3 = drift(tr.states[:, 0] * tr.states[:, 2])
    tr = integrate(FrameState(Frame.COMPACT, (1.0, 0.5)), 5.0, Params(A, 0.0), TIGHT)
    dl = drift(tr.states[:, 1] / np.sin(tr.states[:, 0]))
    tr = integrate(FrameState(Frame.K3, (0.3, 0.3, 0.0)), 3.0, p, TIGHT)
    e, r = tr.states[:, 0], tr.states[:, 1]
    x = e**6
    dk = drift(r * e**3 / (np.sin(x) + np.cos(x)))
    worst = max(d1, d3, dl, dk)
    _record(
        11,
        worst <= 1e-8,
        f"relative drift eta1*eps1 {d1:.1e}, eta3*eps3 {d3:.1e}, r/sin(theta) {dl:.1e}, "
        f"K3 plane invariant {dk:.1e} (tol 1e-8)",
    )
