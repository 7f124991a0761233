"""Blow-up chart geometry and the exit-chart hitting-time bounds.

The three charts cover the blown-up corner ``omega = rbar = eps = 0``:

* K1 ``(omega1, eta1, eps1)`` with ``omega = eta^6 omega1, rbar = eta^3,
  sqrt(eps) = eta eps1``;
* K2 ``(omega2, r2, eta2)`` with ``omega = eta^6 omega2, rbar = eta^3 r2,
  sqrt(eps) = eta``;
* K3 ``(eta3, r3, eps3)`` with ``omega = eta^6, rbar = eta^3 r3,
  sqrt(eps) = eta eps3``.

The exit-chart checks integrate the K3 field in its own chart time.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from typing import Optional, Sequence

import numpy as np

from .flow import Direction, EventSpec, IntegrationError, IntegratorConfig, solve
from .frames import (
    SQRT2,
    DomainError,
    Frame,
    FrameState,
    Params,
    _chart_to_omega,
    _omega_to_chart,
    field_function,
)

__all__ = [
    "ChartPoint",
    "AppendixBConstants",
    "ExitBoundsResult",
    "MonotoneCheck",
    "NoRealBranch",
    "NoRoot",
    "RegionEscape",
    "blow_down",
    "chart_lift",
    "k1_equilibrium_curve",
    "omega1_minus",
    "k2_equilibrium_branches",
    "k2_fold_point",
    "k2_fold_data",
    "k3_equilibrium_curves",
    "verify_k1_monotone_eta",
    "appendix_b_constants",
    "sample_exit_initials",
    "verify_exit_bounds",
    "exit_bounds_report",
    "exit_image",
    "exit_image_scaling",
]

_CHARTS = (Frame.K1, Frame.K2, Frame.K3)


class NoRealBranch(ValueError):
    pass


class NoRoot(ValueError):
    pass


class RegionEscape(IntegrationError):
    """An exit-chart orbit left the trapping region through a forbidden face."""

    def __init__(self, face: str, state=None, time: float = math.nan):
        super().__init__(f"orbit escaped through face {face!r} at chart time {time:.6g}")
        self.face = face
        self.state = state
        self.time = time


@dataclass(frozen=True)
class ChartPoint:
    """A point of one of the blow-up charts."""

    chart: Frame
    coords: tuple

    def __post_init__(self):
        if self.chart not in _CHARTS:
            raise ValueError(f"{self.chart} is not a blow-up chart")
        c = tuple(float(v) for v in self.coords)
        if len(c) != 3:
            raise ValueError("chart points have three coordinates")
        if not all(math.isfinite(v) for v in c):
            raise ValueError("chart coordinates must be finite")
        object.__setattr__(self, "coords", c)

    def __getitem__(self, i):
        return self.coords[i]


def blow_down(p: ChartPoint) -> tuple:
    """Map a chart point to ``(FrameState(OMEGA, (omega, rbar)), eps)``.

    The charts blow up the OMEGA parameter ``sqrt(eps)`` (``eta2`` in K2,
    ``eta1 eps1`` in K1, ``eta3 eps3`` in K3); the returned value is its
    square, the model parameter stored in :class:`Params`.
    """
    w, r = _chart_to_omega(p.chart, p.coords)
    c = p.coords
    se = {Frame.K1: c[1] * c[2], Frame.K2: c[2], Frame.K3: c[0] * c[2]}[p.chart]
    return FrameState(Frame.OMEGA, (w, r)), se * se


def chart_lift(state: FrameState, epsilon: float, chart: Frame) -> ChartPoint:
    """Inverse of :func:`blow_down` on the chart domain."""
    if state.frame is not Frame.OMEGA:
        raise ValueError("chart_lift expects an OMEGA state")
    if epsilon < 0:
        raise ValueError("epsilon must be nonnegative")
    return ChartPoint(chart, _omega_to_chart(chart, state.coords, epsilon))


# ---------------------------------------------------------------------------
# equilibria


def k1_equilibrium_curve(omega1: float, params: Params) -> float:
    """eps1 on the equilibrium curve in the invariant plane ``eta1 = 0``."""
    a = params.a
    if not 0.0 <= omega1 <= a:
        raise DomainError(f"omega1 must lie in [0, a], got {omega1}")
    return (SQRT2 * omega1 * (a - omega1) / a) ** (1.0 / 3.0)


def k1_fold(params: Params) -> tuple:
    a = params.a
    return 0.5 * a, (a / (2.0 * SQRT2)) ** (1.0 / 3.0)


def omega1_minus(eps1: float, params: Params) -> float:
    """Attracting (lower) branch of the K1 equilibrium curve as a graph over eps1."""
    a = params.a
    disc = a * a - 2.0 * SQRT2 * a * eps1**3
    if eps1 < 0 or disc < 0:
        raise DomainError("eps1 beyond the fold of the K1 equilibrium curve")
    # rationalized to avoid cancellation for small eps1
    return SQRT2 * a * eps1**3 / (a + math.sqrt(disc))


def k2_fold_point(params: Params) -> tuple:
    """``(omega2*, r2*) = (4/a, 2 sqrt(2)/a)``."""
    return 4.0 / params.a, 2.0 * SQRT2 / params.a


def k2_equilibrium_branches(r2: float, params: Params) -> tuple:
    """The two omega2 roots of the K2 equilibrium relation at height r2.

    Returns ``(omega_minus, omega_plus)``; at the fold the two coincide.
    """
    a = params.a
    if r2 <= 0:
        raise DomainError("r2 must be positive")
    disc = a * a * r2**4 - 2.0**1.5 * a * r2**3
    if disc < 0:
        # roundoff tolerance at the fold itself
        if disc > -1e-12 * (a * a * r2**4):
            disc = 0.0
        else:
            raise NoRealBranch(f"no real equilibria below r2* = {2 * SQRT2 / a:.12g}")
    s = math.sqrt(disc)
    return 0.5 * (a * r2 * r2 - s), 0.5 * (a * r2 * r2 + s)


def k2_fold_data(params: Params, h: float = 1e-4) -> dict:
    """Nondegeneracy quantities at the K2 fold.

    ``direct`` holds closed-form derivatives of the reduced K2 field,
    ``finite_difference`` the same by central differences of the full chart
    field, and ``quoted`` the values stated alongside the fold lemma in the
    source analysis (they differ from direct differentiation).
    """
    a = params.a
    w0, r0 = k2_fold_point(params)
    direct = {
        "f_omega_omega": 2.0,
        "f_r": -4.0 * SQRT2 / a,
        "g": -64.0 * SQRT2 / a**3,
    }
    fld = field_function(Frame.K2, params)

    def fw(w, r):
        return fld((w, r, 0.0))[0]

    # the slow equation carries a factor eta2^6; divide it out at small eta
    e = 1e-2

    def gw(w, r):
        return fld((w, r, e))[1] / e**6

    fd = {
        "f_omega_omega": (fw(w0 + h, r0) - 2 * fw(w0, r0) + fw(w0 - h, r0)) / (h * h),
        "f_r": (fw(w0, r0 + h) - fw(w0, r0 - h)) / (2 * h),
        "g": gw(w0, r0),
    }
    quoted = {
        "f_omega_omega": 8.0 / a,
        "f_r": -8.0 / (SQRT2 * a),
        "g": -128.0 / (a * SQRT2),
    }
    return {
        "fold": {"omega2": w0, "r2": r0},
        "direct": direct,
        "finite_difference": fd,
        "quoted": quoted,
        "nondegenerate": all(v != 0.0 for v in direct.values()),
    }


@dataclass(frozen=True)
class K3EquilibriumCurves:
    """The two lines of equilibria of the exit chart.

    ``eps3_of_r3`` / ``r3_of_eps3`` describe the line in ``{eta3 = 0}``,
    ``r3_of_eta3`` the line in ``{eps3 = 0}``.  Both pass through
    ``E = (0, 1/sqrt(a), 0)``.
    """

    a: float

    @property
    def E(self) -> tuple:
        return (0.0, 1.0 / math.sqrt(self.a), 0.0)

    def relation(self, r3: float, eps3: float) -> float:
        a = self.a
        return a * r3 * r3 - 1.0 - a / SQRT2 * eps3**3 * r3**3

    def eps3_of_r3(self, r3: float) -> float:
        a = self.a
        if r3 <= 0:
            raise NoRoot("r3 must be positive")
        num = SQRT2 * (a * r3 * r3 - 1.0)
        if num < -1e-12:
            raise NoRoot("no eps3 >= 0 for r3 below 1/sqrt(a)")
        num = max(num, 0.0)
        return (num / (a * r3**3)) ** (1.0 / 3.0)

    def r3_of_eps3(self, eps3: float, tol: float = 1e-15) -> float:
        """Smallest positive root r3 of the cubic relation, by bisection.

        For small eps3 the root sits within O(eps3**3) of ``1/sqrt(a)``, so
        ``tol`` is close to machine precision to keep ``eps3_of_r3`` an
        accurate inverse.
        """
        if eps3 < 0:
            raise NoRoot("eps3 must be nonnegative")
        lo = 1.0 / math.sqrt(self.a)
        if eps3 == 0.0:
            return lo
        # the relation is positive just above lo and eventually negative;
        # its maximum over r3 sits at r = 2 sqrt(2) / (3 eps3^3)
        peak = 2.0 * SQRT2 / (3.0 * eps3**3)
        if peak <= lo or self.relation(peak, eps3) < 0:
            raise NoRoot(f"no equilibrium in eta3 = 0 with eps3 = {eps3}")
        hi = peak
        f_lo = self.relation(lo, eps3)
        if f_lo == 0.0:
            return lo
        # hi starts far out for small eps3; judge convergence against lo
        for _ in range(2000):
            if hi - lo <= tol * lo:
                break
            mid = 0.5 * (lo + hi)
            if mid in (lo, hi):
                break
            if (self.relation(mid, eps3) < 0) == (f_lo < 0):
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)

    def r3_of_eta3(self, eta3: float) -> float:
        from .frames import H

        x = eta3**6
        d = math.cos(x) - math.sin(x)
        return math.sqrt(d * H(x) / self.a)


def k3_equilibrium_curves(params: Params) -> K3EquilibriumCurves:
    return K3EquilibriumCurves(params.a)


# ---------------------------------------------------------------------------
# K1 centre manifold


@dataclass
class MonotoneCheck:
    """Outcome of :func:`verify_k1_monotone_eta`."""

    ok: bool
    strictly_decreasing: bool
    constant: bool
    product_drift: float
    times: np.ndarray
    states: np.ndarray


def verify_k1_monotone_eta(
    start: ChartPoint,
    params: Params,
    config: IntegratorConfig | None = None,
    duration: float = 100.0,
) -> MonotoneCheck:
    """Integrate the K1 field and check that eta1 decreases while eta1 eps1 is conserved.

    With ``eta1 = 0`` the plane is invariant and eta1 must stay constant;
    ``ok`` reports the relevant property together with conservation of the
    product to 1e-8 relative.
    """
    if start.chart is not Frame.K1:
        raise ValueError("start must be a K1 point")
    w1, e, c1 = start.coords
    if e < 0 or c1 < 0:
        raise DomainError("eta1 and eps1 must be nonnegative")
    cfg = config or IntegratorConfig()
    fun = field_function(Frame.K1, params)
    res = solve(fun, list(start.coords), duration, cfg)
    Y = np.array(res.ys)
    eta = Y[:, 1]
    prod = Y[:, 1] * Y[:, 2]
    p0 = e * c1
    drift = float(np.max(np.abs(prod - p0)) / p0) if p0 > 0 else float(np.max(np.abs(prod)))
    dec = bool(np.all(np.diff(eta) < 0))
    const = bool(np.all(eta == eta[0]))
    ok = (dec if e > 0 else const) and drift <= 1e-8
    return MonotoneCheck(ok, dec, const, drift, np.array(res.times), Y)


# ---------------------------------------------------------------------------
# exit chart bounds


@dataclass(frozen=True)
class AppendixBConstants:
    """Constants of the exit-chart estimates.

    ``delta`` is the eta3 value of the exit section; the trapping region
    has ``eps3 <= gamma_out`` and ``r3 <= beta_out``; ``k0`` bounds the
    conserved product ``eta3 eps3``.
    """

    a: float
    delta: float
    k0: float
    gamma_out: float
    beta_out: float
    C: float
    D: float
    F: float
    K: float
    C_tilde: float
    D_tilde: float
    c1: float
    c2: float
    d1: float
    d2: float

    def as_dict(self) -> dict:
        return asdict(self)


def appendix_b_constants(
    delta: float = 0.2,
    k0: Optional[float] = None,
    gamma_out: float = 0.3,
    beta_out: float = 0.3,
    params: Params = Params(0.5, 0.0),
    alpha_out: float = 0.15,
) -> AppendixBConstants:
    """Evaluate the exit-chart constants.

    ``k0`` defaults to ``alpha_out * gamma_out``, the largest product
    ``eta3 eps3`` reachable from the entry section.  ``c2`` carries no
    factor ``K**2`` from the decay estimate of ``r3**2``, so the upper
    hitting-time bound is only reliable for small ``beta_out``; at a = 0.5
    it starts failing near r3 = 0.39, hence the default 0.3.

    Raises
    ------
    ValueError
        If ``F <= beta_out``, ``D_tilde <= 0``, ``beta_out >= 1`` or delta is
        outside ``(0, 0.1**(1/6))``.
    """
    a = params.a
    if k0 is None:
        k0 = alpha_out * gamma_out
    if not 0.0 < delta < 0.1 ** (1.0 / 6.0):
        raise ValueError("delta must lie in (0, 0.1**(1/6))")
    if min(k0, gamma_out, beta_out) < 0:
        raise ValueError("k0, gamma_out and beta_out must be nonnegative")
    if beta_out >= 1.0:
        raise ValueError("beta_out must be below 1")
    d6 = delta**6
    C = (1 - 2 * d6) ** 3 * (0.5 - d6)
    D = (1 + d6) * ((a + k0 * k0) / 2 + d6 * k0 * k0)
    F = math.sqrt(C / D)
    if not F * F > beta_out * beta_out:
        raise ValueError(f"beta_out = {beta_out} must lie below F = {F:.6g}")
    K = F * F / (F * F - beta_out * beta_out)
    Ct = (1 + d6) / 2
    Dt = a * (1 - 2 * d6 - gamma_out**3 / SQRT2) / 2
    if Dt <= 0:
        raise ValueError("gamma_out too large: D_tilde must be positive")
    d1 = 1.0 / (1 + d6)
    d2 = (1 - 2 * d6) ** -3
    c1 = a * gamma_out**3 * K**3 / (3 * SQRT2 * C)
    c2 = d2 * (1 + d6) * (a + k0 * k0) / (2 * C)
    return AppendixBConstants(a, delta, k0, gamma_out, beta_out, C, D, F, K, Ct, Dt, c1, c2, d1, d2)


@dataclass
class ExitBoundsResult:
    start: tuple
    T_plus: float
    lower: float
    upper: float
    time_ok: bool
    sandwich_ok: bool
    r3_exit: float

    @property
    def ok(self) -> bool:
        return self.time_ok and self.sandwich_ok

    def as_dict(self) -> dict:
        d = asdict(self)
        d["start"] = list(self.start)
        d["ok"] = self.ok
        return d


def hitting_time_bounds(eta0: float, r0: float, k: AppendixBConstants) -> tuple:
    """``(lower, upper)`` bounds on the exit time from the entry section."""
    L = 6.0 * math.log(k.delta / eta0)
    return k.d1 * L - k.c1 * r0**3, k.d2 * L + k.c2 * r0**2


def _exit_run(start, k: AppendixBConstants, config: IntegratorConfig):
    params = Params(k.a, 0.0)
    fun = field_function(Frame.K3, params)
    ev = EventSpec(lambda z: z[0] - k.delta, Direction.RISING, name="exit")
    # generous cap: the upper bound plus slack
    eta0, r0, _ = start
    cap = 10.0 * (hitting_time_bounds(eta0, r0, k)[1] + 1.0)
    res = solve(fun, list(start), cap, config, events=[ev])
    if res.status != "event":
        raise RegionEscape("none", res.y, res.t)
    return res


def _check_region(Y, T, k: AppendixBConstants, slack: float = 1e-12):
    faces = (
        ("eps3 > gamma_out", Y[:, 2] > k.gamma_out * (1 + 1e-9) + slack),
        ("r3 > beta_out", Y[:, 1] > k.beta_out * (1 + 1e-9) + slack),
        ("eta3 < 0", Y[:, 0] < -slack),
        ("r3 < 0", Y[:, 1] < -slack),
        ("eps3 < 0", Y[:, 2] < -slack),
    )
    for name, bad in faces:
        if np.any(bad):
            i = int(np.argmax(bad))
            raise RegionEscape(name, Y[i], float(T[i]))


def verify_exit_bounds(
    initial: ChartPoint,
    constants: AppendixBConstants,
    config: IntegratorConfig | None = None,
    rel_slack: float = 1e-9,
) -> ExitBoundsResult:
    """Integrate the exit chart to ``eta3 = delta`` and test the estimates.

    The hitting time must satisfy the logarithmic bounds and every recorded
    r3 sample must lie in ``r0 exp(-C~ t) <= r3 <= K r0 exp(-C t)`` (up to a
    relative slack covering integration error).

    Raises
    ------
    RegionEscape
        If the orbit leaves the trapping region through a forbidden face.
    """
    if initial.chart is not Frame.K3:
        raise ValueError("initial point must be a K3 point")
    k = constants
    eta0, r0, c0 = initial.coords
    if not eta0 > 0:
        raise DomainError("eta3 must be positive on the entry section")
    if not (0 <= r0 <= k.beta_out and 0 <= c0 <= k.gamma_out and eta0 <= k.delta):
        raise DomainError("initial point outside the trapping region")
    cfg = config or IntegratorConfig()
    lower, upper = hitting_time_bounds(eta0, r0, k)
    if eta0 == k.delta:
        return ExitBoundsResult(initial.coords, 0.0, lower, upper, lower <= 0.0 <= upper, True, r0)
    res = _exit_run(initial.coords, k, cfg)
    T = np.array(res.times + [res.t])
    Y = np.array(res.ys + [res.y])
    _check_region(Y, T, k)
    r = Y[:, 1]
    lo_env = r0 * np.exp(-k.C_tilde * T)
    hi_env = k.K * r0 * np.exp(-k.C * T)
    sandwich = bool(np.all(r >= lo_env * (1 - rel_slack)) and np.all(r <= hi_env * (1 + rel_slack)))
    Tp = float(res.t)
    return ExitBoundsResult(initial.coords, Tp, lower, upper, lower <= Tp <= upper, sandwich, float(res.y[1]))


def sample_exit_initials(
    n: int,
    constants: AppendixBConstants,
    eta_range: tuple = (0.01, 0.15),
    seed: int = 0,
) -> list:
    """Deterministic random points ``(eta3, r3, gamma_out)`` on the entry section."""
    if n < 1:
        raise ValueError("need at least one sample")
    rng = np.random.default_rng(seed)
    eta = rng.uniform(*eta_range, size=n)
    r = rng.uniform(0.0, constants.beta_out, size=n)
    return [ChartPoint(Frame.K3, (float(e), float(x), constants.gamma_out)) for e, x in zip(eta, r)]


def exit_bounds_report(
    constants: AppendixBConstants,
    samples: int = 20,
    config: IntegratorConfig | None = None,
    seed: int = 0,
) -> dict:
    """Run :func:`verify_exit_bounds` on sampled starts; JSON-ready dict."""
    rows = []
    for p in sample_exit_initials(samples, constants, seed=seed):
        try:
            rows.append(verify_exit_bounds(p, constants, config).as_dict())
        except RegionEscape as exc:
            rows.append({"start": list(p.coords), "ok": False, "escape": exc.face})
    return {
        "constants": constants.as_dict(),
        "initials": rows,
        "ok": all(r["ok"] for r in rows),
    }


def exit_image(eta0: float, r0: float, constants: AppendixBConstants, config: IntegratorConfig | None = None) -> float:
    """``rbar`` at the exit section, ``r3 * delta**3``, from ``(eta0, r0, gamma_out)``."""
    k = constants
    if r0 == 0.0:
        return 0.0
    res = _exit_run((eta0, r0, k.gamma_out), k, config or IntegratorConfig())
    return float(res.y[1]) * k.delta**3


def exit_image_scaling(
    params: Params = Params(0.5, 0.0),
    config: IntegratorConfig | None = None,
    r0: float = 0.25,
    etas: Sequence[float] = (0.02, 0.04, 0.08, 0.12),
    constants: Optional[AppendixBConstants] = None,
):
    """Fit the exit image against the entry value of eta3; the slope should be near 3."""
    from .sweep import fit_power_law

    k = constants or appendix_b_constants(params=params)
    vals = [exit_image(e, r0, k, config) for e in etas]
    return fit_power_law(list(zip(etas, vals)))


def dump_report(report: dict, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
