"""Epsilon sweeps and log-log power-law fits.

A sweep runs one measurement pipeline independently at each grid value and
tabulates the result; :func:`fit_power_law` turns a table into an exponent.
:func:`scaling_report` bundles every scaling check into one report with a
pass flag per tolerance band.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .flow import IntegratorConfig, extract_slow_manifold
from .frames import QUARTER_PI, Params
from .geometry import phi0, phi1, s1_expansion
from .poincare import BRANCHES, DwellTrim, LimitCycle, fixed_point, fold_deviation

__all__ = [
    "DEFAULT_GRID",
    "QUANTITIES",
    "SweepPlan",
    "SweepTable",
    "PowerLawFit",
    "run_sweep",
    "fit_power_law",
    "scaling_report",
    "s1_offset",
    "s2_residual",
]

DEFAULT_GRID = (0.02, 0.03, 0.05, 0.07, 0.1, 0.15)
ETA_GRID = (0.02, 0.04, 0.08, 0.12)
EPS_RANGE = (1e-3, 0.2)
QUANTITIES = ("rho_eps", "dwell", "slow_manifold_residual", "fold_deviation", "exit_image")
CLOCKS = ("tau", "t", "t1", "t2", "tau2")


@dataclass(frozen=True)
class SweepPlan:
    """What to measure and where.

    ``quantity`` is one of ``rho_eps``, ``dwell:<branch>:<clock>``,
    ``slow_manifold_residual:<S1|S2>``, ``fold_deviation`` or
    ``exit_image``.  For ``exit_image`` the grid holds entry values of eta3
    instead of epsilon.
    """

    params: Params = Params(0.5, 0.1)
    grid: tuple = DEFAULT_GRID
    quantity: str = "rho_eps"
    config: Optional[IntegratorConfig] = None
    trim: DwellTrim = DwellTrim()

    def __post_init__(self):
        g = tuple(float(x) for x in self.grid)
        object.__setattr__(self, "grid", g)
        if not g:
            raise ValueError("empty grid")
        if any(b <= a for a, b in zip(g, g[1:])):
            raise ValueError("grid must be strictly increasing")
        kind, args = parse_quantity(self.quantity)
        if kind == "exit_image":
            if g[0] <= 0 or g[-1] >= 0.2:
                raise ValueError("eta3 grid must lie in (0, 0.2)")
        elif g[0] < EPS_RANGE[0] or g[-1] > EPS_RANGE[1]:
            raise ValueError(f"epsilon grid must lie in [{EPS_RANGE[0]}, {EPS_RANGE[1]}]")

    @property
    def variable(self) -> str:
        return "eta3" if self.quantity == "exit_image" else "epsilon"


def parse_quantity(q: str) -> tuple:
    parts = q.split(":")
    kind = parts[0]
    if kind not in QUANTITIES:
        raise ValueError(f"unknown quantity {q!r}")
    args = tuple(parts[1:])
    if kind == "dwell":
        if len(args) != 2 or args[0] not in BRANCHES or args[1] not in CLOCKS:
            raise ValueError(f"dwell needs branch and clock, e.g. dwell:sigma2:t, got {q!r}")
    elif kind == "slow_manifold_residual":
        if len(args) != 1 or args[0] not in ("S1", "S2"):
            raise ValueError("slow_manifold_residual needs S1 or S2")
    elif args:
        raise ValueError(f"{kind} takes no arguments")
    return kind, args


@dataclass
class SweepTable:
    """Rows ``(x, value, status)`` in grid order; failed rows carry NaN."""

    quantity: str
    variable: str
    x: list
    values: list
    status: list

    def valid(self) -> tuple:
        ok = [i for i, s in enumerate(self.status) if s == "ok"]
        return [self.x[i] for i in ok], [self.values[i] for i in ok]

    def as_dict(self) -> dict:
        return {
            "quantity": self.quantity,
            "variable": self.variable,
            "rows": [{"x": x, "value": v, "status": s} for x, v, s in zip(self.x, self.values, self.status)],
        }

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow([self.variable, "value", "status"])
            for x, v, s in zip(self.x, self.values, self.status):
                wr.writerow([f"{x:.17g}", f"{v:.17g}", s])


@dataclass(frozen=True)
class PowerLawFit:
    """Least-squares line through ``(log x, log value)``."""

    slope: float
    intercept: float
    r_squared: float
    residuals: tuple
    x: tuple
    values: tuple

    def as_dict(self) -> dict:
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "r_squared": self.r_squared,
            "residuals": list(self.residuals),
            "x": list(self.x),
            "values": list(self.values),
        }


def fit_power_law(table, min_points: int = 4) -> PowerLawFit:
    """Fit ``value = exp(intercept) * x**slope``.

    Parameters
    ----------
    table : SweepTable or sequence of (x, value)
        Failed rows of a SweepTable are skipped.

    Raises
    ------
    ValueError
        Fewer than ``min_points`` usable rows, or a nonpositive entry.
    """
    if isinstance(table, SweepTable):
        x, v = table.valid()
    else:
        pairs = list(table)
        x = [p[0] for p in pairs]
        v = [p[1] for p in pairs]
    if len(x) < min_points:
        raise ValueError(f"need at least {min_points} points, got {len(x)}")
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    if np.any(~np.isfinite(v)) or np.any(v <= 0) or np.any(x <= 0):
        raise ValueError("power-law fit needs strictly positive finite values")
    lx, lv = np.log(x), np.log(v)
    A = np.column_stack([lx, np.ones_like(lx)])
    (slope, icpt), *_ = np.linalg.lstsq(A, lv, rcond=None)
    res = lv - (slope * lx + icpt)
    ss_res = float(res @ res)
    ss_tot = float(((lv - lv.mean()) ** 2).sum())
    if ss_tot <= 1e-28 * max(1.0, float(lv @ lv)):
        r2 = 1.0 if ss_res <= 1e-24 else 0.0
    else:
        r2 = min(1.0, max(0.0, 1.0 - ss_res / ss_tot))
    return PowerLawFit(float(slope), float(icpt), r2, tuple(res.tolist()), tuple(x.tolist()), tuple(v.tolist()))


# ---------------------------------------------------------------------------
# measurement pipelines


def s2_residual(params: Params, config=None, samples: int = 101) -> float:
    """Max over the S2 window of ``|rbar_num - phi0 - eps phi1|``."""
    pl = extract_slow_manifold("S2", params, config=config, samples=samples)
    th, r = pl.points[:, 0], pl.points[:, 1]
    ref = np.array([phi0(t, params) + params.epsilon * phi1(t, params) for t in th])
    return float(np.max(np.abs(r - ref)))


def s1_offset(params: Params, r: float = 0.4, config=None) -> float:
    """Measured ``theta - pi/4`` on the attracting S1 manifold at radius r."""
    lo, hi = min(0.2, r - 0.05), max(0.45, r + 0.02)
    pl = extract_slow_manifold("S1", params, window=(lo, hi), config=config, samples=61)
    P = pl.points
    order = np.argsort(P[:, 1])
    return float(np.interp(r, P[order, 1], P[order, 0]) - QUARTER_PI)


def s1_residual(params: Params, config=None) -> float:
    pl = extract_slow_manifold("S1", params, config=config, samples=61)
    P = pl.points
    ref = np.array([s1_expansion(r, params) for r in P[:, 1]])
    return float(np.max(np.abs(P[:, 0] - ref)))


def _cycle(plan: SweepPlan, eps: float, cache: Optional[dict]) -> LimitCycle:
    if cache is not None and eps in cache:
        return cache[eps]
    cyc = fixed_point(plan.params.with_epsilon(eps), plan.config, trim=plan.trim)
    if cache is not None:
        cache[eps] = cyc
    return cyc


def _measure(plan: SweepPlan, x: float, cache: Optional[dict]) -> float:
    kind, args = parse_quantity(plan.quantity)
    if kind == "rho_eps":
        return _cycle(plan, x, cache).rho_eps
    if kind == "dwell":
        cyc = _cycle(plan, x, cache)
        if args[0] not in cyc.dwell:
            raise LookupError(f"trimmed sections of {args[0]} not crossed")
        return getattr(cyc.dwell[args[0]], args[1])
    p = plan.params.with_epsilon(x) if kind != "exit_image" else plan.params
    if kind == "slow_manifold_residual":
        return s2_residual(p, plan.config) if args[0] == "S2" else s1_residual(p, plan.config)
    if kind == "fold_deviation":
        return fold_deviation(p, plan.config)
    from .blowup import appendix_b_constants, exit_image

    return exit_image(x, 0.25, appendix_b_constants(params=plan.params), plan.config)


def run_sweep(plan: SweepPlan, cache: Optional[dict] = None) -> SweepTable:
    """Measure ``plan.quantity`` at every grid value.

    A failure at one grid value is recorded in the status column (value
    NaN) and the sweep continues.  ``cache`` may map epsilon to an already
    computed :class:`LimitCycle`; it is filled as cycles are found.
    """
    vals, stat = [], []
    for x in plan.grid:
        try:
            v = float(_measure(plan, x, cache))
            vals.append(v)
            stat.append("ok" if math.isfinite(v) else "nonfinite")
        except Exception as exc:  # recorded per row, sweep continues
            vals.append(math.nan)
            stat.append(f"error: {type(exc).__name__}: {exc}")
    return SweepTable(plan.quantity, plan.variable, list(plan.grid), vals, stat)


# ---------------------------------------------------------------------------
# report


@dataclass
class Check:
    name: str
    kind: str  # "slope" | "ratio" | "relative"
    band: tuple
    value: float
    passed: bool
    detail: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "kind": self.kind,
            "band": list(self.band),
            "value": self.value,
            "pass": self.passed,
            "detail": self.detail,
        }


def _slope_check(name, table: SweepTable, lo, hi, min_r2=None) -> Check:
    try:
        fit = fit_power_law(table)
    except ValueError as exc:
        return Check(name, "slope", (lo, hi), math.nan, False, {"error": str(exc), "table": table.as_dict()})
    ok = lo <= fit.slope <= hi and (min_r2 is None or fit.r_squared >= min_r2)
    det = {"fit": fit.as_dict(), "table": table.as_dict()}
    if min_r2 is not None:
        det["min_r_squared"] = min_r2
    return Check(name, "slope", (lo, hi), fit.slope, ok, det)


def _ratio_check(name, table: SweepTable, bound) -> Check:
    _, v = table.valid()
    if len(v) < len(table.x) or min(v, default=0) <= 0:
        return Check(name, "ratio", (1.0, bound), math.nan, False, {"table": table.as_dict()})
    ratio = max(v) / min(v)
    return Check(name, "ratio", (1.0, bound), ratio, ratio <= bound, {"table": table.as_dict()})


def scaling_report(
    params: Params = Params(0.5, 0.1),
    config: IntegratorConfig | None = None,
    grid: Sequence[float] = DEFAULT_GRID,
    cache: Optional[dict] = None,
) -> dict:
    """Run every scaling experiment and compare with its tolerance band.

    The bands are engineering choices for desk-scale epsilon, not constants
    taken from the asymptotic statements.
    """
    cache = {} if cache is None else cache
    base = dict(params=params, grid=tuple(grid), config=config)

    def table(q, **kw):
        return run_sweep(SweepPlan(quantity=q, **{**base, **kw}), cache)

    checks = [_slope_check("rho_eps", table("rho_eps"), 1.35, 1.65, min_r2=0.98)]
    bands_t = {"sigma1": (2.6, 3.4), "sigma2": (-1.25, -0.75), "sigma4": (-1.75, -1.25)}
    for b in BRANCHES:
        tb = table(f"dwell:{b}:t")
        if b == "sigma3":
            checks.append(_ratio_check("dwell_t_sigma3", tb, 3.0))
        else:
            checks.append(_slope_check(f"dwell_t_{b}", tb, *bands_t[b]))
    for b in BRANCHES:
        tb = table(f"dwell:{b}:t2")
        if b in ("sigma1", "sigma3"):
            checks.append(_ratio_check(f"dwell_t2_{b}", tb, 3.0))
        else:
            checks.append(_slope_check(f"dwell_t2_{b}", tb, *bands_t[b]))
    checks.append(_slope_check("s2_residual", table("slow_manifold_residual:S2"), 1.25, math.inf))
    # first-order S1 offset at r = 0.4
    rel = {}
    for e in (0.05, 0.1):
        p = params.with_epsilon(e)
        meas = s1_offset(p, 0.4, config)
        pred = s1_expansion(0.4, p) - QUARTER_PI
        rel[str(e)] = {"measured": meas, "predicted": pred, "relative_error": abs(meas / pred - 1.0)}
    worst = max(v["relative_error"] for v in rel.values())
    checks.append(Check("s1_offset", "relative", (0.0, 0.25), worst, worst <= 0.25, rel))
    checks.append(_slope_check("fold_deviation", table("fold_deviation"), 0.5, 0.85))
    checks.append(_slope_check("exit_image", table("exit_image", grid=ETA_GRID), 2.7, 3.3))
    return {
        "params": {"a": params.a},
        "grid": list(grid),
        "checks": {c.name: c.as_dict() for c in checks},
        "pass": all(c.passed for c in checks),
        "note": "tolerance bands are engineering choices for desk-scale epsilon",
    }


def dump_json(obj, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, allow_nan=True)
