"""Command-line front end.

Commands write CSV/JSON (and optionally SVG) into ``--out``.  Exit codes:
0 all checks passed, 1 a check failed, 2 bad usage, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from datetime import datetime, timezone
from typing import Optional, Sequence

import numpy as np

from .flow import IntegrationError, IntegratorConfig, integrate
from .frames import (
    ADJACENT_PAIRS,
    DomainError,
    Frame,
    FrameState,
    Params,
    SingularTransformError,
    pushforward_defect,
    round_trip_error,
    sample_state,
    transform_state,
)
from .geometry import (
    CurvePolyline,
    rescaled_to_xy_bar,
    sigma_curves,
    singular_cycle,
    truncated_sigma_bar,
    write_polylines_csv,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3

_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf")


class UsageError(ValueError):
    pass


# ---------------------------------------------------------------------------
# output helpers


def write_json(path, obj, timestamp: bool = True) -> None:
    if timestamp:
        obj = {**obj, "generated": datetime.now(timezone.utc).isoformat()}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, ensure_ascii=False)
        fh.write("\n")


def write_svg(path, series, xlabel: str, ylabel: str, title: str = "", width=640, height=480) -> None:
    """Write polylines as a bare SVG plot.

    ``series`` is a sequence of ``(label, points)`` with points of shape
    ``(N, 2)``.  Axis extents come from the data; only the extreme tick
    values are printed.
    """
    pts = [np.asarray(p, dtype=float) for _, p in series]
    allp = np.vstack([p[np.all(np.isfinite(p), axis=1)] for p in pts])
    lo, hi = allp.min(axis=0), allp.max(axis=0)
    span = np.where(hi > lo, hi - lo, 1.0)
    lo, hi = lo - 0.03 * span, hi + 0.03 * span
    span = hi - lo
    ml, mr, mt, mb = 70, 20, 30, 50
    pw, ph = width - ml - mr, height - mt - mb

    def sx(x):
        return ml + (x - lo[0]) / span[0] * pw

    def sy(y):
        return mt + ph - (y - lo[1]) / span[1] * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
        f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
        f'<text x="{ml + pw / 2}" y="{height - 10}" text-anchor="middle">{xlabel}</text>',
        f'<text x="15" y="{mt + ph / 2}" text-anchor="middle" '
        f'transform="rotate(-90 15 {mt + ph / 2})">{ylabel}</text>',
        f'<text x="{ml}" y="{mt + ph + 16}" text-anchor="start">{lo[0]:.4g}</text>',
        f'<text x="{ml + pw}" y="{mt + ph + 16}" text-anchor="end">{hi[0]:.4g}</text>',
        f'<text x="{ml - 4}" y="{mt + ph}" text-anchor="end">{lo[1]:.4g}</text>',
        f'<text x="{ml - 4}" y="{mt + 10}" text-anchor="end">{hi[1]:.4g}</text>',
    ]
    if title:
        out.append(f'<text x="{ml + pw / 2}" y="18" text-anchor="middle">{title}</text>')
    for k, ((label, _), p) in enumerate(zip(series, pts)):
        col = _COLORS[k % len(_COLORS)]
        p = p[np.all(np.isfinite(p), axis=1)]
        coords = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in p)
        out.append(f'<polyline fill="none" stroke="{col}" stroke-width="1.2" points="{coords}"/>')
        out.append(f'<text x="{ml + pw - 6}" y="{mt + 16 + 14 * k}" text-anchor="end" fill="{col}">{label}</text>')
    out.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(out) + "\n")


def _floats(text: str, what: str) -> list:
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"{what} must be comma-separated numbers, got {text!r}") from None
    if not vals:
        raise UsageError(f"{what} is empty")
    return vals


def _params(args) -> Params:
    if not args.a > 0:
        raise UsageError("--a must be positive")
    if not args.epsilon > 0:
        raise UsageError("--epsilon must be positive")
    return Params(args.a, args.epsilon)


def _config(args) -> IntegratorConfig:
    if not (args.rel_tol > 0 and args.abs_tol > 0):
        raise UsageError("tolerances must be positive")
    return IntegratorConfig(rel_tol=args.rel_tol, abs_tol=args.abs_tol)


def _orig_xy(poly: CurvePolyline, eps: float) -> np.ndarray:
    """(theta, rbar) samples to the unscaled fast-frame plane."""
    return rescaled_to_xy_bar(poly).points / math.sqrt(eps)


# ---------------------------------------------------------------------------
# commands


def cmd_simulate(args) -> int:
    params = _params(args)
    cfg = _config(args)
    try:
        frame = Frame[args.frame.upper()]
    except KeyError:
        raise UsageError(f"unknown frame {args.frame!r}") from None
    if not args.duration > 0:
        raise UsageError("--duration must be positive")
    if args.start:
        start = FrameState(frame, _floats(args.start, "--start"))
    else:
        z = FrameState(Frame.RESCALED, (math.pi / 4 + 0.15, 0.2))
        start = transform_state(z, frame, params)
    tr = integrate(start, args.duration, params, cfg)
    tr.to_csv(os.path.join(args.out, "trajectory.csv"))
    if args.plot:
        names = frame.coord_names
        write_svg(
            os.path.join(args.out, "trajectory.svg"),
            [("trajectory", tr.resample(4)[:, :2])],
            f"{names[0]} ({frame.value})",
            f"{names[1]} ({frame.value}, clock {frame.clock.value})",
            f"a = {params.a}, eps = {params.epsilon}",
        )
    summary = {
        "command": "simulate",
        "frame": frame.value,
        "start": list(start.coords),
        "final": list(tr.final_state.coords),
        "ledger": tr.final_ledger.as_dict(),
        "samples": int(len(tr.times)),
    }
    write_json(os.path.join(args.out, "simulate.json"), summary, not args.no_timestamp)
    return EXIT_OK


def cmd_cycle(args) -> int:
    from .poincare import fixed_point

    params = _params(args)
    cyc = fixed_point(params, _config(args))
    pl_name = "cycle_polyline.csv"
    write_polylines_csv(
        os.path.join(args.out, pl_name),
        [cyc.polyline] + [cyc.branch_polylines[b] for b in sorted(cyc.branch_polylines)],
    )
    doc = cyc.to_json(pl_name)
    doc["command"] = "cycle"
    write_json(os.path.join(args.out, "cycle.json"), doc, not args.no_timestamp)
    if args.plot:
        eps = params.epsilon
        if args.rescaled:
            series = [("cycle (rescaled)", rescaled_to_xy_bar(cyc.polyline).points)]
            for c, k in zip(truncated_sigma_bar(params, cyc.rho_eps), (2, 3, 4)):
                series.append((f"sigma-bar {k}", c.points))
            xl, yl = "sqrt(eps) x (XYFAST, clock t)", "sqrt(eps) y"
        else:
            series = [("cycle", _orig_xy(cyc.polyline, eps))]
            curves = sigma_curves(params, cyc.rho_eps)
            ymax = 1.5 * np.max(series[0][1][:, 1])
            for k in sorted(curves):
                P = curves[k].points
                series.append((k.replace("sigma", "sigma "), P[P[:, 1] <= ymax]))
            xl, yl = "x (XYFAST, clock t)", "y"
        write_svg(os.path.join(args.out, "cycle.svg"), series, xl, yl, f"a = {params.a}, eps = {eps}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    from .sweep import SweepPlan, dump_json, fit_power_law, run_sweep, scaling_report

    params = _params(args)
    cfg = _config(args)
    grid = tuple(_floats(args.grid, "--grid")) if args.grid else None
    if args.quantity == "report":
        kw = {} if grid is None else {"grid": grid}
        rep = scaling_report(params, cfg, **kw)
        rep["command"] = "sweep"
        write_json(os.path.join(args.out, "scaling_report.json"), rep, not args.no_timestamp)
        return EXIT_OK if rep["pass"] else EXIT_FAIL
    kw = {} if grid is None else {"grid": grid}
    plan = SweepPlan(params=params, quantity=args.quantity, config=cfg, **kw)
    table = run_sweep(plan)
    table.to_csv(os.path.join(args.out, "sweep.csv"))
    doc = {"command": "sweep", "table": table.as_dict()}
    try:
        doc["fit"] = fit_power_law(table).as_dict()
    except ValueError as exc:
        doc["fit"] = {"error": str(exc)}
    write_json(os.path.join(args.out, "sweep.json"), doc, not args.no_timestamp)
    return EXIT_OK if all(s == "ok" for s in table.status) else EXIT_FAIL


def cmd_charts_check(args) -> int:
    from .blowup import k2_fold_data

    params = _params(args)
    if args.samples < 1:
        raise UsageError("--samples must be positive")
    rng = np.random.default_rng(args.seed)
    pairs = {}
    ok = True
    for s, t in ADJACENT_PAIRS:
        pf = rt = 0.0
        for _ in range(args.samples):
            z = sample_state(s, rng, params)
            pf = max(pf, pushforward_defect(z, t, params))
            rt = max(rt, round_trip_error(z, t, params), round_trip_error(transform_state(z, t, params), s, params))
        good = pf <= 1e-6 and rt <= 1e-12
        ok &= good
        pairs[f"{s.value}->{t.value}"] = {"pushforward": pf, "round_trip": rt, "pass": good}
    fold = k2_fold_data(params)
    ok &= fold["nondegenerate"]
    doc = {
        "command": "charts-check",
        "params": {"a": params.a, "epsilon": params.epsilon},
        "samples": args.samples,
        "pairs": pairs,
        "k2_fold": fold,
        "pass": bool(ok),
    }
    write_json(os.path.join(args.out, "charts_check.json"), doc, not args.no_timestamp)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_bounds_check(args) -> int:
    from .blowup import appendix_b_constants, exit_bounds_report, exit_image_scaling

    params = _params(args)
    if args.samples < 1:
        raise UsageError("--samples must be positive")
    k = appendix_b_constants(delta=args.delta, params=params)
    cfg = _config(args)
    rep = exit_bounds_report(k, args.samples, cfg, seed=args.seed)
    fit = exit_image_scaling(params, cfg, constants=k)
    rep["exit_image"] = {"fit": fit.as_dict(), "band": [2.7, 3.3], "pass": 2.7 <= fit.slope <= 3.3}
    rep["pass"] = bool(rep["ok"] and rep["exit_image"]["pass"])
    rep["command"] = "bounds-check"
    write_json(os.path.join(args.out, "bounds_check.json"), rep, not args.no_timestamp)
    return EXIT_OK if rep["pass"] else EXIT_FAIL


def cmd_export(args) -> int:
    params = _params(args)
    sc = singular_cycle(params)
    write_polylines_csv(os.path.join(args.out, "singular_cycle.csv"), list(sc.branches))
    rho = args.rho_eps
    if rho is None:
        from .poincare import fixed_point

        rho = fixed_point(params, _config(args)).rho_eps
    if not rho > 0:
        raise UsageError("--rho-eps must be positive")
    curves = sigma_curves(params, rho, rescaled=args.rescaled)
    write_polylines_csv(os.path.join(args.out, "sigma_curves.csv"), [curves[k] for k in sorted(curves)])
    if args.plot:
        write_svg(
            os.path.join(args.out, "singular_cycle.svg"),
            [(b.label, b.points) for b in sc.branches],
            "theta (RESCALED, clock t2)",
            "rbar",
            f"a = {params.a}",
        )
    doc = {"command": "export", "params": {"a": params.a, "epsilon": params.epsilon}, "rho_eps": rho}
    write_json(os.path.join(args.out, "export.json"), doc, not args.no_timestamp)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--a", type=float, default=0.5, help="feed parameter a (default 0.5)")
    common.add_argument("--epsilon", type=float, default=0.1, help="small parameter (default 0.1)")
    common.add_argument("--out", default=".", help="output directory")
    common.add_argument("--rel-tol", type=float, default=1e-10)
    common.add_argument("--abs-tol", type=float, default=1e-12)
    common.add_argument("--plot", action="store_true", help="also write SVG plots")
    common.add_argument("--rescaled", action="store_true", help="use sqrt(eps)-rescaled curves")
    common.add_argument("--no-timestamp", action="store_true", help="omit the generation time from JSON")

    p = _Parser(prog="brusselator-gsp", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("simulate", parents=[common], help="integrate one trajectory")
    s.add_argument("--frame", default="XY", help="frame name, e.g. XY, RESCALED, K2")
    s.add_argument("--start", help="comma-separated initial coordinates")
    s.add_argument("--duration", type=float, default=50.0, help="length in the frame's clock")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("cycle", parents=[common], help="locate the limit cycle")
    s.set_defaults(func=cmd_cycle)

    s = sub.add_parser("sweep", parents=[common], help="epsilon sweep or full scaling report")
    s.add_argument("--quantity", default="report", help="report | rho_eps | dwell:<branch>:<clock> | ...")
    s.add_argument("--grid", help="comma-separated grid values")
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("charts-check", parents=[common], help="frame and chart coherence")
    s.add_argument("--samples", type=int, default=100)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_charts_check)

    s = sub.add_parser("bounds-check", parents=[common], help="exit-chart hitting-time bounds")
    s.add_argument("--delta", type=float, default=0.2)
    s.add_argument("--samples", type=int, default=20)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_bounds_check)

    s = sub.add_parser("export", parents=[common], help="singular cycle and sigma curves")
    s.add_argument("--rho-eps", type=float, help="fibre height (default: measured)")
    s.set_defaults(func=cmd_export)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        os.makedirs(args.out, exist_ok=True)
        return args.func(args)
    except (IntegrationError, DomainError, SingularTransformError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (UsageError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
