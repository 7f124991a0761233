"""Transverse sections, transition maps, return map and the limit cycle.

All integration happens in the RESCALED frame ``(theta, rbar)`` with clock
t2.  A circuit starts on the section at ``theta = pi/4 + alpha1`` and visits
the auxiliary section near ``pi/2``, the fibre arc through S2, the segment
beyond the fold and the section at ``rbar = beta4`` before returning.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .flow import (
    Direction,
    EventSpec,
    IntegrationError,
    IntegratorConfig,
    NoCrossing,
    OrderingViolation,
    TimeLedger,
    _run,
    integrate_to_event,
)
from .frames import HALF_PI, QUARTER_PI, Frame, FrameState, Params
from .geometry import CurvePolyline, phi0

__all__ = [
    "SectionSpec",
    "Sections",
    "DwellTrim",
    "ReturnResult",
    "LimitCycle",
    "ContractionEstimate",
    "NonConvergence",
    "build_sections",
    "transition_map",
    "return_map",
    "fixed_point",
    "contraction_estimate",
    "dwell_times",
    "fold_deviation",
    "rescaled_divergence",
    "BRANCHES",
]

BRANCHES = ("sigma1", "sigma2", "sigma3", "sigma4")


class NonConvergence(IntegrationError):
    pass


@dataclass(frozen=True)
class SectionSpec:
    """A bounded transverse section in the RESCALED frame.

    Attributes
    ----------
    id : str
        One of ``S1``, ``S1b``, ``S2``, ``S3``, ``S4``.
    anchor : FrameState
        Reference point of the section.
    event : EventSpec
        Event function, crossing direction and bounds predicate.
    length : float
        Extent of the intrinsic coordinate ``u in [0, length]``.
    """

    id: str
    anchor: FrameState
    event: EventSpec
    length: float
    _param: object = field(repr=False, compare=False, default=None)
    _coord: object = field(repr=False, compare=False, default=None)

    def point(self, u: float) -> FrameState:
        """Intrinsic parameterization ``u -> state``."""
        if u < -1e-12 or u > self.length + 1e-12:
            raise ValueError(f"u = {u!r} outside [0, {self.length}] on {self.id}")
        return FrameState(Frame.RESCALED, self._param(u))

    def coordinate(self, state) -> float:
        """Intrinsic coordinate of a state lying on the section."""
        coords = state.coords if isinstance(state, FrameState) else state
        return float(self._coord(coords))

    def contains(self, state, tol: float = 1e-9) -> bool:
        coords = state.coords if isinstance(state, FrameState) else state
        return abs(self.event.event_fn(coords)) <= tol and self.event.bounds_fn(coords)

    def guard(self) -> EventSpec:
        return self.event


@dataclass(frozen=True)
class Sections:
    """The five sections, addressable by id."""

    S1: SectionSpec
    S1b: SectionSpec
    S2: SectionSpec
    S3: SectionSpec
    S4: SectionSpec
    constants: dict

    def __iter__(self):
        return iter((self.S1, self.S1b, self.S2, self.S3, self.S4))

    def __getitem__(self, key) -> SectionSpec:
        return getattr(self, key)


_DEFAULTS = dict(
    alpha1=0.15,
    beta1=0.3,
    delta_b=0.1,
    beta1b=0.45,
    alpha2=0.2,
    alpha3=0.2,
    length3=0.3,
    beta4=0.25,
    width4=0.12,
)


def build_sections(params: Params, **overrides) -> Sections:
    """Construct the sections used by the return map.

    Parameters
    ----------
    params : Params
    **overrides
        Any of ``alpha1, beta1, delta_b, beta1b, alpha2, alpha3, length3,
        beta4, width4``.

    Raises
    ------
    ValueError
        Unknown or inconsistent constants, or overlapping sections.
    """
    unknown = set(overrides) - set(_DEFAULTS)
    if unknown:
        raise ValueError(f"unknown section constants: {sorted(unknown)}")
    k = {**_DEFAULTS, **overrides}
    if any(v <= 0 for v in k.values()):
        raise ValueError("section constants must be positive")
    ts, rs, rq = params.theta_star, params.rho_star, params.r_drop
    th1 = QUARTER_PI + k["alpha1"]
    th1b = HALF_PI - k["delta_b"]
    if not th1 < th1b:
        raise ValueError("alpha1 and delta_b leave no room for the first branch")
    if k["beta4"] >= rq:
        raise ValueError("beta4 must lie below the drop point radius 1/(2 sqrt(2a))")
    if k["width4"] >= k["alpha1"]:
        raise ValueError("width4 must be smaller than alpha1")
    if not (ts + 1.5 * k["alpha2"] < th1b and k["alpha2"] > 0):
        raise ValueError("alpha2 too large")
    if not QUARTER_PI < ts - k["alpha3"] < ts:
        raise ValueError("alpha3 must place the fold section between pi/4 and the fold")

    # Sigma_1
    b1 = k["beta1"]
    S1 = SectionSpec(
        "S1",
        FrameState(Frame.RESCALED, (th1, 0.0)),
        EventSpec(lambda z: z[0] - th1, Direction.RISING, lambda z: 0.0 <= z[1] <= b1, "S1"),
        b1,
        lambda u: (th1, u),
        lambda z: z[1],
    )
    # auxiliary split between the first two branches
    b1b = k["beta1b"]
    S1b = SectionSpec(
        "S1b",
        FrameState(Frame.RESCALED, (th1b, 0.0)),
        EventSpec(lambda z: z[0] - th1b, Direction.RISING, lambda z: 0.0 <= z[1] <= b1b, "S1b"),
        b1b,
        lambda u: (th1b, u),
        lambda z: z[1],
    )
    # Sigma_2: fibre arc through the critical manifold at theta* + alpha2
    a2 = k["alpha2"]
    th2 = ts + a2
    beta2 = phi0(th2, params) / math.sin(th2)
    lo2, hi2 = ts + 0.5 * a2, ts + 1.5 * a2
    S2 = SectionSpec(
        "S2",
        FrameState(Frame.RESCALED, (th2, beta2 * math.sin(th2))),
        EventSpec(
            lambda z: z[1] - beta2 * math.sin(z[0]),
            Direction.RISING,
            lambda z: lo2 <= z[0] <= hi2,
            "S2",
        ),
        hi2 - lo2,
        lambda u: (lo2 + u, beta2 * math.sin(lo2 + u)),
        lambda z: z[0] - lo2,
    )
    # Sigma_3: straight segment across the fibre rho* below the fold
    th3 = ts - k["alpha3"]
    A = np.array([th3, rs * math.sin(th3)])
    tang = np.array([1.0, rs * math.cos(th3)])
    tang /= np.linalg.norm(tang)
    nrm = np.array([-tang[1], tang[0]])
    half = 0.5 * k["length3"]
    tx, ty, nx, ny = (float(v) for v in (*tang, *nrm))
    ax, ay = float(A[0]), float(A[1])
    S3 = SectionSpec(
        "S3",
        FrameState(Frame.RESCALED, (ax, ay)),
        EventSpec(
            lambda z: (z[0] - ax) * tx + (z[1] - ay) * ty,
            Direction.FALLING,
            lambda z: abs((z[0] - ax) * nx + (z[1] - ay) * ny) <= half + 1e-12,
            "S3",
        ),
        2 * half,
        lambda u: (ax + (u - half) * nx, ay + (u - half) * ny),
        lambda z: (z[0] - ax) * nx + (z[1] - ay) * ny + half,
    )
    # Sigma_4
    b4, w4 = k["beta4"], k["width4"]
    S4 = SectionSpec(
        "S4",
        FrameState(Frame.RESCALED, (QUARTER_PI, b4)),
        EventSpec(
            lambda z: z[1] - b4,
            Direction.FALLING,
            lambda z: QUARTER_PI - 1e-9 <= z[0] <= QUARTER_PI + w4,
            "S4",
        ),
        w4,
        lambda u: (QUARTER_PI + u, b4),
        lambda z: z[0] - QUARTER_PI,
    )
    consts = dict(k, beta2=beta2, theta1=th1, theta1b=th1b, theta2=th2, theta3=th3)
    secs = Sections(S1, S1b, S2, S3, S4, consts)
    _check_disjoint(secs)
    return secs


def _section_points(sec: SectionSpec, n: int = 64) -> np.ndarray:
    return np.array([sec.point(u).coords for u in np.linspace(0, sec.length, n)])


def _check_disjoint(secs: Sections) -> None:
    items = list(secs)
    pts = [_section_points(s) for s in items]
    for i in range(len(items)):
        for j in range(i + 1, len(items)):
            d = np.min(np.hypot(*(pts[i][:, None, :] - pts[j][None, :, :]).transpose(2, 0, 1)))
            if d < 1e-3:
                raise ValueError(f"sections {items[i].id} and {items[j].id} intersect")


# ---------------------------------------------------------------------------
# transition and return maps


def _start_state(sec: SectionSpec, u: float) -> FrameState:
    return sec.point(u)


def transition_map(
    source: SectionSpec,
    u: float,
    target: SectionSpec,
    params: Params,
    config: IntegratorConfig | None = None,
    sections: Optional[Sections] = None,
    t_max: float = math.inf,
):
    """Map a point of ``source`` to its first hit on ``target``.

    Parameters
    ----------
    source, target : SectionSpec
    u : float
        Intrinsic coordinate on ``source``.
    sections : Sections, optional
        When given, every other section acts as a guard and crossing one
        of them first raises :class:`OrderingViolation`.

    Returns
    -------
    (float, TimeLedger)
        Intrinsic coordinate of the image and the clocks elapsed.
    """
    guards = []
    if sections is not None:
        guards = [s.event for s in sections if s.id not in (source.id, target.id)]
    hit = integrate_to_event(
        _start_state(source, u), target.event, params, config, t_max=t_max, guards=guards
    )
    return target.coordinate(hit.state), hit.ledger


@dataclass
class ReturnResult:
    """One circuit of the return map."""

    u: float
    ledger: TimeLedger
    legs: dict
    crossings: dict
    log_multiplier: float = math.nan


def rescaled_divergence(params: Params):
    """Divergence of the RESCALED field as a function of ``(theta, rbar)``."""
    a, eps = params.a, params.epsilon
    se = math.sqrt(eps)

    def div(z):
        th, r = z[0], z[1]
        s, c = math.sin(th), math.cos(th)
        d = s - c
        r2 = r * r
        dth = (
            -a * r2 * (c * d + s * (c + s))
            + (c * c - s * s) * d * d
            + 2.0 * s * c * d * (c + s)
            + eps * (-r2 * (c * (c + s) - s * d) - se * a * r2 * r * s)
        )
        dr = -3.0 * a * r2 * c * d + c * c * d * d + eps * (3.0 * r2 * s * d - 4.0 * se * a * r2 * r * s)
        return dth + dr

    return div


_ORDER = ("S1b", "S2", "S3", "S4")
_LEG_BRANCH = {"S1b": "sigma1", "S2": None, "S3": "sigma2", "S4": "sigma3", "S1": "sigma4"}


def _circuit(u, params, config, sections, record=False, extra_events=(), t_max=math.inf):
    """Integrate one circuit from Sigma_1 back to Sigma_1."""
    start = sections.S1.point(u)
    marks = [s.event for s in sections if s.id != "S1"]
    marks = [EventSpec(e.event_fn, e.direction, e.bounds_fn, e.name, False) for e in marks]
    extra = [EventSpec(e.event_fn, e.direction, e.bounds_fn, e.name, False) for e in extra_events]
    res, build, n = _run(
        start,
        t_max,
        params,
        config,
        [sections.S1.event, *marks, *extra],
        record,
        extra=[rescaled_divergence(params)],
    )
    if res.status != "event":
        raise NoCrossing("circuit did not return to Sigma_1", FrameState(Frame.RESCALED, tuple(res.y[:n])))
    return res, build, n


def return_map(
    u: float,
    params: Params,
    config: IntegratorConfig | None = None,
    sections: Optional[Sections] = None,
) -> ReturnResult:
    """One application of the return map on Sigma_1.

    The circuit is integrated once while the intermediate sections are
    recorded; each must be crossed exactly once, in the order
    Sigma_1b, Sigma_2, Sigma_3, Sigma_4.

    Returns
    -------
    ReturnResult
        ``legs`` maps each branch to its ledger: Sigma_1 -> Sigma_1b is the
        first branch, Sigma_1b -> Sigma_3 the second, Sigma_3 -> Sigma_4 the
        third and Sigma_4 -> Sigma_1 the fourth.
    """
    secs = sections or build_sections(params)
    res, build, n = _circuit(u, params, config, secs)
    ids = [None, "S1b", "S2", "S3", "S4"]
    seen = [(t, ids[i], y) for t, y, i in res.crossings]
    order = tuple(s for _, s, _ in seen)
    if order != _ORDER:
        raise OrderingViolation(f"unexpected section order {order}")
    nq = 1
    ledgers = {s: TimeLedger(*build(t, y[n:])) for t, s, y in seen}
    total = TimeLedger(*build(res.t, res.y[n:]))
    legs = {
        "sigma1": ledgers["S1b"],
        "sigma2": ledgers["S3"] - ledgers["S1b"],
        "sigma3": ledgers["S4"] - ledgers["S3"],
        "sigma4": total - ledgers["S4"],
    }
    crossings = {s: FrameState(Frame.RESCALED, tuple(y[:n])) for _, s, y in seen}
    crossings["S1"] = FrameState(Frame.RESCALED, tuple(res.y[:n]))
    log_mult = res.y[n + nq]
    return ReturnResult(secs.S1.coordinate(res.y), total, legs, crossings, log_mult)


# ---------------------------------------------------------------------------
# limit cycle


@dataclass(frozen=True)
class DwellTrim:
    """Trimmed sections bounding each branch for dwell-time measurement.

    Each branch is entered and left through sections placed
    ``delta_theta`` (angles) or ``delta_r`` (radii) inside the ends of the
    corresponding singular branch.  The fourth branch runs from
    ``r_drop - delta_r`` down to ``r_low`` along theta near pi/4.  The
    lower radius is kept well above the corner where the orbit peels off
    the slow manifold (about r = 0.25 at eps = 0.15, a = 0.5), so the
    measured time excludes the blow-up passage.
    """

    delta_theta: float = 0.1
    delta_r: float = 0.05
    r_low: float = 0.3


def _dwell_events(params: Params, trim: DwellTrim):
    dth, dr = trim.delta_theta, trim.delta_r
    ts, rq = params.theta_star, params.r_drop
    near = QUARTER_PI + dth
    small = 0.3

    def ev(name, fn, direction, bounds):
        return EventSpec(fn, direction, bounds, name, False)

    return [
        ev("D1a", lambda z: z[0] - near, Direction.RISING, lambda z: z[1] <= small),
        ev("D1b", lambda z: z[0] - (HALF_PI - dth), Direction.RISING, lambda z: z[1] <= small),
        ev("D2a", lambda z: z[0] - (HALF_PI - dth), Direction.FALLING, lambda z: z[1] > small),
        ev("D2b", lambda z: z[0] - (ts + dth), Direction.FALLING, None),
        ev("D3a", lambda z: z[0] - (ts - dth), Direction.FALLING, None),
        ev("D3b", lambda z: z[0] - near, Direction.FALLING, None),
        ev("D4a", lambda z: z[1] - (rq - dr), Direction.FALLING, lambda z: z[0] <= near),
        ev("D4b", lambda z: z[1] - trim.r_low, Direction.FALLING, lambda z: z[0] <= near),
    ]


@dataclass
class LimitCycle:
    """Attracting periodic orbit found as the fixed point of the return map.

    Attributes
    ----------
    params : Params
    u_fixed : float
        Fixed point on Sigma_1 (the rbar coordinate).
    state : FrameState
        Fixed point in the RESCALED frame.
    polyline : CurvePolyline
        Closed orbit in ``(theta, rbar)``.
    period : TimeLedger
    legs : dict
        Branch -> ledger for the Sigma_1 -> Sigma_1b -> Sigma_3 -> Sigma_4 ->
        Sigma_1 split.
    branch_polylines : dict
        Branch -> sub-polyline for the same split.
    dwell : dict
        Branch -> ledger between the trimmed sections of :class:`DwellTrim`.
    rho_eps : float
        Height of the fibre through the fixed point.
    iterates : list
        Section coordinates visited by the fixed-point iteration.
    crossings : dict
        Section or trim-section id -> crossing state.
    log_multiplier : float
        Integral of the divergence over one period, the logarithm of the
        nontrivial Floquet multiplier.
    """

    params: Params
    u_fixed: float
    state: FrameState
    polyline: CurvePolyline
    period: TimeLedger
    legs: dict
    branch_polylines: dict
    dwell: dict
    rho_eps: float
    iterates: list
    crossings: dict
    log_multiplier: float
    closure_gap: float
    sections: Sections = field(repr=False, default=None)

    def to_json(self, polyline_ref: Optional[str] = None) -> dict:
        return {
            "params": {"a": self.params.a, "epsilon": self.params.epsilon},
            "rho_eps": self.rho_eps,
            "fixed_point": {"theta": self.state[0], "rbar": self.state[1]},
            "period": self.period.as_dict(),
            "legs": {b: l.as_dict() for b, l in self.legs.items()},
            "dwell": {b: l.as_dict() for b, l in self.dwell.items()},
            "closure_gap": self.closure_gap,
            "log_multiplier": self.log_multiplier,
            "iterates": list(self.iterates),
            "polyline": polyline_ref,
        }

    def dump_json(self, path, polyline_ref: Optional[str] = None) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json(polyline_ref), fh, indent=2, sort_keys=True)


def fixed_point(
    params: Params,
    config: IntegratorConfig | None = None,
    sections: Optional[Sections] = None,
    u0: float = 0.1,
    xtol: float = 1e-13,
    accept: float = 1e-9,
    max_iter: int = 10,
    trim: DwellTrim = DwellTrim(),
    samples_per_step: int = 2,
) -> LimitCycle:
    """Locate the limit cycle by iterating the return map.

    Iteration stops when successive section coordinates differ by less than
    ``xtol`` or after ``max_iter`` circuits; since the integration itself is
    only accurate to about the tolerances, a final change below ``accept`` is
    also treated as converged.  A last circuit is then integrated with dense
    sampling to build the orbit, the branch split and the trimmed dwell
    ledgers.

    Raises
    ------
    NonConvergence
        If the final change exceeds ``accept``.
    """
    secs = sections or build_sections(params)
    u = u0
    its = [u]
    du = math.inf
    for _ in range(max_iter):
        u_new = return_map(u, params, config, secs).u
        du = abs(u_new - u)
        u = u_new
        its.append(u)
        if du < xtol:
            break
    if not du < accept:
        raise NonConvergence(f"return map did not settle (last change {du:.3e})")
    return _build_cycle(params, config, secs, u, its, trim, samples_per_step)


def _build_cycle(params, config, secs, u, its, trim, per_step):
    devs = _dwell_events(params, trim)
    res, build, n = _circuit(u, params, config, secs, record=True, extra_events=devs)
    ids = [None, "S1b", "S2", "S3", "S4"] + [e.name for e in devs]
    times = np.array(res.times)
    ys = np.array(res.ys)
    fs = np.array(res.fs)
    led = {}
    cross = {}
    counts = {}
    for t, y, i in res.crossings:
        name = ids[i]
        counts[name] = counts.get(name, 0) + 1
        if name not in led:
            led[name] = np.array(build(t, y[n:]))
            cross[name] = FrameState(Frame.RESCALED, tuple(y[:n]))
    for name in ("S1b", "S2", "S3", "S4"):
        if counts.get(name) != 1:
            raise OrderingViolation(f"section {name} crossed {counts.get(name, 0)} times")
    total = np.array(build(res.t, res.y[n:]))
    cross["S1"] = FrameState(Frame.RESCALED, tuple(res.y[:n]))
    zero = np.zeros(6)

    def L(v):
        return TimeLedger.from_array(v)

    legs = {
        "sigma1": L(led["S1b"] - zero),
        "sigma2": L(led["S3"] - led["S1b"]),
        "sigma3": L(led["S4"] - led["S3"]),
        "sigma4": L(total - led["S4"]),
    }
    dwell = {}
    pairs = {
        "sigma1": ("D1a", "D1b"),
        "sigma2": ("D2a", "D2b"),
        "sigma3": ("D3a", "D3b"),
        "sigma4": ("D4a", "D4b"),
    }
    for b, (lo, hi) in pairs.items():
        # a branch whose trimmed sections were not both crossed has no dwell entry
        if lo not in led or hi not in led:
            continue
        if b == "sigma1":
            # the first branch wraps around the start of the circuit
            dwell[b] = L(total - led[lo] + led[hi])
        else:
            dwell[b] = L(led[hi] - led[lo])

    # dense orbit with Hermite refinement inside each step
    h = np.diff(times)
    pts = [ys[0, :n]]
    ss = np.arange(1, per_step + 1) / (per_step + 1)
    for i in range(len(h)):
        y0, y1 = ys[i, :n], ys[i + 1, :n]
        f0, f1 = fs[i, :n], fs[i + 1, :n]
        for s in ss:
            s2, s3 = s * s, s * s * s
            pts.append(
                (2 * s3 - 3 * s2 + 1) * y0
                + (s3 - 2 * s2 + s) * h[i] * f0
                + (-2 * s3 + 3 * s2) * y1
                + (s3 - s2) * h[i] * f1
            )
        pts.append(y1)
    pts = np.array(pts)
    # split points by the clock at each sample
    tt = np.concatenate(
        [[times[0]]] + [times[i] + np.append(ss, 1.0) * h[i] for i in range(len(h))]
    )
    cuts = [0.0]
    for name in ("S1b", "S3", "S4"):
        t_cross = next(t for t, y, i in res.crossings if ids[i] == name)
        cuts.append(t_cross)
    cuts.append(res.t)
    branch_pl = {}
    for b, (t0, t1) in zip(BRANCHES, zip(cuts[:-1], cuts[1:])):
        m = (tt >= t0) & (tt <= t1)
        branch_pl[b] = CurvePolyline(pts[m], Frame.RESCALED, b)
    poly = CurvePolyline(pts, Frame.RESCALED, "limit-cycle")
    gap = float(np.hypot(*(pts[-1] - pts[0])))
    state = secs.S1.point(u)
    rho = u / math.sin(secs.constants["theta1"])
    return LimitCycle(
        params=params,
        u_fixed=u,
        state=state,
        polyline=poly,
        period=L(total),
        legs=legs,
        branch_polylines=branch_pl,
        dwell=dwell,
        rho_eps=rho,
        iterates=its,
        crossings=cross,
        log_multiplier=float(res.y[n + 1]),
        closure_gap=gap,
        sections=secs,
    )


def dwell_times(cycle: LimitCycle, clocks=("t", "t2")) -> dict:
    """Per-branch dwell times between the trimmed sections.

    Returns
    -------
    dict
        ``{branch: {clock: value}}``.  The untrimmed leg ledgers are in
        ``cycle.legs``.
    """
    return {b: {c: getattr(l, c) for c in clocks} for b, l in cycle.dwell.items()}


@dataclass(frozen=True)
class ContractionEstimate:
    """Size of the return-map derivative at the fixed point.

    Attributes
    ----------
    log_derivative : float
        ``log|dPi/du|`` from a central difference of the return map; when
        the difference is below the integration noise this is only an upper
        bound (``below_resolution`` is set).
    below_resolution : bool
    log_multiplier : float
        Integral of the field divergence over one period, which equals the
        logarithm of the same derivative and stays measurable far below the
        double-precision floor.
    """

    log_derivative: float
    below_resolution: bool
    log_multiplier: float
    step: float
    noise: float


def contraction_estimate(
    params: Params,
    config: IntegratorConfig | None = None,
    cycle: Optional[LimitCycle] = None,
) -> ContractionEstimate:
    """Estimate ``log|dPi/du|`` at the fixed point."""
    cfg = config or IntegratorConfig()
    if cycle is None:
        cycle = fixed_point(params, cfg)
    secs = cycle.sections
    u = cycle.u_fixed
    h = max(1e-6, 10 * cfg.event_tol)
    h = min(h, 0.5 * u, 0.5 * (secs.S1.length - u))
    rp = return_map(u + h, params, cfg, secs)
    rm = return_map(u - h, params, cfg, secs)
    r0 = return_map(u, params, cfg, secs)
    diff = abs(rp.u - rm.u)
    # integration noise: spread of repeated images around the fixed point
    noise = max(abs(r0.u - u), abs(rp.u - r0.u), abs(rm.u - r0.u), 1e-15)
    noise = max(noise, 10 * cfg.rel_tol * u)
    below = diff <= noise
    value = max(diff, noise) / (2 * h)
    return ContractionEstimate(math.log(value), bool(below), r0.log_multiplier, h, noise)


FOLD_SECTION_OFFSET = 0.05


def fold_deviation(
    params: Params,
    config: IntegratorConfig | None = None,
    alpha3: float = FOLD_SECTION_OFFSET,
    u0: float = 0.1,
) -> float:
    """Distance along the fold section between the cycle and fibre rho*.

    The cycle is located with the segment beyond the fold moved to
    ``theta* - alpha3``.  Far from the fold the layer fibres drift by O(eps)
    before the orbit reaches the segment, which competes with the passage
    deviation at the larger grid values; a section close to the fold keeps
    that drift small.
    """
    secs = build_sections(params, alpha3=alpha3)
    cyc = fixed_point(params, config, secs, u0=u0)
    u = secs.S3.coordinate(cyc.crossings["S3"])
    return abs(u - 0.5 * secs.S3.length)
