"""Adaptive integration with clock ledgers, section events and slow manifolds.

The integrator is the Dormand-Prince 5(4) embedded pair with a
proportional-integral step-size controller.  Events are bracketed between
accepted steps, located by bisection on the cubic Hermite interpolant and then
polished with exact partial steps so that a crossing carries the accuracy of
the underlying scheme rather than that of the interpolant.

Clock bookkeeping is done by augmenting the state with one or two
state-dependent integrals; the remaining clocks are affine in those and in
the active clock, so the relations ``dtau = eps dt``, ``dt2 = eps dt1`` and
``dtau2 = eps dt2`` hold exactly.
"""
from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .frames import (
    ANGLE_SLACK,
    HALF_PI,
    QUARTER_PI,
    DomainError,
    Frame,
    FrameState,
    Params,
    field_function,
)

__all__ = [
    "IntegratorConfig",
    "Direction",
    "EventSpec",
    "TimeLedger",
    "Trajectory",
    "EventHit",
    "IntegrationError",
    "MaxStepsExceeded",
    "DomainExit",
    "NoCrossing",
    "CrossingRejected",
    "OrderingViolation",
    "WindowError",
    "solve",
    "augmented_field",
    "integrate",
    "integrate_to_event",
    "extract_slow_manifold",
    "LEDGER_FIELDS",
]

LEDGER_FIELDS = ("tau", "t", "t1", "t2", "tau2", "chart_time")


@dataclass(frozen=True)
class IntegratorConfig:
    """Tolerances and limits for :func:`solve`."""

    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_step: float = math.inf
    max_steps: int = 10_000_000
    event_tol: float = 1e-12
    first_step: Optional[float] = None

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0 and self.event_tol > 0):
            raise ValueError("tolerances must be positive")
        if self.max_steps <= 0 or self.max_step <= 0:
            raise ValueError("max_steps and max_step must be positive")


class Direction(enum.IntEnum):
    FALLING = -1
    ANY = 0
    RISING = 1


@dataclass(frozen=True)
class EventSpec:
    """A scalar event on the frame coordinates.

    ``event_fn`` and ``bounds_fn`` receive the coordinate tuple of the
    frame being integrated.
    """

    event_fn: Callable[[Sequence[float]], float]
    direction: Direction = Direction.ANY
    bounds_fn: Optional[Callable[[Sequence[float]], bool]] = None
    name: str = ""
    terminal: bool = True


@dataclass(frozen=True)
class TimeLedger:
    """Values of every clock accumulated along one trajectory."""

    tau: float = 0.0
    t: float = 0.0
    t1: float = 0.0
    t2: float = 0.0
    tau2: float = 0.0
    chart_time: float = 0.0

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, k) for k in LEDGER_FIELDS])

    @classmethod
    def from_array(cls, v) -> "TimeLedger":
        return cls(*(float(x) for x in v))

    def __add__(self, other: "TimeLedger") -> "TimeLedger":
        return TimeLedger.from_array(self.as_array() + other.as_array())

    def __sub__(self, other: "TimeLedger") -> "TimeLedger":
        return TimeLedger.from_array(self.as_array() - other.as_array())

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in LEDGER_FIELDS}


class IntegrationError(RuntimeError):
    """Base class for numerical failures; carries the last good state."""

    def __init__(self, msg, state=None, ledger=None):
        super().__init__(msg)
        self.state = state
        self.ledger = ledger


class MaxStepsExceeded(IntegrationError):
    pass


class DomainExit(IntegrationError):
    pass


class NoCrossing(IntegrationError):
    pass


class CrossingRejected(IntegrationError):
    pass


class OrderingViolation(IntegrationError):
    """A guard section was crossed before the requested target."""

    def __init__(self, msg, state=None, ledger=None, guard=None):
        super().__init__(msg, state, ledger)
        self.guard = guard


class WindowError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Dormand-Prince 5(4)

_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B = _A[6]
# fifth minus fourth order weights
_E = (
    71 / 57600,
    0.0,
    -71 / 16695,
    71 / 1920,
    -17253 / 339200,
    22 / 525,
    -1 / 40,
)


def _dp_step(fun, y, f0, h):
    """One Dormand-Prince step; returns (y_new, f_new, error vector)."""
    n = len(y)
    ks = [f0]
    for i in range(1, 7):
        row = _A[i]
        yi = [y[j] + h * sum(row[m] * ks[m][j] for m in range(i)) for j in range(n)]
        ks.append(fun(yi))
        if i == 6:
            y_new = yi
    err = [h * sum(_E[m] * ks[m][j] for m in range(7)) for j in range(n)]
    return y_new, ks[6], err


def _hermite(y0, f0, y1, f1, h, s):
    s2 = s * s
    s3 = s2 * s
    h00 = 2 * s3 - 3 * s2 + 1
    h10 = s3 - 2 * s2 + s
    h01 = -2 * s3 + 3 * s2
    h11 = s3 - s2
    return [
        h00 * a + h10 * h * fa + h01 * b + h11 * h * fb
        for a, fa, b, fb in zip(y0, f0, y1, f1)
    ]


@dataclass
class _Event:
    g: Callable
    direction: int
    bounds: Optional[Callable]
    index: int
    terminal: bool = True
    sign: float = 0.0


@dataclass
class SolveResult:
    """Raw output of :func:`solve`."""

    t: float
    y: list
    status: str  # "complete" | "event"
    event_index: int = -1
    times: list = field(default_factory=list)
    ys: list = field(default_factory=list)
    fs: list = field(default_factory=list)
    n_steps: int = 0
    clamped: bool = False
    crossings: list = field(default_factory=list)


def _sgn(v, tol):
    if v > tol:
        return 1.0
    if v < -tol:
        return -1.0
    return 0.0


def solve(
    fun: Callable[[list], Sequence[float]],
    y0: Sequence[float],
    duration: float,
    config: IntegratorConfig | None = None,
    events: Sequence[EventSpec] = (),
    n_event_coords: Optional[int] = None,
    record: bool = True,
    check: Optional[Callable[[list], Optional[list]]] = None,
    norm_weights: Optional[Sequence[float]] = None,
) -> SolveResult:
    """Integrate ``y' = fun(y)`` forward for ``duration`` units of time.

    Parameters
    ----------
    fun : callable
        Autonomous right-hand side acting on a list of floats.
    y0 : sequence of float
        Initial state.
    duration : float
        Positive integration length in the active clock.
    config : IntegratorConfig, optional
        Tolerances and limits.
    events : sequence of EventSpec
        Sections monitored between accepted steps.  Integration stops at the
        first crossing in the requested direction whose ``bounds_fn`` (if
        any) accepts the crossing state; rejected crossings are skipped.
    n_event_coords : int, optional
        Only the first ``n_event_coords`` components are handed to event and
        bounds functions.
    record : bool
        Keep every accepted step (time, state, derivative).
    check : callable, optional
        Called on each accepted state; may return a corrected state (used for
        clamping roundoff below a boundary) or raise :class:`DomainError`.
    norm_weights : sequence of float, optional
        Per-component multipliers of the error norm (zero excludes a
        component from step-size control).

    Returns
    -------
    SolveResult
    """
    cfg = config or IntegratorConfig()
    if not duration > 0:
        raise ValueError("duration must be positive")
    rtol, atol = cfg.rel_tol, cfg.abs_tol
    y = [float(v) for v in y0]
    n = len(y)
    ne = n if n_event_coords is None else n_event_coords
    w = [1.0] * n if norm_weights is None else list(norm_weights)
    nw = sum(1 for v in w if v > 0) or 1
    f = list(fun(y))
    t = 0.0
    evs = [
        _Event(e.event_fn, int(e.direction), e.bounds_fn, i, e.terminal) for i, e in enumerate(events)
    ]
    for ev in evs:
        ev.sign = _sgn(ev.g(y[:ne]), cfg.event_tol)

    if cfg.first_step is not None:
        h = cfg.first_step
    else:
        d0 = math.sqrt(sum((wi * yi / (atol + rtol * abs(yi))) ** 2 for wi, yi in zip(w, y)) / nw)
        d1 = math.sqrt(sum((wi * fi / (atol + rtol * abs(yi))) ** 2 for wi, fi, yi in zip(w, f, y)) / nw)
        h = 0.01 * d0 / d1 if d0 > 1e-5 and d1 > 1e-5 else 1e-6
        h = min(h, 1e-2 * duration if duration < math.inf else h)
    h = min(h, cfg.max_step, duration)
    res = SolveResult(t=0.0, y=y, status="complete")
    if record:
        res.times.append(t)
        res.ys.append(list(y))
        res.fs.append(list(f))
    err_prev = 1e-4
    steps = 0
    rejected = False
    while t < duration:
        if steps >= cfg.max_steps:
            raise MaxStepsExceeded(f"max_steps={cfg.max_steps} exceeded at t={t}", y)
        if t + h > duration:
            h = duration - t
        y_new, f_new, e = _dp_step(fun, y, f, h)
        s = 0.0
        finite = True
        for ei, wi, a_, b_ in zip(e, w, y, y_new):
            if wi == 0.0:
                continue
            sc = atol + rtol * max(abs(a_), abs(b_))
            q = ei / sc
            s += q * q
        err = math.sqrt(s / nw)
        if not math.isfinite(err):
            finite = False
        if not finite or err > 1.0:
            fac = 0.2 if not finite else max(0.2, 0.9 * err ** (-0.2))
            h *= fac
            rejected = True
            if h < 1e-14 * max(1.0, abs(t)):
                raise IntegrationError(f"step size underflow at t={t}", y)
            continue
        steps += 1
        if check is not None:
            fixed = check(y_new)
            if fixed is not None:
                y_new = fixed
                f_new = list(fun(y_new))
                res.clamped = True
        t_new = t + h
        # events
        hit = None
        if evs:
            cands = []
            for ev in evs:
                gn = ev.g(y_new[:ne])
                sn = _sgn(gn, 0.0)
                if ev.sign == 0.0:
                    ev.sign = _sgn(gn, cfg.event_tol)
                    continue
                if sn != ev.sign:
                    if ev.direction == 0 or ev.direction == -ev.sign:
                        cands.append(ev)
                    ev.sign = sn if sn != 0.0 else -ev.sign
            if cands:
                located = []
                for ev in cands:
                    sc_, yc = _locate(fun, ev, y, f, y_new, f_new, h, ne, cfg.event_tol)
                    located.append((sc_, ev, yc))
                located.sort(key=lambda item: item[0])
                for sc_, ev, yc in located:
                    if ev.bounds is None or ev.bounds(yc[:ne]):
                        if ev.terminal:
                            hit = (t + sc_ * h, yc, ev)
                            break
                        res.crossings.append((t + sc_ * h, yc, ev.index))
        if hit is not None:
            th, yh, ev = hit
            res.t, res.y, res.status, res.event_index = th, yh, "event", ev.index
            res.n_steps = steps
            if record:
                res.times.append(th)
                res.ys.append(list(yh))
                res.fs.append(list(fun(yh)))
            return res
        t, y, f = t_new, y_new, f_new
        if record:
            res.times.append(t)
            res.ys.append(list(y))
            res.fs.append(list(f))
        # proportional-integral controller
        err = max(err, 1e-10)
        fac = 0.9 * err ** (-0.7 / 5) * err_prev ** (0.4 / 5)
        fac = min(5.0, max(0.2, fac))
        if rejected:
            fac = min(fac, 1.0)
            rejected = False
        err_prev = err
        h = min(h * fac, cfg.max_step)
    res.t, res.y, res.n_steps = t, y, steps
    return res


def _locate(fun, ev, y0, f0, y1, f1, h, ne, tol):
    """Locate a sign change of ``ev.g`` inside one accepted step.

    Bisection on the cubic Hermite interpolant brackets the root; the
    estimate is then refined with exact partial Runge-Kutta steps from the
    left end of the step.
    """
    g = ev.g

    def gi(s):
        return g(_hermite(y0, f0, y1, f1, h, s)[:ne])

    lo, hi = 0.0, 1.0
    glo = g(y0[:ne])
    for _ in range(40):
        mid = 0.5 * (lo + hi)
        gm = gi(mid)
        if abs(gm) <= tol:
            lo = hi = mid
            break
        if (gm > 0) == (glo > 0):
            lo, glo = mid, gm
        else:
            hi = mid
    s = 0.5 * (lo + hi)

    def exact(s_):
        if s_ <= 0.0:
            return list(y0)
        if s_ >= 1.0:
            return list(y1)
        return _dp_step(fun, y0, f0, s_ * h)[0]

    ds = 1e-7
    slope = (gi(min(1.0, s + ds)) - gi(max(0.0, s - ds))) / (min(1.0, s + ds) - max(0.0, s - ds))
    y_s = exact(s)
    for _ in range(8):
        gs = g(y_s[:ne])
        if abs(gs) <= tol or slope == 0.0:
            break
        step = gs / slope
        s_new = min(1.0, max(0.0, s - step))
        if s_new == s:
            break
        s = s_new
        y_s = exact(s)
    return s, y_s


# ---------------------------------------------------------------------------
# frame-aware wrappers


def _ledger_spec(frame: Frame, params: Params):
    """Return (integrand list, ledger builder) for ``frame``.

    The integrands are state-dependent clock rates; the builder maps the
    active clock value ``c`` and the integrals ``q`` to a full ledger row.
    """
    eps = params.epsilon
    inv = 1.0 / eps if eps > 0 else math.nan

    if frame in (Frame.RESCALED, Frame.OMEGA, Frame.COMPACT):
        ints = [lambda z: z[1] * z[1]]
        if frame is Frame.COMPACT:
            build = lambda c, q: (eps * q[0], q[0], c, eps * c, eps * eps * c, 0.0)
        else:
            build = lambda c, q: (eps * q[0], q[0], c * inv, c, eps * c, 0.0)
        return ints, build
    if frame in (Frame.XYFAST, Frame.POLAR):
        if frame is Frame.POLAR:
            ints = [lambda z: 1.0 / (z[1] * z[1])]
        else:
            ints = [lambda z: z[0] * z[0] + z[1] * z[1]]
        build = lambda c, q: (eps * c, c, q[0], eps * q[0], eps * eps * q[0], 0.0)
        return ints, build
    if frame in (Frame.XY, Frame.XYSLOW):
        if frame is Frame.XY:
            ints = [lambda z: z[1] * z[1] + (z[0] + z[1]) ** 2]
        else:
            ints = [lambda z: z[0] * z[0] + z[1] * z[1]]
        build = lambda c, q: (c, c * inv, q[0] * inv, q[0], eps * q[0], 0.0)
        return ints, build

    # blow-up charts: q0 = t2, q1 = t
    if frame is Frame.K1:
        eta = lambda z: z[1]
        rb = lambda z: z[1] ** 3
    elif frame is Frame.K2:
        eta = lambda z: z[2]
        rb = lambda z: z[2] ** 3 * z[1]
    else:
        eta = lambda z: z[0]
        rb = lambda z: z[0] ** 3 * z[1]

    def i_t2(z):
        e = eta(z)
        return 0.0 if e <= 0.0 else e ** -6

    def i_t(z):
        e = eta(z)
        return 0.0 if e <= 0.0 else rb(z) ** 2 / e**6

    build = lambda c, q: (eps * q[1], q[1], q[0] * inv, q[0], eps * q[0], c)
    return [i_t2, i_t], build


def _admissibility(frame: Frame, n: int, atol: float):
    """Per-step admissibility check that clamps tiny negative radii."""
    clamp = 100.0 * atol

    def polar_like(y):
        th, r = y[0], y[1]
        if th < QUARTER_PI - ANGLE_SLACK - 1e-6 or th > HALF_PI + 1e-6:
            raise DomainError(f"theta = {th!r} left [pi/4, pi/2]")
        if r < 0.0:
            if r < -clamp:
                raise DomainError(f"radius became negative ({r!r})")
            y = list(y)
            y[1] = 0.0
            return y
        return None

    def omega_like(y):
        w, r = y[0], y[1]
        if w < -1e-6 or w > QUARTER_PI + 1e-6:
            raise DomainError(f"omega = {w!r} left [0, pi/4]")
        if r < 0.0:
            if r < -clamp:
                raise DomainError(f"radius became negative ({r!r})")
            y = list(y)
            y[1] = 0.0
            return y
        return None

    def nonneg(y):
        out = None
        for i in range(n):
            if y[i] < 0.0:
                if y[i] < -clamp:
                    raise DomainError(f"coordinate {i} became negative ({y[i]!r})")
                out = list(y) if out is None else out
                out[i] = 0.0
        return out

    if frame in (Frame.POLAR, Frame.COMPACT, Frame.RESCALED):
        return polar_like
    if frame is Frame.OMEGA:
        return omega_like
    return nonneg


def augmented_field(frame: Frame, params: Params, extra: Sequence[Callable] = ()):
    """Frame field augmented with clock integrands and optional extras.

    Returns
    -------
    aug : callable
        Right-hand side on ``coords + clock integrals + extras``.
    nq : int
        Number of clock integrals.
    build : callable
        ``build(c, q)`` giving a ledger row from the active clock value and
        the clock integrals.
    """
    fn = field_function(frame, params)
    ints, build = _ledger_spec(frame, params)
    ints = list(ints) + list(extra)
    n = frame.dim

    def aug(y):
        z = y[:n]
        return list(fn(z)) + [q(z) for q in ints]

    return aug, len(ints) - len(extra), build


@dataclass
class Trajectory:
    """Samples of one integration.

    Attributes
    ----------
    frame : Frame
    times : numpy.ndarray
        Active-clock values, strictly increasing.
    states : numpy.ndarray
        Shape ``(N, dim)``.
    ledgers : numpy.ndarray
        Shape ``(N, 6)``, columns in :data:`LEDGER_FIELDS` order.
    derivs : numpy.ndarray
        Derivatives of the augmented state, used for Hermite resampling.
    status : str
        ``"complete"`` or ``"event-hit"``.
    """

    frame: Frame
    times: np.ndarray
    states: np.ndarray
    ledgers: np.ndarray
    derivs: np.ndarray
    status: str = "complete"
    clamped: bool = False

    @property
    def final_state(self) -> FrameState:
        return FrameState(self.frame, tuple(self.states[-1]))

    @property
    def final_ledger(self) -> TimeLedger:
        return TimeLedger.from_array(self.ledgers[-1])

    def ledger_at(self, i: int) -> TimeLedger:
        return TimeLedger.from_array(self.ledgers[i])

    def resample(self, per_step: int) -> np.ndarray:
        """States with ``per_step`` Hermite-interpolated points inside each step."""
        if per_step <= 0:
            return self.states.copy()
        n = self.frame.dim
        out = [self.states[0]]
        ss = np.arange(1, per_step + 1) / (per_step + 1)
        for i in range(len(self.times) - 1):
            h = self.times[i + 1] - self.times[i]
            y0, y1 = self.states[i], self.states[i + 1]
            f0, f1 = self.derivs[i][:n], self.derivs[i + 1][:n]
            for s in ss:
                out.append(np.array(_hermite(y0, f0, y1, f1, h, s)))
            out.append(y1)
        return np.array(out)

    def to_csv(self, path) -> None:
        """Write clock columns for all five clocks plus state columns."""
        names = list(self.frame.coord_names)
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["clock"] + list(LEDGER_FIELDS) + names)
            for c, led, z in zip(self.times, self.ledgers, self.states):
                wr.writerow([f"{v:.17g}" for v in [c, *led, *z]])


@dataclass
class EventHit:
    """Crossing returned by :func:`integrate_to_event`.

    Iterating yields ``(state, ledger)``.
    """

    state: FrameState
    ledger: TimeLedger
    time: float
    event_index: int = 0
    trajectory: Optional[Trajectory] = None

    def __iter__(self):
        yield self.state
        yield self.ledger


def _run(start, duration, params, config, events, record, extra=()):
    frame = start.frame
    aug, nq, build = augmented_field(frame, params, extra)
    cfg = config or IntegratorConfig()
    y0 = list(start.coords) + [0.0] * (nq + len(extra))
    n = frame.dim
    try:
        res = solve(
            aug,
            y0,
            duration,
            cfg,
            events=events,
            n_event_coords=n,
            record=record,
            check=_admissibility(frame, n, cfg.abs_tol),
        )
    except DomainError as exc:
        raise DomainExit(str(exc)) from exc
    except IntegrationError as exc:
        st = exc.state
        if st is not None:
            exc.state = FrameState(frame, tuple(st[:n]))
        raise
    return res, build, n


def _traj(frame, res, build, n, status):
    ys = np.array(res.ys)
    times = np.array(res.times)
    ledgers = np.array([build(c, y[n:]) for c, y in zip(times, ys)])
    return Trajectory(frame, times, ys[:, :n], ledgers, np.array(res.fs), status, res.clamped)


def integrate(
    start: FrameState,
    duration: float,
    params: Params,
    config: IntegratorConfig | None = None,
) -> Trajectory:
    """Integrate the vector field of ``start.frame`` for ``duration``.

    Raises
    ------
    MaxStepsExceeded, DomainExit
        Numerical failures; the exception carries the last good state.
    """
    res, build, n = _run(start, duration, params, config, (), True)
    return _traj(start.frame, res, build, n, "complete")


def integrate_to_event(
    start: FrameState,
    event: EventSpec,
    params: Params,
    config: IntegratorConfig | None = None,
    t_max: float = math.inf,
    guards: Sequence[EventSpec] = (),
    skip_rejected: bool = True,
    record: bool = False,
) -> EventHit:
    """Integrate until ``event`` fires.

    Parameters
    ----------
    start : FrameState
    event : EventSpec
        Target section.  A crossing whose ``bounds_fn`` returns False is
        skipped when ``skip_rejected`` is true, otherwise
        :class:`CrossingRejected` is raised.
    params : Params
    config : IntegratorConfig, optional
    t_max : float
        Bound on the active clock.
    guards : sequence of EventSpec
        Sections that must not be crossed (within their bounds) first;
        doing so raises :class:`OrderingViolation`.
    record : bool
        Attach the full trajectory to the result.

    Raises
    ------
    NoCrossing
        If ``t_max`` elapses first.
    """
    target = event
    if not skip_rejected and event.bounds_fn is not None:
        target = EventSpec(event.event_fn, event.direction, None, event.name)
    res, build, n = _run(start, t_max, params, config, [target, *guards], record)
    frame = start.frame
    state = FrameState(frame, tuple(res.y[:n]))
    ledger = TimeLedger(*build(res.t, res.y[n:]))
    if res.status != "event":
        raise NoCrossing(f"no crossing of {event.name or 'event'} before t_max={t_max}", state, ledger)
    if res.event_index > 0:
        g = guards[res.event_index - 1]
        raise OrderingViolation(
            f"section {g.name or res.event_index} crossed before {event.name or 'target'}",
            state,
            ledger,
            guard=g,
        )
    if not skip_rejected and event.bounds_fn is not None and not event.bounds_fn(state.coords):
        raise CrossingRejected("crossing outside the section bounds", state, ledger)
    traj = _traj(frame, res, build, n, "event-hit") if record else None
    return EventHit(state, ledger, res.t, 0, traj)


# ---------------------------------------------------------------------------
# numerical slow manifolds


def _s2_window(params):
    ts = params.theta_star
    return (ts + 0.2, HALF_PI - 0.2)


def extract_slow_manifold(
    branch: str,
    params: Params,
    window: Optional[tuple] = None,
    config: IntegratorConfig | None = None,
    samples: int = 200,
    t_max: float = 1e9,
    tol: float = 1e-9,
):
    """Trace an attracting slow manifold in the RESCALED frame.

    Two trajectories are launched on either side of the critical manifold
    upstream of the window; once they agree to ``tol`` at the window entry
    the transient is considered gone and one of them is followed through
    the window.

    Parameters
    ----------
    branch : {"S1", "S2"}
        ``S2`` is the graph r = phi(theta) (window in theta); ``S1`` is the
        branch near theta = pi/4 (window in rbar).
    params : Params
    window : tuple, optional
        Defaults to ``[theta* + 0.2, pi/2 - 0.2]`` for S2 and ``[0.2, 0.45]``
        for S1.
    samples : int
        Number of window samples in the returned polyline.

    Returns
    -------
    CurvePolyline
        Points ``(theta, rbar)`` ordered along the window parameter.
    """
    from .geometry import CurvePolyline, phi0

    cfg = config or IntegratorConfig()
    branch = branch.upper()
    eps = params.epsilon
    if branch == "S2":
        lo, hi = window or _s2_window(params)
        if lo < params.theta_star + 0.1 or hi > HALF_PI - 0.01 or lo >= hi:
            raise WindowError("S2 window must avoid the fold and pi/2")
        grid = np.linspace(hi, lo, samples)
        if eps == 0.0:
            pts = []
            for th in grid[::-1]:
                z = FrameState(Frame.RESCALED, (th, phi0(th, params)))
                tr = integrate(z, 1.0, params, cfg)
                pts.append(tr.states[-1])
            return CurvePolyline(np.array(pts), Frame.RESCALED, "S2")
        launch = min(HALF_PI - 0.02, hi + 0.05)
        entry = EventSpec(lambda z: z[0] - hi, Direction.FALLING, name="window")
        while True:
            r0 = phi0(launch, params)
            hits = []
            for dr in (-0.3 * r0, 0.3 * r0):
                z = FrameState(Frame.RESCALED, (launch, r0 + dr))
                hits.append(integrate_to_event(z, entry, params, cfg, t_max=t_max))
            if abs(hits[0].state[1] - hits[1].state[1]) < tol:
                break
            if launch >= HALF_PI - 0.02:
                raise IntegrationError("slow-manifold transient did not settle")
            launch = min(HALF_PI - 0.02, launch + 0.02)
        events = [EventSpec(lambda z, v=v: z[0] - v, Direction.FALLING) for v in grid[1:]]
        pts = [hits[1].state.coords]
        z = hits[1].state
        for ev in events:
            z = integrate_to_event(z, ev, params, cfg, t_max=t_max).state
            pts.append(z.coords)
        return CurvePolyline(np.array(pts[::-1]), Frame.RESCALED, "S2")

    if branch == "S1":
        lo, hi = window or (0.2, 0.45)
        if lo <= 0.05 or lo >= hi:
            raise WindowError("S1 window must stay away from the corner rbar = 0")
        if eps == 0.0:
            pts = np.column_stack([np.full(samples, QUARTER_PI), np.linspace(lo, hi, samples)])
            return CurvePolyline(pts, Frame.RESCALED, "S1")
        grid = np.linspace(hi, lo, samples)
        entry = EventSpec(lambda z: z[1] - hi, Direction.FALLING, name="window")
        launch = hi + 0.05
        while True:
            hits = []
            for dth in (0.02, 0.1):
                z = FrameState(Frame.RESCALED, (QUARTER_PI + dth, launch))
                hits.append(integrate_to_event(z, entry, params, cfg, t_max=t_max))
            if abs(hits[0].state[0] - hits[1].state[0]) < tol:
                break
            if launch > hi + 0.5:
                raise IntegrationError("slow-manifold transient did not settle")
            launch += 0.1
        pts = [hits[0].state.coords]
        z = hits[0].state
        for v in grid[1:]:
            ev = EventSpec(lambda q, v=v: q[1] - v, Direction.FALLING)
            z = integrate_to_event(z, ev, params, cfg, t_max=t_max).state
            pts.append(z.coords)
        return CurvePolyline(np.array(pts[::-1]), Frame.RESCALED, "S1")
    raise ValueError(f"unknown branch {branch!r}")
