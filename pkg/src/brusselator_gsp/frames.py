"""Coordinate frames, vector fields and clock conversions.

Every frame used in the analysis of the Brusselator is represented by a
:class:`Frame` member.  Each frame carries one state dimension and one clock.
States are converted between frames along a fixed tree

    XY - XYSLOW - XYFAST - POLAR - COMPACT - RESCALED - OMEGA - {K1, K2, K3}

with the three blow-up charts also linked directly by their chart changes.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "Params",
    "Frame",
    "Clock",
    "FrameState",
    "DomainError",
    "SingularTransformError",
    "UndefinedRateError",
    "H",
    "field_function",
    "eval_vector_field",
    "transform_state",
    "transform_coords",
    "clock_rate",
    "factorization_parts",
    "p_func",
    "jacobian",
    "chart_epsilon",
    "t12",
    "t21",
    "t23",
    "t32",
    "ADJACENT_PAIRS",
    "sample_state",
    "pushforward_defect",
    "round_trip_error",
]

QUARTER_PI = 0.25 * math.pi
HALF_PI = 0.5 * math.pi
SQRT2 = math.sqrt(2.0)
# slack allowed on angular bounds for states produced by an integrator
ANGLE_SLACK = 1e-9


class DomainError(ValueError):
    """State or argument outside the admissible region of a frame."""


class SingularTransformError(ValueError):
    """Coordinate change requires division by a vanishing quantity."""


class UndefinedRateError(ValueError):
    """Clock rate degenerates (zero or infinite) at the requested state."""


@dataclass(frozen=True)
class Params:
    """Model constants.

    Parameters
    ----------
    a : float
        Concentration of species A, strictly positive.
    epsilon : float
        Inverse bifurcation parameter, ``b = a / epsilon``.  Zero is accepted
        so that layer problems can be evaluated.
    """

    a: float
    epsilon: float

    def __post_init__(self):
        if not (math.isfinite(self.a) and self.a > 0.0):
            raise ValueError(f"a must be positive, got {self.a!r}")
        if not (math.isfinite(self.epsilon) and self.epsilon >= 0.0):
            raise ValueError(f"epsilon must be nonnegative, got {self.epsilon!r}")

    @property
    def b(self) -> float:
        return self.a / self.epsilon if self.epsilon > 0.0 else math.inf

    @property
    def b_crit(self) -> float:
        return 1.0 + self.a * self.a

    @property
    def oscillatory(self) -> bool:
        return self.b > self.b_crit

    @property
    def sqrt_eps(self) -> float:
        return math.sqrt(self.epsilon)

    @property
    def theta_star(self) -> float:
        return math.atan(2.0)

    @property
    def r_star(self) -> float:
        return 1.0 / math.sqrt(5.0 * self.a)

    @property
    def rho_star(self) -> float:
        return 1.0 / (2.0 * math.sqrt(self.a))

    @property
    def r_drop(self) -> float:
        """Radius of the drop point Q on the line theta = pi/4."""
        return 1.0 / (2.0 * math.sqrt(2.0 * self.a))

    def with_epsilon(self, epsilon: float) -> "Params":
        return Params(self.a, epsilon)


class Clock(enum.Enum):
    TAU = "tau"
    T = "t"
    T1 = "t1"
    T2 = "t2"
    TAU2 = "tau2"
    CHART1 = "chart1"
    CHART2 = "chart2"
    CHART3 = "chart3"


class Frame(enum.Enum):
    XY = "XY"
    XYSLOW = "XYSLOW"
    XYFAST = "XYFAST"
    POLAR = "POLAR"
    COMPACT = "COMPACT"
    RESCALED = "RESCALED"
    OMEGA = "OMEGA"
    K1 = "K1"
    K2 = "K2"
    K3 = "K3"

    @property
    def dim(self) -> int:
        return 3 if self in _CHARTS else 2

    @property
    def clock(self) -> Clock:
        return _FRAME_CLOCK[self]

    @property
    def coord_names(self) -> tuple:
        return _COORD_NAMES[self]

    @property
    def is_chart(self) -> bool:
        return self in _CHARTS


_CHARTS = (Frame.K1, Frame.K2, Frame.K3)

_FRAME_CLOCK = {
    Frame.XY: Clock.TAU,
    Frame.XYSLOW: Clock.TAU,
    Frame.XYFAST: Clock.T,
    Frame.POLAR: Clock.T,
    Frame.COMPACT: Clock.T1,
    Frame.RESCALED: Clock.T2,
    Frame.OMEGA: Clock.T2,
    Frame.K1: Clock.CHART1,
    Frame.K2: Clock.CHART2,
    Frame.K3: Clock.CHART3,
}

_COORD_NAMES = {
    Frame.XY: ("X", "Y"),
    Frame.XYSLOW: ("x", "y"),
    Frame.XYFAST: ("x", "y"),
    Frame.POLAR: ("theta", "r"),
    Frame.COMPACT: ("theta", "r"),
    Frame.RESCALED: ("theta", "rbar"),
    Frame.OMEGA: ("omega", "rbar"),
    Frame.K1: ("omega1", "eta1", "eps1"),
    Frame.K2: ("omega2", "r2", "eta2"),
    Frame.K3: ("eta3", "r3", "eps3"),
}


@dataclass(frozen=True)
class FrameState:
    """A phase point tagged with its coordinate frame."""

    frame: Frame
    coords: tuple

    def __post_init__(self):
        c = tuple(float(v) for v in self.coords)
        if len(c) != self.frame.dim:
            raise ValueError(
                f"{self.frame.value} expects {self.frame.dim} coordinates, got {len(c)}"
            )
        object.__setattr__(self, "coords", c)

    def __getitem__(self, i):
        return self.coords[i]

    def as_array(self) -> np.ndarray:
        return np.array(self.coords)


# ---------------------------------------------------------------------------
# vector fields


def H(x: float) -> float:
    """Truncated series of sin(x)/x used in the blow-up charts.

    The series stops after the x**4/5! term; the neglected remainder is below
    |x|**6/5040, and arguments with |x| >= 0.1 are rejected.
    """
    if abs(x) >= 0.1:
        raise DomainError(f"H series used outside |x| < 0.1 (x = {x!r})")
    x2 = x * x
    return 1.0 - x2 / 6.0 + x2 * x2 / 120.0


def _xy(z, a, eps):
    X, Y = z
    b = a / eps
    w = b - X * Y
    return ((a - X) - X * w, X * w)


def _xyslow(z, a, eps):
    x, y = z
    u = y - x
    return ((a * u - eps * x * u * u) / eps, a - u)


def _xyfast(z, a, eps):
    x, y = z
    u = y - x
    return (a * u - eps * x * u * u, eps * (a - u))


def _polar(z, a, eps):
    th, r = z
    s, c = math.sin(th), math.cos(th)
    d = s - c
    dth = -a * s * d + eps * (s * c * d * d / (r * r) - c * d + a * r * c)
    dr = -a * r * c * d + eps * (c * c * d * d / r + r * s * d - a * r * r * s)
    return (dth, dr)


def _compact(z, a, eps):
    th, r = z
    s, c = math.sin(th), math.cos(th)
    d = s - c
    r2 = r * r
    dth = -a * r2 * s * d + eps * (s * c * d * d - r2 * c * d + a * r2 * r * c)
    dr = -a * r2 * r * c * d + eps * (r * c * c * d * d + r2 * r * s * d - a * r2 * r2 * s)
    return (dth, dr)


def _rescaled(z, a, eps):
    th, r = z
    s, c = math.sin(th), math.cos(th)
    d = s - c
    se = math.sqrt(eps)
    r2 = r * r
    r3 = r2 * r
    dth = -a * r2 * s * d + s * c * d * d + eps * (-r2 * c * d + se * a * r3 * c)
    dr = -a * r3 * c * d + r * c * c * d * d + eps * (r3 * s * d - se * a * r3 * r * s)
    return (dth, dr)


def _omega(z, a, eps):
    w, r = z
    sw, cw = math.sin(w), math.cos(w)
    S = sw + cw
    D = cw - sw
    ep = math.sqrt(eps)
    r2 = r * r
    r3 = r2 * r
    k = a / SQRT2
    dw = -a * r2 * sw * S + sw * sw * S * D + eps * (-r2 * sw * D + ep * k * r3 * D)
    dr = -a * r3 * sw * D + r * sw * sw * D * D + eps * (r3 * sw * S - ep * k * r3 * r * S)
    return (dw, dr)


def _sd(x):
    return math.sin(x) + math.cos(x), math.cos(x) - math.sin(x)


def _k1(z, a, eps):
    w1, e, e1 = z
    e2 = e * e
    e6 = e2 * e2 * e2
    x = e6 * w1
    h_ = H(x)
    S, D = _sd(x)
    k = a / SQRT2
    c3 = e1 * e1 * e1
    g = -a * w1 * h_ * S + w1 * w1 * h_ * h_ * S * D - e2 * e1 * e1 * w1 * h_ * D + k * c3 * D
    hh = -a * w1 * h_ * D + w1 * w1 * h_ * h_ * D * D + e2 * e1 * e1 * w1 * h_ * S - k * c3 * S
    return (g - 2.0 * w1 * e6 * hh, e6 * e * hh / 3.0, -e1 * e6 * hh / 3.0)


def _k2(z, a, eps):
    w2, r2, e = z
    e2 = e * e
    e6 = e2 * e2 * e2
    x = e6 * w2
    h_ = H(x)
    S, D = _sd(x)
    k = a / SQRT2
    rr = r2 * r2
    dw = -a * rr * w2 * h_ * S + w2 * w2 * h_ * h_ * S * D - e2 * rr * w2 * h_ * D + k * rr * r2 * D
    inner = -a * rr * w2 * h_ * D + w2 * w2 * h_ * h_ * D * D + e2 * rr * w2 * h_ * S - k * rr * r2 * S
    return (dw, e6 * r2 * inner, 0.0)


def _k3(z, a, eps):
    e, r3, e3 = z
    e2 = e * e
    e6 = e2 * e2 * e2
    h_ = H(e6)
    S, D = _sd(e6)
    k = a / SQRT2
    rr = r3 * r3
    q = e3 * e3
    B = -a * rr * h_ * S + h_ * h_ * S * D - e2 * q * rr * h_ * D + k * q * e3 * rr * r3 * D
    inner = -a * rr * h_ * D + h_ * h_ * D * D + e2 * q * rr * h_ * S - k * q * e3 * rr * r3 * S
    return (e * B / 6.0, -0.5 * r3 * B + e6 * r3 * inner, -e3 * B / 6.0)


_FIELDS = {
    Frame.XY: _xy,
    Frame.XYSLOW: _xyslow,
    Frame.XYFAST: _xyfast,
    Frame.POLAR: _polar,
    Frame.COMPACT: _compact,
    Frame.RESCALED: _rescaled,
    Frame.OMEGA: _omega,
    Frame.K1: _k1,
    Frame.K2: _k2,
    Frame.K3: _k3,
}


def field_function(frame: Frame, params: Params) -> Callable[[Sequence[float]], tuple]:
    """Return the raw right-hand side ``z -> dz/dclock`` of a frame.

    No admissibility check is made, which is what an integrator needs when
    intermediate stages probe slightly outside the region of interest.
    """
    fn = _FIELDS[frame]
    a, eps = params.a, params.epsilon
    if eps == 0.0 and frame in (Frame.XY, Frame.XYSLOW):
        raise DomainError(f"{frame.value} is singular at epsilon = 0")
    return lambda z: fn(z, a, eps)


def check_admissible(state: FrameState) -> None:
    """Raise :class:`DomainError` if ``state`` leaves its frame's region."""
    f, c = state.frame, state.coords
    if not all(math.isfinite(v) for v in c):
        raise DomainError(f"non-finite coordinates {c!r}")
    if f in (Frame.XY, Frame.XYSLOW, Frame.XYFAST):
        if c[0] < 0.0 or c[1] < 0.0:
            raise DomainError(f"{f.value} requires nonnegative coordinates, got {c!r}")
    elif f in (Frame.POLAR, Frame.COMPACT, Frame.RESCALED):
        th, r = c
        if th < QUARTER_PI - ANGLE_SLACK or th > HALF_PI + ANGLE_SLACK:
            raise DomainError(f"theta = {th!r} outside [pi/4, pi/2]")
        if r < 0.0 or (f is Frame.POLAR and r == 0.0):
            raise DomainError(f"radius {r!r} not admissible in {f.value}")
    elif f is Frame.OMEGA:
        w, r = c
        if w < -ANGLE_SLACK or w > QUARTER_PI + ANGLE_SLACK:
            raise DomainError(f"omega = {w!r} outside [0, pi/4]")
        if r < 0.0:
            raise DomainError(f"radius {r!r} negative")
    else:
        if min(c) < 0.0:
            raise DomainError(f"chart coordinates must be nonnegative, got {c!r}")


def eval_vector_field(state: FrameState, params: Params) -> np.ndarray:
    """Evaluate the vector field of ``state.frame`` at ``state``.

    Parameters
    ----------
    state : FrameState
        Phase point; must lie in the admissible region of its frame.
    params : Params
        Model constants.

    Returns
    -------
    numpy.ndarray
        Derivative of the coordinates with respect to the frame's clock.

    Raises
    ------
    DomainError
        If the state is not admissible (negative radius, angle out of range,
        blow-up argument outside the series window, ...).
    """
    check_admissible(state)
    return np.array(field_function(state.frame, params)(state.coords))


def p_func(theta: float, r: float, a: float) -> float:
    """Second factor of the layer field, ``a r^2 - cos(theta)(sin - cos)``."""
    c = math.cos(theta)
    return a * r * r - c * (math.sin(theta) - c)


def factorization_parts(state: FrameState, params: Params):
    """Split the RESCALED field as ``N * f + eps * G``.

    Returns
    -------
    N : numpy.ndarray
        ``(-sin(theta), -r cos(theta))``.
    f : float
        ``(sin(theta) - cos(theta)) * p(theta, r)``.
    G : numpy.ndarray
        Order-epsilon remainder.
    """
    if state.frame is not Frame.RESCALED:
        raise ValueError("factorization is defined in the RESCALED frame only")
    th, r = state.coords
    a, eps = params.a, params.epsilon
    s, c = math.sin(th), math.cos(th)
    d = s - c
    se = math.sqrt(eps)
    N = np.array([-s, -r * c])
    f = d * p_func(th, r, a)
    G = np.array([-r * r * c * d + se * a * r**3 * c, r**3 * s * d - se * a * r**4 * s])
    return N, f, G


def jacobian(state: FrameState, params: Params) -> np.ndarray:
    """Central finite-difference Jacobian of the frame's vector field."""
    fn = field_function(state.frame, params)
    z = np.array(state.coords)
    n = z.size
    J = np.empty((n, n))
    for j in range(n):
        h = 1e-6 * max(1.0, abs(z[j]))
        zp = z.copy()
        zm = z.copy()
        zp[j] += h
        zm[j] -= h
        J[:, j] = (np.array(fn(zp)) - np.array(fn(zm))) / (2.0 * h)
    return J


# ---------------------------------------------------------------------------
# coordinate changes

_TREE = [
    Frame.XY,
    Frame.XYSLOW,
    Frame.XYFAST,
    Frame.POLAR,
    Frame.COMPACT,
    Frame.RESCALED,
    Frame.OMEGA,
]


def _need_eps(eps):
    if eps <= 0.0:
        raise SingularTransformError("transform requires epsilon > 0")


def _step_up(frame, c, eps):
    """Move one edge away from XY, toward OMEGA."""
    if frame is Frame.XY:
        X, Y = c
        return (Y, X + Y)
    if frame is Frame.XYSLOW:
        return c
    if frame is Frame.XYFAST:
        x, y = c
        rho = math.hypot(x, y)
        if rho == 0.0:
            raise SingularTransformError("polar map undefined at the origin")
        return (math.atan2(y, x), 1.0 / rho)
    if frame is Frame.POLAR:
        return c
    if frame is Frame.COMPACT:
        _need_eps(eps)
        return (c[0], c[1] / math.sqrt(eps))
    if frame is Frame.RESCALED:
        return (c[0] - QUARTER_PI, c[1])
    raise AssertionError(frame)


def _step_down(frame, c, eps):
    """Inverse of :func:`_step_up` applied to a state of ``frame``."""
    if frame is Frame.XYSLOW:
        x, y = c
        return (y - x, x)
    if frame is Frame.XYFAST:
        return c
    if frame is Frame.POLAR:
        th, r = c
        if r == 0.0:
            raise SingularTransformError("inverse polar map undefined at r = 0")
        return (math.cos(th) / r, math.sin(th) / r)
    if frame is Frame.COMPACT:
        return c
    if frame is Frame.RESCALED:
        return (c[0], math.sqrt(eps) * c[1])
    if frame is Frame.OMEGA:
        return (c[0] + QUARTER_PI, c[1])
    raise AssertionError(frame)


def _omega_to_chart(chart, c, eps):
    w, r = c
    if chart is Frame.K1:
        if r <= 0.0:
            raise SingularTransformError("K1 requires rbar > 0")
        e = r ** (1.0 / 3.0)
        return (w / r**2, e, math.sqrt(eps) / e)
    if chart is Frame.K2:
        _need_eps(eps)
        e = math.sqrt(eps)
        e3 = e**3
        return (w / (e3 * e3), r / e3, e)
    if chart is Frame.K3:
        if w <= 0.0:
            raise SingularTransformError("K3 requires omega > 0")
        e = w ** (1.0 / 6.0)
        return (e, r / math.sqrt(w), math.sqrt(eps) / e)
    raise AssertionError(chart)


def _chart_to_omega(chart, c):
    if chart is Frame.K1:
        w1, e, _ = c
        return (e**6 * w1, e**3)
    if chart is Frame.K2:
        w2, r2, e = c
        return (e**6 * w2, e**3 * r2)
    w = c[0] ** 6
    return (w, c[0] ** 3 * c[1])


def chart_epsilon(chart: Frame, coords) -> float:
    """Value of epsilon encoded by a blow-up chart point."""
    if chart is Frame.K1:
        ep = coords[1] * coords[2]
    elif chart is Frame.K2:
        ep = coords[2]
    elif chart is Frame.K3:
        ep = coords[0] * coords[2]
    else:
        raise ValueError(f"{chart} is not a blow-up chart")
    return ep * ep


def t12(c):
    """Chart change K1 -> K2."""
    w1, e1, c1 = c
    if c1 <= 0.0:
        raise SingularTransformError("T12 requires eps1 > 0")
    c3 = c1**3
    return (w1 / (c3 * c3), 1.0 / c3, e1 * c1)


def t21(c):
    """Chart change K2 -> K1."""
    w2, r2, e2 = c
    if r2 <= 0.0:
        raise SingularTransformError("T21 requires r2 > 0")
    c1 = r2 ** (-1.0 / 3.0)
    return (w2 / r2**2, e2 / c1, c1)


def t23(c):
    """Chart change K2 -> K3."""
    w2, r2, e2 = c
    if w2 <= 0.0:
        raise SingularTransformError("T23 requires omega2 > 0")
    return (e2 * w2 ** (1.0 / 6.0), r2 / math.sqrt(w2), w2 ** (-1.0 / 6.0))


def t32(c):
    """Chart change K3 -> K2."""
    e3, r3, c3 = c
    if c3 <= 0.0:
        raise SingularTransformError("T32 requires eps3 > 0")
    q = c3**3
    return (1.0 / (q * q), r3 / q, e3 * c3)


_CHART_EDGES = {
    (Frame.K1, Frame.K2): (t12,),
    (Frame.K2, Frame.K1): (t21,),
    (Frame.K2, Frame.K3): (t23,),
    (Frame.K3, Frame.K2): (t32,),
    (Frame.K1, Frame.K3): (t12, t23),
    (Frame.K3, Frame.K1): (t32, t21),
}


def transform_coords(coords, source: Frame, target: Frame, params: Params) -> tuple:
    """Coordinate-level version of :func:`transform_state`."""
    c = tuple(float(v) for v in coords)
    eps = params.epsilon
    if source is target:
        return c
    if source.is_chart and target.is_chart:
        for fn in _CHART_EDGES[(source, target)]:
            c = fn(c)
        return c
    if source.is_chart:
        c = _chart_to_omega(source, c)
        source = Frame.OMEGA
        if target is Frame.OMEGA:
            return c
    chart = target if target.is_chart else None
    tgt = Frame.OMEGA if chart else target
    i, j = _TREE.index(source), _TREE.index(tgt)
    while i < j:
        c = _step_up(_TREE[i], c, eps)
        i += 1
    while i > j:
        c = _step_down(_TREE[i], c, eps)
        i -= 1
    if chart:
        c = _omega_to_chart(chart, c, eps)
    return c


def transform_state(state: FrameState, target: Frame, params: Params) -> FrameState:
    """Map ``state`` into ``target`` by composing the elementary changes.

    Raises
    ------
    SingularTransformError
        When the composition divides by a vanishing coordinate, e.g. the
        inverse polar map at ``r = 0`` or ``T12`` at ``eps1 = 0``.
    """
    return FrameState(target, transform_coords(state.coords, state.frame, target, params))


# ---------------------------------------------------------------------------
# clocks


def _rate_per_t2(clock: Clock, state: FrameState, params: Params) -> float:
    """d(clock)/dt2 at ``state``."""
    eps = params.epsilon
    if clock is Clock.T2:
        return 1.0
    if clock is Clock.T1:
        return 1.0 / eps if eps > 0.0 else math.inf
    if clock is Clock.TAU2:
        return eps
    if clock is Clock.CHART2:
        return eps**3
    if clock is Clock.CHART3:
        w = transform_coords(state.coords, state.frame, Frame.OMEGA, params)[0]
        return w
    rbar = transform_coords(state.coords, state.frame, Frame.RESCALED, params)[1]
    r2 = rbar * rbar
    if clock in (Clock.T, Clock.CHART1):
        return r2
    if clock is Clock.TAU:
        return eps * r2
    raise AssertionError(clock)


def clock_rate(state: FrameState, source_clock: Clock, target_clock: Clock, params: Params) -> float:
    """Return d(target_clock)/d(source_clock) at ``state``.

    Examples
    --------
    >>> p = Params(0.5, 0.04)
    >>> clock_rate(FrameState(Frame.RESCALED, (1.0, 0.5)), Clock.T2, Clock.T, p)
    0.25
    """
    try:
        num = _rate_per_t2(target_clock, state, params)
        den = _rate_per_t2(source_clock, state, params)
    except SingularTransformError as exc:
        raise UndefinedRateError(str(exc)) from exc
    if not (math.isfinite(num) and math.isfinite(den)) or num == 0.0 or den == 0.0:
        raise UndefinedRateError(
            f"rate d{target_clock.value}/d{source_clock.value} degenerates at {state.coords!r}"
        )
    return num / den


# ---------------------------------------------------------------------------
# coherence checks

ADJACENT_PAIRS = tuple(zip(_TREE[:-1], _TREE[1:])) + (
    (Frame.OMEGA, Frame.K1),
    (Frame.OMEGA, Frame.K2),
    (Frame.OMEGA, Frame.K3),
    (Frame.K1, Frame.K2),
    (Frame.K2, Frame.K3),
)


def sample_state(frame: Frame, rng: np.random.Generator, params: Params) -> FrameState:
    """Random state near the blown-up corner, expressed in ``frame``.

    Points are drawn in OMEGA with ``omega in [1e-3, 0.02]`` and
    ``rbar in [0.05, 0.4]``, a region every frame (and chart) covers.
    """
    z = FrameState(Frame.OMEGA, (rng.uniform(1e-3, 0.02), rng.uniform(0.05, 0.4)))
    return transform_state(z, frame, params)


def pushforward_defect(state: FrameState, target: Frame, params: Params, h: float = 1e-7) -> float:
    """Relative mismatch between ``DT . F_source`` and ``rate * F_target``.

    ``DT`` is the Jacobian of the coordinate change (central differences)
    and ``rate`` the clock conversion factor between the two frames.
    """
    src = state.frame
    z = np.array(state.coords)

    def T(c):
        return np.array(transform_coords(c, src, target, params))

    DT = np.zeros((target.dim, src.dim))
    for j in range(src.dim):
        step = h * max(1.0, abs(z[j]))
        e = np.zeros(src.dim)
        e[j] = step
        DT[:, j] = (T(z + e) - T(z - e)) / (2 * step)
    lhs = DT @ eval_vector_field(state, params)
    image = transform_state(state, target, params)
    rhs = clock_rate(state, src.clock, target.clock, params) * eval_vector_field(image, params)
    return float(np.max(np.abs(lhs - rhs)) / np.max(np.abs(rhs)))


def round_trip_error(state: FrameState, target: Frame, params: Params) -> float:
    """Relative error of ``state -> target -> state.frame``."""
    back = transform_state(transform_state(state, target, params), state.frame, params)
    z, w = np.array(state.coords), np.array(back.coords)
    return float(np.max(np.abs(z - w)) / max(np.max(np.abs(z)), 1e-300))
