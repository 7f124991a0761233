"""Closed-form geometry of the Brusselator in polar-type coordinates.

Critical manifolds, fast fibres, fold and drop points, the singular cycle,
the four curves describing the limit cycle in the original coordinates, slow
manifold expansions (closed form and a generic order-by-order engine) and
Hausdorff distances between polylines.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .frames import HALF_PI, QUARTER_PI, SQRT2, DomainError, Frame, Params, p_func

__all__ = [
    "SingularityError",
    "CurvePolyline",
    "SingularCycle",
    "ExpansionFields",
    "ExpansionCoefficients",
    "phi0",
    "dphi0",
    "phi1",
    "s1_expansion",
    "fast_fiber",
    "fiber_manifold_intersections",
    "reduced_flow_s2",
    "singular_cycle",
    "sigma_curves",
    "generic_slow_manifold_expansion",
    "rescaled_expansion_fields",
    "omega_expansion_fields",
    "to_epsilon_convention",
    "hausdorff_semidistance",
    "hausdorff_distance",
    "rescaled_to_xy_bar",
    "truncated_sigma_bar",
    "write_polylines_csv",
]

FOLD_GUARD = 1e-6


class SingularityError(ZeroDivisionError):
    """Evaluation at a point where a closed form has a vanishing denominator."""


@dataclass(frozen=True)
class CurvePolyline:
    """Ordered points of a planar curve.

    ``rescaled`` marks curves given in ``sqrt(eps) * (x, y)`` coordinates,
    which share the XYFAST axes but not its scale.
    """

    points: np.ndarray
    frame: Frame
    label: str = "custom"
    rescaled: bool = False

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 2:
            raise ValueError("a polyline needs at least two 2-D points")
        keep = np.ones(len(pts), dtype=bool)
        keep[1:] = np.any(np.diff(pts, axis=0) != 0.0, axis=1)
        pts = pts[keep]
        if len(pts) < 2:
            raise ValueError("polyline collapsed to a single point")
        object.__setattr__(self, "points", pts)

    def __len__(self):
        return len(self.points)

    @property
    def start(self) -> np.ndarray:
        return self.points[0]

    @property
    def end(self) -> np.ndarray:
        return self.points[-1]

    def arc_length(self) -> np.ndarray:
        seg = np.hypot(*np.diff(self.points, axis=0).T)
        return np.concatenate([[0.0], np.cumsum(seg)])

    def resample(self, n: int) -> np.ndarray:
        s = self.arc_length()
        u = np.linspace(0.0, s[-1], n)
        return np.column_stack([np.interp(u, s, self.points[:, 0]), np.interp(u, s, self.points[:, 1])])

    def concat(self, other: "CurvePolyline", label: str = "custom") -> "CurvePolyline":
        if other.frame is not self.frame or other.rescaled != self.rescaled:
            raise ValueError("cannot join polylines from different frames")
        return CurvePolyline(np.vstack([self.points, other.points]), self.frame, label, self.rescaled)


@dataclass(frozen=True)
class SingularCycle:
    """The four branches of the singular cycle in the RESCALED frame."""

    branches: tuple
    P0: tuple
    P1: tuple
    F: tuple
    Q: tuple

    def as_polyline(self) -> CurvePolyline:
        pts = np.vstack([b.points for b in self.branches])
        return CurvePolyline(pts, Frame.RESCALED, "singular-cycle")


# ---------------------------------------------------------------------------
# closed forms


def _check_angle(theta):
    if theta < QUARTER_PI - 1e-12 or theta > HALF_PI + 1e-12:
        raise DomainError(f"theta = {theta!r} outside [pi/4, pi/2]")


def phi0(theta: float, params: Params) -> float:
    """Critical manifold S0^2 as the graph r = phi0(theta)."""
    _check_angle(theta)
    # cos(pi/2) is not exactly zero in floating point
    c = 0.0 if theta >= HALF_PI else math.cos(theta)
    v = c * (math.sin(theta) - c) / params.a
    return math.sqrt(max(v, 0.0))


def dphi0(theta: float, params: Params) -> float:
    """Derivative of :func:`phi0` (singular at the endpoints)."""
    r = phi0(theta, params)
    if r == 0.0:
        raise SingularityError("phi0' is unbounded where phi0 vanishes")
    return (math.cos(2 * theta) + math.sin(2 * theta)) / (2.0 * params.a * r)


def phi1(theta: float, params: Params) -> float:
    """First-order correction of the slow manifold near S0^2 (power eps)."""
    _check_angle(theta)
    if abs(theta - params.theta_star) <= FOLD_GUARD:
        raise SingularityError("phi1 is singular at the fold angle arctan(2)")
    c = math.cos(theta)
    return -phi0(theta, params) * c / (2.0 * params.a * (2.0 * c - math.sin(theta)))


def s1_expansion(r: float, params: Params) -> float:
    """Angle of the slow manifold near theta = pi/4, truncated at eps^(3/2)."""
    return QUARTER_PI + r / SQRT2 * params.epsilon**1.5


def fast_fiber(rho: float, theta: float) -> float:
    """Layer orbit r = rho sin(theta)."""
    _check_angle(theta)
    return rho * math.sin(theta)


def fiber_manifold_intersections(rho: float, params: Params) -> tuple:
    """Angles where the fibre of height ``rho`` meets S0^2.

    Returns
    -------
    tuple of float
        Two sorted angles for ``rho < rho*``, one at the tangency
        ``rho = rho*`` and none above it.
    """
    if rho <= 0:
        raise ValueError("rho must be positive")
    q = params.a * rho * rho
    disc = 1.0 - 4.0 * q
    scale = 1e-12
    if disc < -scale:
        return ()
    if abs(disc) <= scale:
        return (math.atan(1.0 / (2.0 * q)),)
    sq = math.sqrt(disc)
    return tuple(sorted((math.atan((1.0 - sq) / (2.0 * q)), math.atan((1.0 + sq) / (2.0 * q)))))


def reduced_flow_s2(theta: float, params: Params) -> float:
    """Reduced (slow) flow on S0^2 in the slow clock tau2."""
    _check_angle(theta)
    if abs(theta - params.theta_star) <= FOLD_GUARD:
        raise SingularityError("reduced flow is singular at the fold")
    s, c = math.sin(theta), math.cos(theta)
    r0 = phi0(theta, params)
    return 2.0 * r0 * r0 * c * (s - c) ** 2 / (2.0 * c - s)


def singular_cycle(params: Params, samples_per_branch: int = 512) -> SingularCycle:
    """Build sigma-hat_1..4 in the RESCALED frame."""
    if samples_per_branch < 2:
        raise ValueError("need at least two samples per branch")
    n = samples_per_branch
    ts = params.theta_star
    rq = params.r_drop
    th1 = np.linspace(QUARTER_PI, HALF_PI, n)
    s1 = np.column_stack([th1, np.zeros(n)])
    th2 = np.linspace(HALF_PI, ts, n)
    s2 = np.column_stack([th2, [phi0(t, params) for t in th2]])
    s2[-1, 1] = params.r_star
    th3 = np.linspace(ts, QUARTER_PI, n)
    s3 = np.column_stack([th3, params.rho_star * np.sin(th3)])
    s3[0, 1] = params.r_star
    s3[-1, 1] = rq
    r4 = np.linspace(rq, 0.0, n)
    s4 = np.column_stack([np.full(n, QUARTER_PI), r4])
    labels = ("sigma_hat_1", "sigma_hat_2", "sigma_hat_3", "sigma_hat_4")
    br = tuple(CurvePolyline(p, Frame.RESCALED, lab) for p, lab in zip((s1, s2, s3, s4), labels))
    return SingularCycle(
        br,
        P0=(QUARTER_PI, 0.0),
        P1=(HALF_PI, 0.0),
        F=(ts, params.r_star),
        Q=(QUARTER_PI, rq),
    )


def sigma_curves(params: Params, rho_eps: float, samples: int = 512, rescaled: bool = False) -> dict:
    """The four curves approximating the cycle in the original coordinates.

    Parameters
    ----------
    params : Params
    rho_eps : float
        Height of the fibre carrying the cycle near sigma_1 (measured, the
        closed form is unknown).
    samples : int
        Points per curve, uniform in the curve parameter.
    rescaled : bool
        Return ``sqrt(eps) * sigma_i`` instead of ``sigma_i``.

    Returns
    -------
    dict
        ``{"sigma1": CurvePolyline, ..., "sigma4": ...}`` in XYFAST axes.
        sigma_2 is sampled on ``[theta*, pi/2)`` because it is unbounded at
        pi/2.
    """
    if rho_eps <= 0:
        raise ValueError("rho_eps must be positive")
    a, eps = params.a, params.epsilon
    k = 1.0 if rescaled else 1.0 / math.sqrt(eps)
    n = samples
    th = np.linspace(QUARTER_PI, HALF_PI, n)
    c1 = k * np.column_stack([np.cos(th) / (rho_eps * np.sin(th)), np.full(n, 1.0 / rho_eps)])
    th = np.linspace(params.theta_star, HALF_PI, n + 1)[:-1]
    s, c = np.sin(th), np.cos(th)
    c2 = k * np.column_stack([np.sqrt(a * c / (s - c)), np.sqrt(a * s * s / (c * (s - c)))])
    th = np.linspace(QUARTER_PI, params.theta_star, n)
    ra = 2.0 * math.sqrt(a)
    c3 = k * np.column_stack([ra / np.tan(th), np.full(n, ra)])
    r = np.linspace(rho_eps, params.r_drop, n)
    c4 = k * np.column_stack([1.0 / (SQRT2 * r), 1.0 / (SQRT2 * r)])
    tag = "sigma_bar" if rescaled else "sigma"
    return {
        f"sigma{i}": CurvePolyline(pts, Frame.XYFAST, f"{tag}_{i}", rescaled)
        for i, pts in enumerate((c1, c2, c3, c4), start=1)
    }


# ---------------------------------------------------------------------------
# generic slow-manifold expansion


@dataclass
class ExpansionFields:
    """Power-series coefficients of a planar fast-slow field.

    ``f[k](s, y)`` is the order-k part of the slow-variable equation and
    ``g[k](s, y)`` that of the fast variable ``y``; the slow manifold is
    sought as ``y = phi0(s) + e phi1(s) + e^2 phi2(s) + ...``.

    ``partials`` may supply y-derivatives under keys ``("f", k, m)`` /
    ``("g", k, m)`` (m-th derivative of the order-k term); anything missing
    is approximated by central differences.  ``dphi0`` optionally gives the
    derivative of the leading term.
    """

    f: Sequence[Callable]
    g: Sequence[Callable]
    partials: dict = field(default_factory=dict)
    dphi0: Optional[Callable] = None


@dataclass
class ExpansionCoefficients:
    """Order-indexed coefficients ``terms[k]`` of the small-parameter series."""

    terms: list
    parameter: str = "e"

    def __getitem__(self, k):
        return self.terms[k]

    def __len__(self):
        return len(self.terms)

    def evaluate(self, s: float, e: float) -> float:
        return sum(fn(s) * e**k for k, fn in enumerate(self.terms))


_FD_STEP = {1: 1e-5, 2: 1e-4, 3: 1e-3}


def _dy(fn, s, y, m):
    h = _FD_STEP[m]
    if m == 1:
        return (fn(s, y + h) - fn(s, y - h)) / (2 * h)
    if m == 2:
        return (fn(s, y + h) - 2 * fn(s, y) + fn(s, y - h)) / (h * h)
    return (fn(s, y + 2 * h) - 2 * fn(s, y + h) + 2 * fn(s, y - h) - fn(s, y - 2 * h)) / (2 * h**3)


def _ds(fn, s):
    h = 1e-5
    return (fn(s + h) - fn(s - h)) / (2 * h)


def generic_slow_manifold_expansion(
    fields: ExpansionFields, phi0_fn: Callable[[float], float], order: Optional[int] = None
) -> ExpansionCoefficients:
    """Order-by-order invariance expansion of an attracting slow manifold.

    Substituting the series into the invariance equation
    ``phi'(s) f(s, phi) = g(s, phi)`` and collecting powers gives each
    coefficient as a known expression divided by
    ``d_y g0 - phi0' d_y f0``.  Terms up to order three are supported; a
    term of order k needs ``f[k]`` and ``g[k]``.

    Parameters
    ----------
    fields : ExpansionFields
    phi0_fn : callable
        Leading-order manifold ``phi0(s)`` with ``f0(s, phi0(s)) = 0``.
    order : int, optional
        Highest order requested; defaults to ``len(fields.f) - 1`` (at most 3).

    Returns
    -------
    ExpansionCoefficients
        Callables ``[phi0, phi1, ...]``.  Evaluating a coefficient where the
        denominator vanishes raises :class:`SingularityError`.
    """
    kmax = min(len(fields.f), len(fields.g)) - 1
    order = kmax if order is None else order
    if order > min(kmax, 3) or order < 1:
        raise ValueError(f"order must lie in [1, {min(kmax, 3)}]")
    F, G, P = fields.f, fields.g, fields.partials

    def d(name, k, m, s, y):
        key = (name, k, m)
        if key in P:
            return P[key](s, y)
        fn = (F if name == "f" else G)[k]
        return _dy(fn, s, y, m)

    def dp0(s):
        return fields.dphi0(s) if fields.dphi0 is not None else _ds(phi0_fn, s)

    def denom(s):
        y = phi0_fn(s)
        den = d("g", 0, 1, s, y) - dp0(s) * d("f", 0, 1, s, y)
        scale = abs(d("g", 0, 1, s, y)) + abs(dp0(s) * d("f", 0, 1, s, y))
        if den == 0.0 or abs(den) <= 1e-14 * scale:
            raise SingularityError(f"expansion denominator vanishes at s = {s!r}")
        return den

    def phi1_fn(s):
        y = phi0_fn(s)
        return (dp0(s) * F[1](s, y) - G[1](s, y)) / denom(s)

    terms = [phi0_fn, phi1_fn]

    if order >= 2:

        def phi2_fn(s):
            y = phi0_fn(s)
            p0, p1 = dp0(s), phi1_fn(s)
            dp1 = _ds(phi1_fn, s) if p1 != 0.0 or F[1](s, y) != 0.0 else 0.0
            num = 0.5 * p1 * p1 * (p0 * d("f", 0, 2, s, y) - d("g", 0, 2, s, y)) if p1 else 0.0
            if p1:
                num += p1 * (p0 * d("f", 1, 1, s, y) + dp1 * d("f", 0, 1, s, y) - d("g", 1, 1, s, y))
            num += F[1](s, y) * dp1 + F[2](s, y) * p0 - G[2](s, y)
            return num / denom(s)

        terms.append(phi2_fn)

    if order >= 3:

        def phi3_fn(s):
            y = phi0_fn(s)
            p0, p1, p2 = dp0(s), phi1_fn(s), phi2_fn(s)
            dp1 = _ds(phi1_fn, s) if p1 else 0.0
            dp2 = _ds(phi2_fn, s) if p2 else 0.0

            def part(name, fn):
                # order-three coefficient of name(s, Phi(e), e) minus the phi3 term
                v = fn[3](s, y)
                if p1:
                    v += d(name, 2, 1, s, y) * p1 + 0.5 * d(name, 1, 2, s, y) * p1 * p1
                    v += d(name, 0, 3, s, y) * p1**3 / 6.0
                if p2:
                    v += d(name, 1, 1, s, y) * p2
                if p1 and p2:
                    v += d(name, 0, 2, s, y) * p1 * p2
                return v

            F1 = d("f", 0, 1, s, y) * p1 + F[1](s, y)
            F2 = d("f", 0, 1, s, y) * p2 + F[2](s, y)
            if p1:
                F2 += 0.5 * d("f", 0, 2, s, y) * p1 * p1 + d("f", 1, 1, s, y) * p1
            num = p0 * part("f", F) + dp1 * F2 + dp2 * F1 - part("g", G)
            return num / denom(s)

        terms.append(phi3_fn)
    return ExpansionCoefficients(terms)


def rescaled_expansion_fields(params: Params, exact_partials: bool = True) -> ExpansionFields:
    """RESCALED field near S0^2 written in powers of e = sqrt(eps).

    The slow variable is theta and the graph variable is rbar.
    """
    a = params.a

    def f0(th, r):
        s, c = math.sin(th), math.cos(th)
        return -s * (s - c) * p_func(th, r, a)

    def g0(th, r):
        s, c = math.sin(th), math.cos(th)
        return -r * c * (s - c) * p_func(th, r, a)

    zero = lambda th, r: 0.0
    f2 = lambda th, r: -r * r * math.cos(th) * (math.sin(th) - math.cos(th))
    g2 = lambda th, r: r**3 * math.sin(th) * (math.sin(th) - math.cos(th))
    f3 = lambda th, r: a * r**3 * math.cos(th)
    g3 = lambda th, r: -a * r**4 * math.sin(th)
    partials = {}
    dp = None
    if exact_partials:
        def f0r(th, r):
            s, c = math.sin(th), math.cos(th)
            return -s * (s - c) * 2.0 * a * r

        def g0r(th, r):
            s, c = math.sin(th), math.cos(th)
            return -c * (s - c) * (p_func(th, r, a) + 2.0 * a * r * r)

        partials = {("f", 0, 1): f0r, ("g", 0, 1): g0r}
        dp = lambda th: dphi0(th, params)
    return ExpansionFields([f0, zero, f2, f3], [g0, zero, g2, g3], partials, dp)


def omega_expansion_fields(params: Params) -> ExpansionFields:
    """OMEGA field in powers of e = sqrt(eps); slow variable rbar, graph omega."""
    a = params.a
    k = a / SQRT2

    def S(w):
        return math.sin(w) + math.cos(w)

    def D(w):
        return math.cos(w) - math.sin(w)

    f0 = lambda r, w: -a * r**3 * math.sin(w) * D(w) + r * math.sin(w) ** 2 * D(w) ** 2
    g0 = lambda r, w: -a * r * r * math.sin(w) * S(w) + math.sin(w) ** 2 * S(w) * D(w)
    zero = lambda r, w: 0.0
    f2 = lambda r, w: r**3 * math.sin(w) * S(w)
    g2 = lambda r, w: -r * r * math.sin(w) * D(w)
    f3 = lambda r, w: -k * r**4 * S(w)
    g3 = lambda r, w: k * r**3 * D(w)
    return ExpansionFields([f0, zero, f2, f3], [g0, zero, g2, g3], {}, lambda r: 0.0)


def to_epsilon_convention(coeffs: ExpansionCoefficients) -> dict:
    """Re-index a series in ``e = sqrt(eps)`` by powers of eps.

    Returns
    -------
    dict
        ``{power_of_eps: callable}``; the order-k coefficient in ``e`` is the
        coefficient of ``eps**(k/2)``.
    """
    return {k / 2: fn for k, fn in enumerate(coeffs.terms)}


# ---------------------------------------------------------------------------
# Hausdorff distance


def _point_segment_min(P, A, B, chunk=512):
    """Distance from each point of P to the nearest segment A[j]B[j]."""
    AB = B - A
    L2 = np.einsum("ij,ij->i", AB, AB)
    L2 = np.where(L2 > 0, L2, 1.0)
    out = np.empty(len(P))
    for i0 in range(0, len(P), chunk):
        p = P[i0 : i0 + chunk, None, :]
        t = np.einsum("ijk,jk->ij", p - A[None], AB) / L2
        t = np.clip(t, 0.0, 1.0)
        proj = A[None] + t[..., None] * AB[None]
        dd = np.sum((p - proj) ** 2, axis=-1)
        out[i0 : i0 + chunk] = np.sqrt(dd.min(axis=1))
    return out


def _check_frames(A, B):
    if A.frame is not B.frame or A.rescaled != B.rescaled:
        raise ValueError(f"frame mismatch: {A.frame.value} vs {B.frame.value}")


def hausdorff_semidistance(A, B: CurvePolyline, resample: int = 4096) -> float:
    """``sup_{a in A} dist(a, B)`` with A densely resampled.

    ``A`` may be a single polyline or a sequence of them, read as a union
    of separate pieces (no segment joins one piece to the next).
    """
    parts = [A] if isinstance(A, CurvePolyline) else list(A)
    if not parts:
        raise ValueError("empty curve")
    worst = 0.0
    for part in parts:
        _check_frames(part, B)
        P = part.resample(resample)
        worst = max(worst, float(_point_segment_min(P, B.points[:-1], B.points[1:]).max()))
    return worst


def hausdorff_distance(A: CurvePolyline, B: CurvePolyline, resample: int = 4096) -> float:
    """Symmetric Hausdorff distance between two polylines.

    Accuracy is limited by the resampling spacing of each curve.
    """
    return max(hausdorff_semidistance(A, B, resample), hausdorff_semidistance(B, A, resample))


def rescaled_to_xy_bar(poly: CurvePolyline, label: Optional[str] = None) -> CurvePolyline:
    """Map a RESCALED-frame polyline to ``sqrt(eps) * (x, y)`` axes.

    Uses ``(cos theta / rbar, sin theta / rbar)``; points with ``rbar = 0``
    have no image.
    """
    if poly.frame is not Frame.RESCALED:
        raise ValueError("expected a RESCALED polyline")
    th, r = poly.points[:, 0], poly.points[:, 1]
    if np.any(r <= 0):
        raise SingularityError("rbar = 0 has no image in the rescaled plane")
    pts = np.column_stack([np.cos(th) / r, np.sin(th) / r])
    return CurvePolyline(pts, Frame.XYFAST, label or poly.label, True)


def truncated_sigma_bar(params: Params, rho_eps: float, samples: int = 2048) -> list:
    """sigma-bar_2, sigma-bar_3, sigma-bar_4 cut at ``ybar <= 1/(sqrt 2 rho_eps)``.

    The cut keeps the unbounded end of sigma-bar_2 finite; sigma-bar_4
    already ends at that height.
    """
    ymax = 1.0 / (SQRT2 * rho_eps) * (1.0 + 1e-12)
    curves = sigma_curves(params, rho_eps, samples, rescaled=True)
    out = []
    for key in ("sigma2", "sigma3", "sigma4"):
        c = curves[key]
        pts = c.points[c.points[:, 1] <= ymax]
        out.append(CurvePolyline(pts, Frame.XYFAST, c.label, True))
    return out


def write_polylines_csv(path, polylines: Sequence[CurvePolyline]) -> None:
    """Write polylines with columns ``s, coord1, coord2, label``.

    ``s`` is the cumulative arc length along each polyline.
    """
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["s", "coord1", "coord2", "label"])
        for pl in polylines:
            for s, (u, v) in zip(pl.arc_length(), pl.points):
                wr.writerow([f"{s:.17g}", f"{u:.17g}", f"{v:.17g}", pl.label])
