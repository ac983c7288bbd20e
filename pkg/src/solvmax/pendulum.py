"""The perturbed pendulum on the cylinder S^1 x R.

    phi' = r,   r' = -(det/2) sin(2 phi) + tr r cos(phi)

phi is always integrated on its continuous lift; wrapping to (-pi, pi]
happens only when points are compared or reported.
"""
from __future__ import annotations

import enum
import functools
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import ConnectionNotFound, EquilibriumInput, NotACrossing
from .group import GroupSpec, Regime
from .ode import DEFAULT_TOL, DenseSolution, Event, IntegrationResult, Tolerances, integrate, reversed_field

log = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi
EQ_TOL = 1e-12
SEP_TOL = 1e-9
SEP_ARRIVAL = 1e-6
ATTRACTOR_RADIUS = 1e-6
CAP_FACTOR = 200.0


def wrap_angle(x: float) -> float:
    """Representative of x modulo 2 pi in (-pi, pi]."""
    y = math.remainder(x, TWO_PI)
    return math.pi if y == -math.pi else y


@dataclass(frozen=True)
class PhasePoint:
    phi: float
    r: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "phi", wrap_angle(float(self.phi)))
        object.__setattr__(self, "r", float(self.r))

    def as_array(self) -> np.ndarray:
        return np.array([self.phi, self.r])

    def distance(self, other: "PhasePoint") -> float:
        return max(abs(wrap_angle(self.phi - other.phi)), abs(self.r - other.r))


def pendulum_field(spec: GroupSpec) -> Callable[[float, np.ndarray], np.ndarray]:
    half_det = 0.5 * spec.det_theta
    tr = spec.tr_theta
    sin, cos = math.sin, math.cos

    def f(t: float, y: np.ndarray) -> np.ndarray:
        p, r = y[0], y[1]
        return np.array([r, -half_det * sin(2.0 * p) + tr * r * cos(p)])

    return f


def cap_time(spec: GroupSpec, factor: float = CAP_FACTOR) -> float:
    """Integration horizon for period searches: factor times the linear period scale."""
    return factor * TWO_PI / math.sqrt(abs(spec.det_theta))


# ---------------------------------------------------------------- equilibria


class EqType(str, enum.Enum):
    SADDLE = "Saddle"
    CENTER = "Center"
    FOCUS_ATTRACTING = "FocusAttracting"
    FOCUS_REPELLING = "FocusRepelling"
    NODE_ATTRACTING = "NodeAttracting"
    NODE_REPELLING = "NodeRepelling"
    BOUNDARY = "Boundary"


@dataclass(frozen=True, eq=False)
class EquilibriumInfo:
    name: str
    k: int
    location: PhasePoint
    jacobian: np.ndarray
    type: EqType
    eigenvalues: np.ndarray
    eigenvectors: Optional[np.ndarray]


# p1 sits at phi = pi (== -pi); k indexes (k pi/2, 0).
_EQ_INDEX = {"p1": 2, "p2": -1, "p3": 0, "p4": 1}


def _cos_half_pi(k: int) -> int:
    return 0 if k % 2 else (1 if k % 4 == 0 else -1)


def jacobian(spec: GroupSpec, k: int) -> np.ndarray:
    sign = 1 if (k + 1) % 2 == 0 else -1
    return np.array([[0.0, 1.0], [sign * spec.det_theta, spec.tr_theta * _cos_half_pi(k)]])


def _classify_jacobian(spec: GroupSpec, J: np.ndarray) -> EqType:
    trJ = J[1, 1]
    detJ = -J[1, 0]
    if detJ < 0:
        return EqType.SADDLE
    if trJ == 0.0:
        return EqType.CENTER
    disc = trJ * trJ - 4.0 * detJ
    if spec.is_boundary():
        return EqType.BOUNDARY
    if disc < 0:
        return EqType.FOCUS_ATTRACTING if trJ < 0 else EqType.FOCUS_REPELLING
    return EqType.NODE_ATTRACTING if trJ < 0 else EqType.NODE_REPELLING


def equilibria(spec: GroupSpec) -> list[EquilibriumInfo]:
    out = []
    for name, k in _EQ_INDEX.items():
        J = jacobian(spec, k)
        vals, vecs = np.linalg.eig(J)
        real = bool(np.all(np.abs(vals.imag) == 0))
        if real:
            order = np.argsort(vals.real)
            vals = vals.real[order]
            vecs = vecs.real[:, order]
        out.append(
            EquilibriumInfo(
                name=name,
                k=k,
                location=PhasePoint(k * math.pi / 2, 0.0),
                jacobian=J,
                type=_classify_jacobian(spec, J),
                eigenvalues=vals,
                eigenvectors=vecs if real else None,
            )
        )
    return out


def equilibrium_at(spec: GroupSpec, lam: PhasePoint, tol: float = EQ_TOL) -> Optional[EquilibriumInfo]:
    for info in equilibria(spec):
        if lam.distance(info.location) <= tol:
            return info
    return None


def attractor(spec: GroupSpec) -> Optional[EquilibriumInfo]:
    """The attracting focus/node (det > 0 only)."""
    if spec.det_theta < 0:
        return None
    name = "p1" if spec.tr_theta > 0 else "p3"
    return next(e for e in equilibria(spec) if e.name == name)


# -------------------------------------------------------------- separatrices


class Region(str, enum.Enum):
    ANNULUS_P2 = "annulus_p2"
    ANNULUS_P4 = "annulus_p4"
    ANNULUS_UPPER = "annulus_upper"
    ANNULUS_LOWER = "annulus_lower"
    NON_PERIODIC_K = "K"
    SEPARATRIX = "separatrix"
    EQUILIBRIUM = "equilibrium"

    @property
    def is_periodic(self) -> bool:
        return self.value.startswith("annulus")


@dataclass(frozen=True, eq=False)
class SeparatrixCurve:
    """A heteroclinic/homoclinic orbit traced as a graph r = f(phi) on the lift.

    The orbit is assembled from the unstable branch of the source saddle
    (forward) and the stable branch of the target saddle (backward), both run
    to the reversibility line phi = phi_mid where they must agree.
    """

    tag: str
    source: str
    target: str
    phi_source: float
    phi_target: float
    side: int
    points: np.ndarray  # (n, 2) polyline (phi_lift, r), source -> target
    arrival_distance: float
    departure_distance: float
    section_mismatch: float
    strip_ok: bool
    _spline: CubicSpline = field(repr=False)

    @property
    def phi_range(self) -> tuple[float, float]:
        return min(self.phi_source, self.phi_target), max(self.phi_source, self.phi_target)

    def r_at(self, phi_lift):
        """Graph value on the lift range of this curve."""
        return self._spline(phi_lift)


@dataclass(frozen=True, eq=False)
class SeparatrixSet:
    spec_key: tuple
    det_sign: int
    curves: dict[str, SeparatrixCurve]
    delta: float

    def classify(self, lam: PhasePoint, tol: float = SEP_TOL) -> Region:
        return _classify(self, lam, tol)

    def region_classifier(self) -> Callable[[PhasePoint], Region]:
        return self.classify

    def max_section_mismatch(self) -> float:
        return max(c.section_mismatch for c in self.curves.values())


def _eig_at(spec: GroupSpec, phi: float) -> tuple[float, float]:
    """(unstable, stable) eigenvalues of the linearization at a saddle phi."""
    J = np.array([[0.0, 1.0], [-spec.det_theta * math.cos(2 * phi), spec.tr_theta * math.cos(phi)]])
    tr, det = J[1, 1], -J[1, 0]
    disc = tr * tr - 4 * det
    if det >= 0 or disc <= 0:
        raise ValueError("not a saddle")
    s = math.sqrt(disc)
    return 0.5 * (tr + s), 0.5 * (tr - s)


def _trace_half(
    spec: GroupSpec, start: np.ndarray, backward: bool, phi_mid: float, side: int, tol: Tolerances, t_cap: float
) -> IntegrationResult:
    f = pendulum_field(spec)
    fld = reversed_field(f) if backward else f
    events = [
        Event("section", lambda t, y: y[0] - phi_mid, terminal=1),
        Event("left_strip", lambda t, y: y[1], terminal=1),
    ]
    res = integrate(fld, start, t_cap, tol, events)
    if res.terminated_by != "section":
        raise ConnectionNotFound(
            f"trace from {start.tolist()} ended by {res.terminated_by or 'time cap'} before phi={phi_mid:.6g}"
        )
    return res


def _graph_samples(sol: DenseSolution, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Points of the traced branch approximately uniform in phi."""
    fine = []
    for ta, tb, _ in sol.segments:
        fine.append(np.linspace(ta, tb, 17)[:-1])
    fine.append(np.array([sol.t_end]))
    tf = np.concatenate(fine)
    yf = sol(tf)
    phi_f = yf[0]
    order = np.argsort(phi_f)
    lo, hi = phi_f.min(), phi_f.max()
    grid = np.linspace(lo, hi, n)
    t_k = np.interp(grid, phi_f[order], tf[order])
    yk = sol(t_k)
    return yk[0], yk[1]


_SEP_SAMPLES = 1500


def _build_curve(
    spec: GroupSpec, tag: str, src: str, tgt: str, phi_s: float, phi_t: float, side: int, delta: float, tol: Tolerances
) -> SeparatrixCurve:
    lu_s, _ = _eig_at(spec, phi_s)
    _, ls_t = _eig_at(spec, phi_t)
    direction = 1.0 if phi_t > phi_s else -1.0
    if direction != side:
        raise ValueError("phi must increase on r > 0 branches")
    phi_mid = 0.5 * (phi_s + phi_t)
    start_f = np.array([phi_s, 0.0]) + side * delta * np.array([1.0, lu_s])
    start_b = np.array([phi_t, 0.0]) - side * delta * np.array([1.0, ls_t])
    t_cap = 50.0 * (1.0 / lu_s + 1.0 / abs(ls_t)) * (1.0 + math.log(1.0 / delta))
    fwd = _trace_half(spec, start_f, False, phi_mid, side, tol, t_cap)
    bwd = _trace_half(spec, start_b, True, phi_mid, side, tol, t_cap)
    r_f = fwd.solution.final_state[1]
    r_b = bwd.solution.final_state[1]
    mismatch = abs(r_f - r_b)

    pf, rf = _graph_samples(fwd.solution, _SEP_SAMPLES)
    pb, rb = _graph_samples(bwd.solution, _SEP_SAMPLES)
    lo, hi = min(phi_s, phi_t), max(phi_s, phi_t)
    strip_ok = bool(
        np.all(side * rf > 0) and np.all(side * rb > 0)
        and np.all((pf > lo) & (pf < hi)) and np.all((pb > lo) & (pb < hi))
    )
    # graph data: saddles, both branches; drop the backward copy of the midpoint
    phis = np.concatenate([[phi_s], pf, pb, [phi_t]])
    rs = np.concatenate([[0.0], rf, rb, [0.0]])
    order = np.argsort(phis)
    phis, rs = phis[order], rs[order]
    keep = np.concatenate([[True], np.diff(phis) > 1e-9])
    spline = CubicSpline(phis[keep], rs[keep])

    # polyline in traversal order source -> target
    f_order = np.argsort(direction * pf)
    b_order = np.argsort(direction * pb)
    poly = np.vstack([
        start_f[None, :],
        np.column_stack([pf[f_order], rf[f_order]]),
        np.column_stack([pb[b_order], rb[b_order]]),
        start_b[None, :],
    ])
    return SeparatrixCurve(
        tag=tag,
        source=src,
        target=tgt,
        phi_source=phi_s,
        phi_target=phi_t,
        side=side,
        points=poly,
        arrival_distance=float(np.hypot(*(poly[-1] - [phi_t, 0.0]))),
        departure_distance=float(np.hypot(*(poly[0] - [phi_s, 0.0]))),
        section_mismatch=float(mismatch),
        strip_ok=strip_ok,
        _spline=spline,
    )


def separatrix_layout(spec: GroupSpec) -> list[tuple[str, str, str, float, float, int]]:
    """(tag, source, target, phi_source, phi_target, side) for each connection."""
    pi = math.pi
    if spec.det_theta < 0:
        # H^-_{3,1} lies in (-pi,0) x R<0 and H^-_{1,3} in (0,pi) x R<0: r < 0 forces phi to decrease.
        return [
            ("H+13", "p1", "p3", -pi, 0.0, 1),
            ("H+31", "p3", "p1", 0.0, pi, 1),
            ("H-13", "p1", "p3", pi, 0.0, -1),
            ("H-31", "p3", "p1", 0.0, -pi, -1),
        ]
    s = 1 if spec.tr_theta > 0 else -1
    return [
        ("H2", "p2", "p2", -pi / 2, -pi / 2 + s * TWO_PI, s),
        ("H4", "p4", "p4", pi / 2, pi / 2 - s * TWO_PI, -s),
    ]


_SEP_TOL = Tolerances(atol=1e-13, rtol=1e-13)


@functools.lru_cache(maxsize=64)
def _separatrices_cached(key: tuple, det: float, tr: float) -> SeparatrixSet:
    from .group import make_group_spec

    spec = make_group_spec(np.array(key).reshape(2, 2))
    r_scale = math.sqrt(abs(det))
    delta = 1e-8 * (1.0 + r_scale)
    curves = {}
    for tag, src, tgt, ps, pt, side in separatrix_layout(spec):
        curves[tag] = _build_curve(spec, tag, src, tgt, ps, pt, side, delta, _SEP_TOL)
    return SeparatrixSet(key, 1 if det > 0 else -1, curves, delta)


def separatrices(spec: GroupSpec) -> SeparatrixSet:
    """Trace every separatrix of the phase portrait (cached per theta)."""
    return _separatrices_cached(spec.key, spec.det_theta, spec.tr_theta)


def _classify(seps: SeparatrixSet, lam: PhasePoint, tol: float) -> Region:
    phi, r = lam.phi, lam.r
    tol_r = tol * (1.0 + abs(r))
    for k in (2, -1, 0, 1):
        if lam.distance(PhasePoint(k * math.pi / 2, 0.0)) <= EQ_TOL:
            return Region.EQUILIBRIUM
    c = seps.curves
    if seps.det_sign < 0:
        if phi <= 0.0:
            upper, lower = c["H+13"], c["H-31"]
        else:
            upper, lower = c["H+31"], c["H-13"]
        u = float(upper.r_at(phi))
        l = float(lower.r_at(phi))
        if abs(r - u) <= tol_r or abs(r - l) <= tol_r:
            return Region.SEPARATRIX
        if r > u:
            return Region.ANNULUS_UPPER
        if r < l:
            return Region.ANNULUS_LOWER
        return Region.ANNULUS_P2 if phi < 0.0 else Region.ANNULUS_P4
    up = c["H2"] if c["H2"].side > 0 else c["H4"]
    lo = c["H4"] if up is c["H2"] else c["H2"]
    u = float(up.r_at(up.phi_source + (phi - up.phi_source) % TWO_PI))
    l = float(lo.r_at(lo.phi_source - (lo.phi_source - phi) % TWO_PI))
    if abs(r - u) <= tol_r or abs(r - l) <= tol_r:
        return Region.SEPARATRIX
    if r > u:
        return Region.ANNULUS_UPPER
    if r < l:
        return Region.ANNULUS_LOWER
    return Region.NON_PERIODIC_K


def classify_region(spec: GroupSpec, lam: PhasePoint) -> Region:
    return separatrices(spec).classify(lam)


# -------------------------------------------------------- crossings / period


class PeriodClass(str, enum.Enum):
    PERIODIC = "periodic"
    CENTER = "center"
    EQUILIBRIUM = "equilibrium"
    SEPARATRIX = "separatrix"
    NON_PERIODIC_K = "non_periodic_K"
    EXCEEDED_CAP = "exceeded_cap"


@dataclass(frozen=True)
class PeriodResult:
    value: float
    t1: Optional[float]
    classification: PeriodClass
    crossings: tuple[float, ...] = ()

    @property
    def finite(self) -> bool:
        return math.isfinite(self.value)


class VerticalTrajectory:
    """Dense solution of the pendulum with its recorded line crossings."""

    def __init__(self, result: IntegrationResult, components: slice = slice(0, 2)):
        self.result = result
        self.solution = result.solution
        self._cols = components

    def __call__(self, t):
        return self.solution(t)[self._cols]

    @property
    def t_end(self) -> float:
        return self.solution.t_end

    @property
    def crossings(self) -> list[tuple[float, int]]:
        return [(e.t, 1 if math.sin(e.state[0]) > 0 else -1) for e in self.result.of_kind("crossing")]


def crossing_event(terminal: int = 0) -> Event:
    return Event("crossing", lambda t, y: math.cos(y[0]), terminal=terminal)


def solve_vertical(
    spec: GroupSpec, lam: PhasePoint, T: float, tol: Tolerances = DEFAULT_TOL, extra_events=(), terminal: int = 0
) -> VerticalTrajectory:
    res = integrate(pendulum_field(spec), lam.as_array(), T, tol, [crossing_event(terminal), *extra_events])
    return VerticalTrajectory(res)


def crossing_times(
    spec: GroupSpec, lam: PhasePoint, t_max: float, tol: Tolerances = DEFAULT_TOL
) -> list[tuple[float, int]]:
    """The crossing set A(lambda) on [0, t_max]: times with cos(phi(T)) = 0, tagged by sign(sin phi)."""
    if equilibrium_at(spec, lam) is not None:
        raise EquilibriumInput(f"{lam} is an equilibrium")
    return solve_vertical(spec, lam, t_max, tol).crossings


def center_period(spec: GroupSpec) -> float:
    return TWO_PI / math.sqrt(-spec.det_theta)


def period(
    spec: GroupSpec,
    lam: PhasePoint,
    tol: Tolerances = DEFAULT_TOL,
    cap: Optional[float] = None,
    classify: bool = True,
) -> PeriodResult:
    """Period tau(lambda) of the pendulum solution through lam, extended to +inf.

    Finite values come from the first two crossings: tau = 2 (T2 - T1).
    Centers (det < 0) return the limit 2 pi / sqrt(-det).
    """
    eq = equilibrium_at(spec, lam)
    if eq is not None:
        if eq.type is EqType.CENTER:
            return PeriodResult(center_period(spec), None, PeriodClass.CENTER)
        return PeriodResult(math.inf, None, PeriodClass.EQUILIBRIUM)
    region = None
    if classify:
        region = classify_region(spec, lam)
        if region is Region.SEPARATRIX:
            return PeriodResult(math.inf, None, PeriodClass.SEPARATRIX)
        if region is Region.NON_PERIODIC_K:
            return PeriodResult(math.inf, None, PeriodClass.NON_PERIODIC_K)
    cap = cap_time(spec) if cap is None else cap
    extra = []
    att = attractor(spec)
    if att is not None:
        pa = att.location.phi
        extra.append(
            Event(
                "attractor",
                lambda t, y: wrap_angle(y[0] - pa) ** 2 + y[1] ** 2 - ATTRACTOR_RADIUS**2,
                terminal=1,
                direction=-1,
            )
        )
    traj = solve_vertical(spec, lam, cap, tol, extra, terminal=2)
    cr = [t for t, _ in traj.crossings]
    if len(cr) >= 2:
        return PeriodResult(2.0 * (cr[1] - cr[0]), cr[0], PeriodClass.PERIODIC, tuple(cr))
    if traj.result.terminated_by == "attractor":
        return PeriodResult(math.inf, cr[0] if cr else None, PeriodClass.NON_PERIODIC_K, tuple(cr))
    if region is None:
        region = classify_region(spec, lam)
    if region is Region.NON_PERIODIC_K:
        cls = PeriodClass.NON_PERIODIC_K
    elif region is Region.SEPARATRIX:
        cls = PeriodClass.SEPARATRIX
    else:
        cls = PeriodClass.EXCEEDED_CAP
        log.warning("no second crossing before cap %.3g for %s (region %s)", cap, lam, region.value)
    return PeriodResult(math.inf, cr[0] if cr else None, cls, tuple(cr))


def closure_residual(spec: GroupSpec, lam: PhasePoint, tau: float, tol: Tolerances = DEFAULT_TOL) -> float:
    """max(|phi(tau) - phi(0)| mod 2 pi, |r(tau) - r(0)|)."""
    y = integrate(pendulum_field(spec), lam.as_array(), tau, tol).solution.final_state
    return max(abs(wrap_angle(y[0] - lam.phi)), abs(y[1] - lam.r))


def verify_reflection_property(
    spec: GroupSpec,
    lam: PhasePoint,
    T0: float,
    eps: int,
    t_span: float = 5.0,
    n: int = 201,
    tol: Tolerances = DEFAULT_TOL,
) -> float:
    """max over t in [0, t_span] of |phi(T0 - t) + phi(T0 + t) - pi eps| (mod 2 pi)."""
    f = pendulum_field(spec)
    y0 = lam.as_array()
    y_T0 = y0 if T0 == 0 else integrate(f, y0, T0, tol).solution.final_state
    if abs(math.cos(y_T0[0])) > 10 * tol.event * max(1.0, abs(y_T0[1])):
        raise NotACrossing(f"cos(phi(T0)) = {math.cos(y_T0[0])!r} at T0={T0!r}")
    ts = np.linspace(0.0, t_span, n)
    fwd = integrate(f, y_T0, t_span, tol).solution
    bwd = integrate(reversed_field(f), y_T0, t_span, tol).solution
    total = fwd(ts)[0] + bwd(ts)[0] - math.pi * eps
    return float(max(abs(wrap_angle(x)) for x in total))


def portrait_grid(
    spec: GroupSpec, phis, rs, tol: Tolerances = DEFAULT_TOL, cap: Optional[float] = None
) -> list[tuple[float, float, str, float]]:
    """(phi, r, region, tau) over the tensor grid phis x rs, row-major in phi."""
    seps = separatrices(spec)
    rows = []
    for p in phis:
        for r in rs:
            lam = PhasePoint(p, r)
            region = seps.classify(lam)
            tau = period(spec, lam, tol, cap).value
            rows.append((float(p), float(r), region.value, tau))
    return rows
