"""Arc-length geodesics: the horizontal system z' = cos phi, w' = sin phi rho_z eta.

The state integrated is (phi, r, z, w1, w2); the vertical pendulum and the
horizontal equations share one step sequence so event times are consistent
across components.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import EquilibriumInput, PreconditionOnLine, ReconstructionFailure
from .group import GroupElement, GroupSpec, Structure, rho, rho_factory
from .ode import DEFAULT_TOL, DenseSolution, Event, EventRecord, IntegrationResult, Tolerances, integrate
from .pendulum import (
    PeriodResult,
    PhasePoint,
    VerticalTrajectory,
    cap_time,
    crossing_event,
    equilibrium_at,
    period,
    wrap_angle,
)

W_DELTA = 1e-3
MONOTONE_SLACK = 1e-10


def geodesic_field(spec: GroupSpec, eta: Optional[np.ndarray] = None):
    """Right-hand side on (phi, r, z[, w1, w2]); w is dropped when eta is None."""
    half_det = 0.5 * spec.det_theta
    tr = spec.tr_theta
    sin, cos = math.sin, math.cos
    if eta is None:

        def f3(t, y):
            p, r = y[0], y[1]
            c = cos(p)
            return np.array([r, -half_det * sin(2.0 * p) + tr * r * c, c])

        return f3

    e1, e2 = float(eta[0]), float(eta[1])
    rho_entries = rho_factory(spec)

    def f5(t, y):
        p, r, z = y[0], y[1], y[2]
        c, s = cos(p), sin(p)
        a, b, cc, d = rho_entries(z)
        return np.array([r, -half_det * sin(2.0 * p) + tr * r * c, c, s * (a * e1 + b * e2), s * (cc * e1 + d * e2)])

    return f5


def z_zero_event(accept=None, terminal: int = 0) -> Event:
    def keep(t, y):
        return t > 0.0 and (accept is None or accept(t, y))

    return Event("z_zero", lambda t, y: y[2], terminal=terminal, accept=keep)


class GeodesicTrajectory:
    """Dense geodesic t -> (phi, r, z, w) on [0, T] with z-zero and crossing events."""

    def __init__(self, result: Optional[IntegrationResult], x0: np.ndarray, T: float):
        self.result = result
        self.T = float(T)
        self._x0 = x0
        self.solution: Optional[DenseSolution] = result.solution if result is not None else None

    def __call__(self, t):
        if self.solution is None:
            t_arr = np.asarray(t, dtype=float)
            if t_arr.ndim == 0:
                return self._x0.copy()
            return np.repeat(self._x0[:, None], t_arr.size, axis=1)
        return self.solution(t)

    @property
    def arc_length(self) -> float:
        return self.T

    @property
    def dimension(self) -> int:
        return self._x0.size

    def phi(self, t):
        return self(t)[0]

    def r(self, t):
        return self(t)[1]

    def z(self, t):
        return self(t)[2]

    def w(self, t):
        return self(t)[3:5]

    def at(self, t: float) -> GroupElement:
        y = self(t)
        return GroupElement(y[2], y[3:5] if y.size >= 5 else (0.0, 0.0))

    @property
    def endpoint(self) -> GroupElement:
        return self.at(self.T)

    @property
    def vertical_endpoint(self) -> PhasePoint:
        y = self(self.T)
        return PhasePoint(y[0], y[1])

    @property
    def vertical(self) -> VerticalTrajectory:
        return VerticalTrajectory(self.result, slice(0, 2))

    def _events(self, kind: str) -> list[EventRecord]:
        return [] if self.result is None else self.result.of_kind(kind)

    @property
    def z_zero_events(self) -> list[EventRecord]:
        return self._events("z_zero")

    @property
    def crossing_events(self) -> list[EventRecord]:
        return self._events("crossing")


def _flow(spec, eta, lam: PhasePoint, T: float, tol: Tolerances, events) -> GeodesicTrajectory:
    dim = 3 if eta is None else 5
    x0 = np.zeros(dim)
    x0[0], x0[1] = lam.phi, lam.r
    if T == 0:
        return GeodesicTrajectory(None, x0, 0.0)
    if T < 0:
        raise ValueError("T must be nonnegative")
    res = integrate(geodesic_field(spec, eta), x0, T, tol, events)
    return GeodesicTrajectory(res, x0, res.solution.t_end)


def exp_map(
    spec: GroupSpec,
    structure: Structure,
    lam: PhasePoint,
    T: float,
    tol: Tolerances = DEFAULT_TOL,
) -> tuple[GroupElement, GeodesicTrajectory]:
    """Exp(lambda, T) together with the dense geodesic on [0, T]."""
    traj = _flow(spec, structure.eta, lam, T, tol, [z_zero_event(), crossing_event()])
    return traj.endpoint, traj


def z_only_flow(spec: GroupSpec, lam: PhasePoint, T: float, tol: Tolerances = DEFAULT_TOL, events=None):
    """(phi, r, z) flow, enough for anything that only needs the R-component."""
    if events is None:
        events = [z_zero_event(), crossing_event()]
    return _flow(spec, None, lam, T, tol, events)


@dataclass(frozen=True)
class ZeroReport:
    detected: tuple[float, ...]
    predicted: Optional[tuple[float, ...]]
    period: PeriodResult

    def max_mismatch(self) -> float:
        """Hausdorff distance between detected and predicted sets (inf when counts differ)."""
        if self.predicted is None:
            return math.nan
        if len(self.detected) != len(self.predicted):
            return math.inf
        if not self.detected:
            return 0.0
        return float(np.max(np.abs(np.array(self.detected) - np.array(self.predicted))))


def predicted_z_zeros(pr: PeriodResult, T_max: float, merge_tol: float = 1e-9) -> tuple[float, ...]:
    """2A(lambda) U N tau(lambda) within (0, T_max]."""
    tau, t1 = pr.value, pr.t1
    pts = []
    k = 0
    while 2 * t1 + k * tau <= T_max:
        pts.append(2 * t1 + k * tau)
        k += 1
    n = 1
    while n * tau <= T_max:
        pts.append(n * tau)
        n += 1
    out: list[float] = []
    for t in sorted(pts):
        if t <= merge_tol:
            continue
        if out and t - out[-1] <= merge_tol:
            continue
        out.append(t)
    return tuple(out)


def z_zeros(
    spec: GroupSpec,
    lam: PhasePoint,
    T_max: float,
    tol: Tolerances = DEFAULT_TOL,
    pr: Optional[PeriodResult] = None,
) -> ZeroReport:
    """Roots of z on (0, T_max] by event location, with the predicted set when tau < inf."""
    if equilibrium_at(spec, lam) is not None:
        raise EquilibriumInput(f"{lam} is an equilibrium")
    traj = z_only_flow(spec, lam, T_max, tol, [z_zero_event()])
    detected = tuple(e.t for e in traj.z_zero_events)
    pr = period(spec, lam, tol) if pr is None else pr
    predicted = predicted_z_zeros(pr, T_max) if pr.finite else None
    return ZeroReport(detected, predicted, pr)


def on_reflection_line(phi0: float, phiT: float, tol: float = 1e-6) -> bool:
    """phi(0) + phi(T) == +-pi modulo 2 pi."""
    return abs(wrap_angle(phi0 + phiT - math.pi)) <= tol


def first_period_from_zeros(
    spec: GroupSpec, lam: PhasePoint, tol: Tolerances = DEFAULT_TOL, cap: Optional[float] = None
) -> float:
    """tau(lambda) as the first T > 0 with z(T) = 0 and phi(0) + phi(T) != +-pi."""
    if abs(math.cos(lam.phi)) <= tol.event:
        raise PreconditionOnLine(f"phi(0) = {lam.phi!r} lies on a line phi = +-pi/2")
    phi0 = lam.phi
    ev = z_zero_event(accept=lambda t, y: not on_reflection_line(phi0, y[0]), terminal=1)
    cap = cap_time(spec) if cap is None else cap
    traj = z_only_flow(spec, lam, cap, tol, [ev])
    hits = traj.z_zero_events
    return hits[0].t if hits else math.inf


def reconstruct_covector(
    spec: GroupSpec,
    structure: Structure,
    lam: PhasePoint,
    method: str = "exact",
    traj: Optional[GeodesicTrajectory] = None,
    t_sample: Optional[float] = None,
) -> np.ndarray:
    """The constant covector p with <p, rho_z(t) eta> = sin phi(t).

    "exact" uses h2 = <p, eta> = sin phi0 and h3 = <p, theta eta> = r0 at the
    identity. "sampled" imposes the h2 relation at t = 0 and at t_sample on an
    integrated trajectory, retrying at later sample times if the two rows are
    nearly dependent.
    """
    eta = structure.eta
    if method == "exact":
        A = np.vstack([eta, spec.theta @ eta])
        return np.linalg.solve(A, np.array([math.sin(lam.phi), lam.r]))
    if method != "sampled":
        raise ValueError(f"unknown method {method!r}")
    if traj is None:
        raise ValueError("sampled reconstruction needs a trajectory")
    ts = min(0.1, traj.T / 10) if t_sample is None else t_sample
    for _ in range(6):
        if ts > traj.T:
            break
        y = traj(ts)
        row = rho(spec, y[2]) @ eta
        A = np.vstack([eta, row])
        if abs(np.linalg.det(A)) > 1e-6 * np.linalg.norm(eta) * np.linalg.norm(row):
            return np.linalg.solve(A, np.array([math.sin(lam.phi), math.sin(y[0])]))
        ts *= 2.0
    raise ReconstructionFailure(f"sampling conditions dependent for {lam}")


def cotangent_residual(
    spec: GroupSpec, structure: Structure, traj: GeodesicTrajectory, p: np.ndarray, ts: np.ndarray
) -> float:
    """max |<p, rho_z(t) eta> - sin phi(t)| on the grid ts."""
    ys = traj(ts)
    rho_entries = rho_factory(spec)
    e1, e2 = structure.eta
    worst = 0.0
    for i in range(ys.shape[1]):
        a, b, c, d = rho_entries(ys[2, i])
        h2 = p[0] * (a * e1 + b * e2) + p[1] * (c * e1 + d * e2)
        worst = max(worst, abs(h2 - math.sin(ys[0, i])))
    return worst


@dataclass(frozen=True)
class WitnessResult:
    min_norm: float
    nondecreasing: bool
    max_decrease: float
    trivial: bool
    p: np.ndarray
    cotangent_residual: float


def w_positivity_witness(
    spec: GroupSpec,
    structure: Structure,
    lam: PhasePoint,
    T_max: float,
    delta: float = W_DELTA,
    n: int = 4001,
    tol: Tolerances = DEFAULT_TOL,
    slack: float = MONOTONE_SLACK,
) -> WitnessResult:
    """min ||w|| on [delta, T_max] and monotonicity of t -> <p, w(t)>."""
    eq = equilibrium_at(spec, lam)
    if eq is not None and eq.name in ("p1", "p3"):
        return WitnessResult(0.0, True, 0.0, True, np.zeros(2), 0.0)
    _, traj = exp_map(spec, structure, lam, T_max, tol)
    p = reconstruct_covector(spec, structure, lam)
    ts = np.linspace(0.0, T_max, n)
    ts_pos = ts[ts >= delta]
    ys = traj(ts)
    pw = p @ ys[3:5]
    dec = float(max(0.0, -np.min(np.diff(pw))))
    norms = np.hypot(*traj(ts_pos)[3:5])
    return WitnessResult(
        min_norm=float(norms.min()),
        nondecreasing=dec <= slack,
        max_decrease=dec,
        trivial=False,
        p=p,
        cotangent_residual=cotangent_residual(spec, structure, traj, p, ts),
    )
