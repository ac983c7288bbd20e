"""Maxwell points of the E3 reflection, the first Maxwell time and the cut-time bound.

Off the lines phi = +-pi/2 the first Maxwell time is the pendulum period; on
them, or when the period is infinite, it is +inf. The period is also an upper
bound for the cut time everywhere on the cylinder.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .geodesic import exp_map
from .group import GroupSpec, Structure, group_distance
from .ode import DEFAULT_TOL, Tolerances
from .pendulum import PeriodResult, PhasePoint, period, solve_vertical
from .symmetry import REFLECTIONS, SymmetryElement, act_phase_point, act_phase_preimage

EPS_LINE = 1e-9
EPS_TIME_REL = 1e-7
SEPARATION_MIN = 1e-3
# Orbit points are advanced with tighter tolerances: separatrix orbits are
# unstable and the advected point must stay within the classifier band.
FLOW_TOL = Tolerances(atol=1e-13, rtol=1e-13)


def on_half_pi_line(lam: PhasePoint, eps: float = EPS_LINE) -> bool:
    return abs(math.cos(lam.phi)) <= eps


def time_tolerance(tau: float) -> float:
    return EPS_TIME_REL * max(1.0, tau)


@dataclass(frozen=True)
class MaxwellResult:
    t1_max: float
    on_half_pi_line: bool
    period: PeriodResult
    maxwell_times_in_window: tuple[float, ...] = ()

    @property
    def finite(self) -> bool:
        return math.isfinite(self.t1_max)


@dataclass(frozen=True)
class MaxwellCertificate:
    """Two distinct extremals lam, lam3 with (numerically) equal endpoints at T."""

    lam: PhasePoint
    lam3: PhasePoint
    T: float
    endpoint_gap: float
    max_separation: float
    z_end: float


@dataclass(frozen=True)
class MembershipResult:
    member: bool
    n: Optional[int]
    reason: str
    certificate: Optional[MaxwellCertificate] = None

    def __bool__(self) -> bool:
        return self.member


def maxwell_certificate(
    spec: GroupSpec,
    structure: Structure,
    lam: PhasePoint,
    T: float,
    n_grid: int = 2001,
    tol: Tolerances = DEFAULT_TOL,
) -> MaxwellCertificate:
    """Integrate lam and its E3 image to T; report endpoint gap and interior separation."""
    g, traj = exp_map(spec, structure, lam, T, tol)
    lam3 = act_phase_preimage(spec, SymmetryElement.E3, lam, T, traj)
    g3, traj3 = exp_map(spec, structure, lam3, T, tol)
    ts = np.linspace(0.0, T, n_grid)
    sep = np.max(np.abs(traj(ts)[2:5] - traj3(ts)[2:5]))
    return MaxwellCertificate(lam, lam3, float(T), group_distance(g, g3), float(sep), g.z)


def maxwell_membership(
    spec: GroupSpec,
    structure: Structure,
    lam: PhasePoint,
    T: float,
    certify: bool = True,
    eps_line: float = EPS_LINE,
    tol: Tolerances = DEFAULT_TOL,
    pr: Optional[PeriodResult] = None,
) -> MembershipResult:
    """Whether (lam, T) is a Maxwell point: tau < inf, lam off the lines and T in N tau."""
    if not T > 0:
        raise ValueError("T must be positive")
    pr = period(spec, lam, tol) if pr is None else pr
    if not pr.finite:
        return MembershipResult(False, None, f"tau is infinite ({pr.classification.value})")
    if on_half_pi_line(lam, eps_line):
        return MembershipResult(False, None, "lambda lies on a line phi = +-pi/2")
    n = round(T / pr.value)
    if n < 1 or abs(T - n * pr.value) > time_tolerance(pr.value):
        return MembershipResult(False, None, "T is not a multiple of tau")
    cert = maxwell_certificate(spec, structure, lam, T, tol=tol) if certify else None
    return MembershipResult(True, n, "T = n tau", cert)


def first_maxwell_time(
    spec: GroupSpec,
    lam: PhasePoint,
    window: Optional[tuple[float, float]] = None,
    eps_line: float = EPS_LINE,
    tol: Tolerances = DEFAULT_TOL,
    pr: Optional[PeriodResult] = None,
) -> MaxwellResult:
    """t1_max = tau off the lines (when finite), +inf otherwise; Maxwell times n tau inside `window`."""
    pr = period(spec, lam, tol) if pr is None else pr
    line = on_half_pi_line(lam, eps_line)
    if line or not pr.finite:
        return MaxwellResult(math.inf, line, pr)
    times: tuple[float, ...] = ()
    if window is not None:
        lo, hi = window
        n_lo = max(1, math.ceil(lo / pr.value))
        n_hi = math.floor(hi / pr.value)
        times = tuple(n * pr.value for n in range(n_lo, n_hi + 1))
    return MaxwellResult(pr.value, line, pr, times)


def cut_time_upper_bound(spec: GroupSpec, lam: PhasePoint, tol: Tolerances = DEFAULT_TOL) -> float:
    """tau(lam): an upper bound for the cut time everywhere on the cylinder."""
    return period(spec, lam, tol).value


@dataclass(frozen=True)
class InvarianceReport:
    max_deviation: float
    consistent: bool
    reference: float
    values: tuple[tuple[str, float], ...] = field(default_factory=tuple)


def first_maxwell_invariance_check(
    spec: GroupSpec,
    lam: PhasePoint,
    samples: int = 10,
    s_max: Optional[float] = None,
    tol: Tolerances = DEFAULT_TOL,
) -> InvarianceReport:
    """Compare t1_max at lam, along its pendulum orbit and at its Klein images.

    Flow times are evenly spaced on (0, s_max], s_max defaulting to one period
    (or 5 when the period is infinite). The deviation is taken over finite
    values; `consistent` is False if finite and infinite verdicts are mixed.
    """
    ref = first_maxwell_time(spec, lam, tol=tol)
    if s_max is None:
        s_max = ref.period.value if ref.period.finite else 5.0
    pts: list[tuple[str, PhasePoint]] = []
    if samples > 0:
        ss = np.linspace(0.0, s_max, samples + 1)[1:]
        traj = solve_vertical(spec, lam, float(ss[-1]), FLOW_TOL)
        ys = traj(ss)
        pts += [(f"flow:{s:.6g}", PhasePoint(ys[0, i], ys[1, i])) for i, s in enumerate(ss)]
    pts += [(e.value, PhasePoint(*act_phase_point(e, lam.phi, lam.r))) for e in REFLECTIONS]
    values = [("ref", ref.t1_max)]
    for label, p in pts:
        values.append((label, first_maxwell_time(spec, p, tol=tol).t1_max))
    finite = [v for _, v in values if math.isfinite(v)]
    consistent = len(finite) in (0, len(values))
    dev = max(finite) - min(finite) if finite else 0.0
    return InvarianceReport(float(dev), consistent, ref.t1_max, tuple(values))
