"""The Klein four-group {Id, E1, E2, E3} of reflections of the geodesic problem.

Each element acts on phase points, on pendulum solutions, on geodesics and on
their endpoints, and the exponential map intertwines the preimage action with
the endpoint action.
"""
from __future__ import annotations

import enum
import math
from typing import Optional, Union

import numpy as np

from .geodesic import GeodesicTrajectory, exp_map, geodesic_field
from .group import GroupElement, GroupSpec, Structure, group_distance, rho
from .ode import DEFAULT_TOL, Tolerances
from .pendulum import PhasePoint, VerticalTrajectory, solve_vertical, wrap_angle


class SymmetryElement(str, enum.Enum):
    ID = "Id"
    E1 = "E1"
    E2 = "E2"
    E3 = "E3"

    def __mul__(self, other: "SymmetryElement") -> "SymmetryElement":
        return compose(self, other)

    @property
    def reverses_time(self) -> bool:
        return self in (SymmetryElement.E2, SymmetryElement.E3)


KLEIN = tuple(SymmetryElement)
REFLECTIONS = (SymmetryElement.E1, SymmetryElement.E2, SymmetryElement.E3)


def compose(a: SymmetryElement, b: SymmetryElement) -> SymmetryElement:
    """Product in the Klein four-group: every element is an involution, product of two reflections is the third."""
    if a is SymmetryElement.ID:
        return b
    if b is SymmetryElement.ID:
        return a
    if a is b:
        return SymmetryElement.ID
    (third,) = set(REFLECTIONS) - {a, b}
    return third


def act_endpoint(spec: GroupSpec, e: SymmetryElement, g: GroupElement) -> GroupElement:
    if e is SymmetryElement.ID:
        return g
    if e is SymmetryElement.E1:
        return GroupElement(g.z, -g.w)
    back = rho(spec, -g.z) @ g.w
    if e is SymmetryElement.E2:
        return GroupElement(-g.z, -back)
    return GroupElement(-g.z, back)


def is_fixed_point(e: SymmetryElement, g: GroupElement, tol: float = 0.0) -> bool:
    """Closed-form fixed-point sets: E1 <-> w = 0, E2 <-> g = identity, E3 <-> z = 0."""
    if e is SymmetryElement.ID:
        return True
    w_zero = float(np.max(np.abs(g.w))) <= tol
    z_zero = abs(g.z) <= tol
    if e is SymmetryElement.E1:
        return w_zero
    if e is SymmetryElement.E2:
        return w_zero and z_zero
    return z_zero


def act_phase_point(e: SymmetryElement, phi: float, r: float, reversed_time: bool = False) -> tuple[float, float]:
    """Pointwise map on the cylinder; E2 and E3 also reverse time along orbits."""
    if e is SymmetryElement.ID:
        return phi, r
    if e is SymmetryElement.E1:
        return -phi, -r
    if e is SymmetryElement.E2:
        return phi + math.pi, -r
    return math.pi - phi, r


def _vertical_end(trajectory, T: float) -> tuple[float, float]:
    y = trajectory(T)
    return float(y[0]), float(y[1])


def act_phase_preimage(
    spec: GroupSpec,
    e: SymmetryElement,
    lam: PhasePoint,
    T: float,
    trajectory: Optional[Union[GeodesicTrajectory, VerticalTrajectory]] = None,
    tol: Tolerances = DEFAULT_TOL,
) -> PhasePoint:
    """lambda_e: initial point of the transformed pendulum solution on [0, T].

    E2 and E3 need (phi(T), r(T)); pass an already computed trajectory to reuse
    its endpoint instead of integrating again.
    """
    if e is SymmetryElement.ID:
        return lam
    if e is SymmetryElement.E1:
        return PhasePoint(-lam.phi, -lam.r)
    if T == 0:
        phiT, rT = lam.phi, lam.r
    elif trajectory is not None:
        phiT, rT = _vertical_end(trajectory, T)
    else:
        phiT, rT = _vertical_end(solve_vertical(spec, lam, T, tol), T)
    return PhasePoint(*act_phase_point(e, phiT, rT))


class TransformedTrajectory:
    """Image of a dense trajectory under a Klein element, on the same interval [0, T].

    Evaluates to (phi, r) for a vertical source and (phi, r, z, w1, w2) for a
    geodesic source.
    """

    def __init__(self, spec: GroupSpec, e: SymmetryElement, source, T: float):
        self.spec = spec
        self.e = e
        self.source = source
        self.T = float(T)
        end = np.asarray(source(self.T), dtype=float)
        self._end = end
        self._back = rho(spec, -end[2]) if end.size >= 5 else None

    def __call__(self, t):
        t_arr = np.asarray(t, dtype=float)
        scalar = t_arr.ndim == 0
        ts = np.atleast_1d(t_arr)
        e = self.e
        src = np.asarray(self.source(self.T - ts if e.reverses_time else ts), dtype=float)
        if src.ndim == 1:
            src = src[:, None]
        out = np.empty_like(src)
        phi, r = src[0], src[1]
        if e is SymmetryElement.ID:
            out[:] = src
        elif e is SymmetryElement.E1:
            out[0], out[1] = -phi, -r
        elif e is SymmetryElement.E2:
            out[0], out[1] = phi + math.pi, -r
        else:
            out[0], out[1] = math.pi - phi, r
        if src.shape[0] >= 5:
            z, w = src[2], src[3:5]
            if e is SymmetryElement.ID:
                pass
            elif e is SymmetryElement.E1:
                out[2], out[3:5] = z, -w
            else:
                zT, wT = self._end[2], self._end[3:5, None]
                out[2] = z - zT
                diff = w - wT if e is SymmetryElement.E2 else wT - w
                out[3:5] = self._back @ diff
        return out[:, 0] if scalar else out


def act_trajectory(spec: GroupSpec, e: SymmetryElement, trajectory, T: Optional[float] = None) -> TransformedTrajectory:
    if T is None:
        T = trajectory.T if hasattr(trajectory, "T") else trajectory.t_end
    return TransformedTrajectory(spec, e, trajectory, T)


def ode_residual(
    spec: GroupSpec,
    structure: Optional[Structure],
    curve,
    T: float,
    n: int = 200,
    h: float = 1e-3,
) -> float:
    """max |curve'(t) - f(curve(t))| on interior samples, with a 6th-order central difference."""
    dim = np.asarray(curve(0.0)).size
    f = geodesic_field(spec, structure.eta if (structure is not None and dim >= 5) else None)
    margin = 3 * h
    if T <= 2 * margin:
        return 0.0
    ts = np.linspace(margin, T - margin, n)
    c = [curve(ts + k * h) for k in (-3, -2, -1, 1, 2, 3)]
    deriv = (-c[0] + 9 * c[1] - 45 * c[2] + 45 * c[3] - 9 * c[4] + c[5]) / (60 * h)
    ys = curve(ts)
    worst = 0.0
    for i in range(ts.size):
        y = ys[:, i]
        full = y if y.size != 2 else np.append(y, 0.0)
        rhs = np.asarray(f(ts[i], full))[: y.size]
        worst = max(worst, float(np.max(np.abs(deriv[:, i] - rhs))))
    return worst


def verify_equivariance(
    spec: GroupSpec,
    structure: Structure,
    e: SymmetryElement,
    lam: PhasePoint,
    T: float,
    tol: Tolerances = DEFAULT_TOL,
) -> float:
    """Distance between Exp(lambda_e, T) and e(Exp(lambda, T)); both sides integrated independently."""
    if e is SymmetryElement.ID:
        return 0.0
    g, traj = exp_map(spec, structure, lam, T, tol)
    lam_e = act_phase_preimage(spec, e, lam, T, traj)
    g_e, _ = exp_map(spec, structure, lam_e, T, tol)
    return group_distance(act_endpoint(spec, e, g), g_e)


def angles_equal(a: float, b: float, tol: float) -> bool:
    return abs(wrap_angle(a - b)) <= tol
