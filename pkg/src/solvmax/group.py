"""The group G(theta) = R x_rho R^2 and left-invariant structures on it.

Everything here is closed form: the one-parameter group rho_z = exp(z theta)
is evaluated by eigenstructure case, and Lambda_z = int_0^z rho_t dt through
theta^{-1}(rho_z - I).
"""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DegenerateFrame, NotBracketGenerating, NotRegular

EPS_REG = 1e-12
JORDAN_REL = 1e-10
EPS_BG = 1e-12
COMMUTE_TOL = 1e-12


class Regime(str, enum.Enum):
    DET_NEG = "DetNeg"
    DET_POS_FOCUS = "DetPosFocus"
    DET_POS_NODE = "DetPosNode"
    DET_POS_BOUNDARY = "DetPosBoundary"


class RhoOverflowWarning(RuntimeWarning):
    """exp(z theta) overflowed; the affected entries are +-inf."""


@dataclass(frozen=True, eq=False)
class GroupSpec:
    theta: np.ndarray
    det_theta: float
    tr_theta: float
    discriminant: float
    regime: Regime

    @property
    def key(self) -> tuple[float, float, float, float]:
        """Hashable identity used for caching per-group computations."""
        return tuple(float(x) for x in self.theta.ravel())

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.theta))

    def is_boundary(self) -> bool:
        return self.regime is Regime.DET_POS_BOUNDARY

    def __repr__(self) -> str:
        return f"GroupSpec(theta={self.theta.tolist()}, regime={self.regime.value})"


def make_group_spec(theta: Sequence[Sequence[float]] | np.ndarray) -> GroupSpec:
    """Validate a 2x2 matrix and classify the regular group it defines.

    Raises NotRegular when |det * tr| <= 1e-12 * ||theta||^3.
    """
    th = np.array(theta, dtype=float)
    if th.shape != (2, 2):
        raise ValueError(f"theta must be 2x2, got shape {th.shape}")
    if not np.all(np.isfinite(th)):
        raise ValueError("theta must be finite")
    a, b, c, d = th.ravel()
    det = a * d - b * c
    tr = a + d
    disc = tr * tr - 4.0 * det
    scale = float(np.linalg.norm(th))
    if scale == 0.0 or abs(det * tr) <= EPS_REG * scale**3:
        raise NotRegular(f"det(theta)*tr(theta) = {det * tr!r} is zero within tolerance")
    if det < 0:
        regime = Regime.DET_NEG
    elif abs(disc) < JORDAN_REL * scale**2:
        regime = Regime.DET_POS_BOUNDARY
    elif disc < 0:
        regime = Regime.DET_POS_FOCUS
    else:
        regime = Regime.DET_POS_NODE
    th.setflags(write=False)
    return GroupSpec(th, float(det), float(tr), float(disc), regime)


def _cs_series(x: float) -> tuple[float, float]:
    # C(x) = sum x^k/(2k)!, S(x) = sum x^k/(2k+1)!
    c_term, s_term = 1.0, 1.0
    c_sum, s_sum = 1.0, 1.0
    for k in range(1, 20):
        c_term *= x / ((2 * k - 1) * (2 * k))
        s_term *= x / ((2 * k) * (2 * k + 1))
        c_sum += c_term
        s_sum += s_term
        if abs(c_term) < 1e-18 * abs(c_sum) and abs(s_term) < 1e-18 * abs(s_sum):
            break
    return c_sum, s_sum


def _cs(x: float, jordan: bool) -> tuple[float, float]:
    """Return (C, S) with exp(zA) = C I + z S A when A^2 = (x/z^2) I."""
    if jordan and abs(x) < 1.0:
        return _cs_series(x)
    if x > 0.0:
        s = math.sqrt(x)
        return math.cosh(s), math.sinh(s) / s
    if x < 0.0:
        s = math.sqrt(-x)
        return math.cos(s), math.sin(s) / s
    return 1.0, 1.0


def rho_factory(spec: GroupSpec) -> Callable[[float], tuple[float, float, float, float]]:
    """Scalar kernel z -> entries (a, b, c, d) of exp(z theta), row-major.

    Used in the inner loop of the geodesic vector field, so it avoids numpy.
    """
    a0, b0, c0, d0 = (float(x) for x in spec.theta.ravel())
    m = 0.5 * spec.tr_theta
    q0 = 0.25 * spec.discriminant
    jordan = abs(spec.discriminant) < JORDAN_REL * spec.norm**2
    ax, dx = a0 - m, d0 - m

    q = math.sqrt(q0) if q0 > 0 else 0.0
    # coefficients of exp(z mu_1) and exp(z mu_2), mu_{1,2} = m +- q, per entry
    if q > 0:
        plus = (0.5 * (1 + ax / q), 0.5 * b0 / q, 0.5 * c0 / q, 0.5 * (1 + dx / q))
        minus = (0.5 * (1 - ax / q), -0.5 * b0 / q, -0.5 * c0 / q, 0.5 * (1 - dx / q))

    def _exp(x: float) -> float:
        try:
            return math.exp(x)
        except OverflowError:
            return math.inf

    def entries(z: float) -> tuple[float, float, float, float]:
        if q > 0 and abs(z) * q >= 1.0 and not (jordan and z * z * q0 < 1.0):
            # Real eigenvalues, large |z| q: summing the two exponentials directly
            # avoids the cosh - sinh cancellation in entries that decay.
            e1, e2 = _exp(z * (m + q)), _exp(z * (m - q))
            return tuple((e1 * cp if cp else 0.0) + (e2 * cm if cm else 0.0) for cp, cm in zip(plus, minus))
        cz, sz = _cs(z * z * q0, jordan)
        zs = z * sz
        try:
            e = math.exp(z * m)
        except OverflowError:
            e = math.inf
        return (
            e * (cz + zs * ax),
            e * (zs * b0),
            e * (zs * c0),
            e * (cz + zs * dx),
        )

    return entries


def rho(spec: GroupSpec, z: float) -> np.ndarray:
    """exp(z theta) in closed form."""
    with np.errstate(invalid="ignore"):
        out = np.array(rho_factory(spec)(float(z)), dtype=float).reshape(2, 2)
    if not np.all(np.isfinite(out)):
        warnings.warn(f"rho overflow at z={z!r}", RhoOverflowWarning, stacklevel=2)
        out = np.where(np.isnan(out), 0.0, out)
    return out


def _theta_inv(spec: GroupSpec) -> np.ndarray:
    a, b, c, d = spec.theta.ravel()
    return np.array([[d, -b], [-c, a]]) / spec.det_theta


def lambda_op(spec: GroupSpec, z: float, eta: Sequence[float] | np.ndarray) -> np.ndarray:
    """Lambda_z eta = int_0^z exp(t theta) eta dt, via theta^{-1}(exp(z theta) - I) eta."""
    eta = np.asarray(eta, dtype=float)
    z = float(z)
    if abs(z) * spec.norm < 1e-3:
        # small |z|: the closed form cancels, sum the series z sum (z theta)^k/(k+1)!
        term = z * eta
        acc = term.copy()
        for k in range(1, 12):
            term = z * (spec.theta @ term) / (k + 1)
            acc = acc + term
        return acc
    return _theta_inv(spec) @ ((rho(spec, z) - np.eye(2)) @ eta)


@dataclass(frozen=True, eq=False)
class GroupElement:
    z: float
    w: np.ndarray = field(default_factory=lambda: np.zeros(2))

    def __post_init__(self) -> None:
        object.__setattr__(self, "z", float(self.z))
        w = np.array(self.w, dtype=float).reshape(2)
        w.setflags(write=False)
        object.__setattr__(self, "w", w)

    def as_array(self) -> np.ndarray:
        return np.array([self.z, self.w[0], self.w[1]])

    def __repr__(self) -> str:
        return f"GroupElement(z={self.z!r}, w=({self.w[0]!r}, {self.w[1]!r}))"


IDENTITY = GroupElement(0.0, (0.0, 0.0))


def multiply(spec: GroupSpec, g1: GroupElement, g2: GroupElement) -> GroupElement:
    return GroupElement(g1.z + g2.z, g1.w + rho(spec, g1.z) @ g2.w)


def inverse(spec: GroupSpec, g: GroupElement) -> GroupElement:
    return GroupElement(-g.z, -(rho(spec, -g.z) @ g.w))


def group_distance(g1: GroupElement, g2: GroupElement) -> float:
    """Max-norm difference in (z, w) coordinates, relative to max(1, |g1|)."""
    a, b = g1.as_array(), g2.as_array()
    return float(np.max(np.abs(a - b)) / max(1.0, float(np.max(np.abs(a)))))


def omega(u: Sequence[float], v: Sequence[float]) -> float:
    """The area form det(u | v)."""
    return float(u[0] * v[1] - u[1] * v[0])


@dataclass(frozen=True, eq=False)
class Structure:
    eta: np.ndarray
    omega_value: float

    def __repr__(self) -> str:
        return f"Structure(eta={self.eta.tolist()}, omega_value={self.omega_value!r})"


def make_structure(spec: GroupSpec, eta: Sequence[float] | np.ndarray) -> Structure:
    eta = np.array(eta, dtype=float).reshape(2)
    if not np.all(np.isfinite(eta)) or not np.any(eta):
        raise ValueError("eta must be a finite nonzero 2-vector")
    w = omega(spec.theta @ eta, eta)
    if abs(w) < EPS_BG * spec.norm * float(eta @ eta):
        raise NotBracketGenerating(f"omega(theta eta, eta) = {w!r} vanishes for eta={eta.tolist()}")
    eta.setflags(write=False)
    return Structure(eta, w)


@dataclass(frozen=True, eq=False)
class Canonicalization:
    """Automorphism psi(z, w) = (z, P w - Lambda_z P xi' / sigma) carrying a structure to Delta_eta."""

    spec: GroupSpec
    P: np.ndarray
    sigma: float
    xi_prime: np.ndarray
    commutator_norm: float

    def psi(self, g: GroupElement) -> GroupElement:
        shift = lambda_op(self.spec, g.z, self.P @ self.xi_prime) / self.sigma
        return GroupElement(g.z, self.P @ g.w - shift)

    def differential(self) -> np.ndarray:
        """(d psi) at the identity in the basis {(1,0), (0,e1), (0,e2)}."""
        out = np.zeros((3, 3))
        out[0, 0] = 1.0
        out[1:, 0] = -(self.P @ self.xi_prime) / self.sigma
        out[1:, 1:] = self.P
        return out


def canonicalize_structure(
    spec: GroupSpec,
    xi: Sequence[float],
    sigma_xi_prime: tuple[float, Sequence[float]],
    eta: Sequence[float] | None = None,
) -> Canonicalization:
    """Build the automorphism carrying the structure spanned by (0, xi), (sigma, xi') to Delta_eta.

    P is fixed by P xi = eta and P theta xi = theta eta; it then commutes with
    theta by Cayley-Hamilton. `eta` defaults to `xi` (pure normalization of
    the horizontal complement).
    """
    xi = np.asarray(xi, dtype=float)
    eta = xi if eta is None else np.asarray(eta, dtype=float)
    sigma, xi_prime = sigma_xi_prime
    sigma = float(sigma)
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    th = spec.theta
    src = np.column_stack([xi, th @ xi])
    dst = np.column_stack([eta, th @ eta])
    scale = spec.norm * float(xi @ xi)
    if abs(np.linalg.det(src)) < EPS_BG * scale:
        raise DegenerateFrame(f"{{xi, theta xi}} is not a basis for xi={xi.tolist()}")
    if abs(np.linalg.det(dst)) < EPS_BG * spec.norm * float(eta @ eta):
        raise DegenerateFrame(f"{{eta, theta eta}} is not a basis for eta={eta.tolist()}")
    P = dst @ np.linalg.inv(src)
    comm = float(np.max(np.abs(P @ th - th @ P)))
    ref = max(1.0, float(np.max(np.abs(P))) * spec.norm)
    if comm > COMMUTE_TOL * ref:
        raise DegenerateFrame(f"P theta != theta P (residual {comm:.3g}); frame ill-conditioned")
    P.setflags(write=False)
    xp = np.array(xi_prime, dtype=float).reshape(2)
    return Canonicalization(spec, P, sigma, xp, comm)
