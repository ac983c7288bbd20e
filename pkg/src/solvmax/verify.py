"""Seeded property report aggregating the invariants of every module.

All sampling is driven by one numpy Generator seeded from the user's seed, and
properties run in a fixed order, so a report is reproducible byte for byte.
Thresholds of integration-based properties are stated at the default
tolerance (1e-10) and scale linearly with the configured tolerance.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .config import Config
from .geodesic import exp_map, first_period_from_zeros, w_positivity_witness, z_zeros
from .group import (
    GroupElement,
    GroupSpec,
    Structure,
    group_distance,
    lambda_op,
    rho,
)
from .maxwell import first_maxwell_invariance_check, maxwell_certificate
from .ode import Tolerances
from .oracles import expm_scaling_squaring, lambda_quadrature
from .pendulum import PeriodResult, PhasePoint, closure_residual, crossing_times, period, separatrices
from .symmetry import KLEIN, REFLECTIONS, act_endpoint, act_trajectory, compose, is_fixed_point, ode_residual, verify_equivariance

DEFAULT_REL = 1e-10


@dataclass
class PropertyResult:
    name: str
    passed: bool
    max_residual: float
    threshold: float
    n: int
    extra: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        d = {
            "name": self.name,
            "passed": self.passed,
            "max_residual": self.max_residual,
            "threshold": self.threshold,
            "n": self.n,
        }
        d.update(self.extra)
        return d


def _check(name: str, residuals: list[float], threshold: float, **extra) -> PropertyResult:
    worst = max(residuals, default=0.0)
    return PropertyResult(name, bool(worst <= threshold), float(worst), float(threshold), len(residuals), extra)


def random_phase_point(rng: np.random.Generator, r_max: float) -> PhasePoint:
    return PhasePoint(rng.uniform(-math.pi, math.pi), rng.uniform(-r_max, r_max))


def sample_periodic(
    spec: GroupSpec,
    rng: np.random.Generator,
    n: int,
    r_max: float = 6.0,
    min_cos: float = 0.0,
    tau_max: float = 40.0,
    tol: Optional[Tolerances] = None,
    max_tries: int = 100_000,
) -> list[tuple[PhasePoint, PeriodResult]]:
    """n random phase points with finite period at most tau_max.

    tau_max keeps the points away from the separatrices, where the period
    diverges logarithmically and every time-based tolerance degrades.
    """
    out = []
    kwargs = {} if tol is None else {"tol": tol}
    for _ in range(max_tries):
        if len(out) >= n:
            break
        lam = random_phase_point(rng, r_max)
        if abs(math.cos(lam.phi)) <= min_cos:
            continue
        pr = period(spec, lam, **kwargs)
        if pr.finite and pr.value <= tau_max and pr.t1 is not None:
            out.append((lam, pr))
    return out


def sample_group_elements(rng: np.random.Generator, n: int, z_max: float = 3.0, w_max: float = 3.0) -> list[GroupElement]:
    return [GroupElement(rng.uniform(-z_max, z_max), rng.uniform(-w_max, w_max, 2)) for _ in range(n)]


def _rel(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.max(np.abs(a - b)) / max(1.0, float(np.max(np.abs(b)))))


# ------------------------------------------------------------------ properties


def prop_rho_oracle(spec, rng, n) -> PropertyResult:
    zs = rng.uniform(-10.0, 10.0, n)
    res = [_rel(rho(spec, z), expm_scaling_squaring(z * spec.theta)) for z in zs]
    return _check("rho_vs_series_oracle", res, 1e-12)


def prop_rho_homomorphism(spec, rng, n) -> PropertyResult:
    res = []
    for z1, z2 in rng.uniform(-5.0, 5.0, (n, 2)):
        r1, r2, r12 = rho(spec, z1), rho(spec, z2), rho(spec, z1 + z2)
        # rounding scale of a matrix product is max |r1| |r2| entrywise
        scale = max(1.0, float(np.max(np.abs(r12))), float(np.max(np.abs(r1) @ np.abs(r2))))
        res.append(float(np.max(np.abs(r1 @ r2 - r12))) / scale)
    return _check("rho_homomorphism", res, 1e-12)


def prop_lambda_cocycle(spec, structure, rng, n) -> PropertyResult:
    eta = structure.eta
    res = []
    for z1, z2 in rng.uniform(-5.0, 5.0, (n, 2)):
        lhs = lambda_op(spec, z1 + z2, eta)
        a, b = lambda_op(spec, z1, eta), rho(spec, z1) @ lambda_op(spec, z2, eta)
        # relative to the largest term: the sum cannot be more accurate than that
        scale = max(1.0, float(np.max(np.abs(a))), float(np.max(np.abs(b))), float(np.max(np.abs(lhs))))
        res.append(float(np.max(np.abs(a + b - lhs))) / scale)
    return _check("lambda_cocycle", res, 1e-12)


def prop_lambda_quadrature(spec, structure, rng, n) -> PropertyResult:
    res = []
    for z in rng.uniform(-3.0, 3.0, n):
        res.append(_rel(lambda_op(spec, z, structure.eta), lambda_quadrature(spec.theta, z, structure.eta)))
    return _check("lambda_vs_quadrature", res, 1e-10)


def prop_klein_table(spec, rng, n) -> PropertyResult:
    res = []
    for g in sample_group_elements(rng, n):
        for a in KLEIN:
            for b in KLEIN:
                lhs = act_endpoint(spec, a, act_endpoint(spec, b, g))
                rhs = act_endpoint(spec, compose(a, b), g)
                res.append(group_distance(rhs, lhs))
    return _check("klein_table_on_endpoints", res, 1e-12)


def prop_fixed_points(spec, rng, n) -> PropertyResult:
    """act(e, g) == g must agree with the closed-form predicate, on random and on constructed fixed points."""
    candidates = sample_group_elements(rng, n)
    for g in sample_group_elements(rng, n):
        candidates += [GroupElement(g.z, (0.0, 0.0)), GroupElement(0.0, g.w), GroupElement(0.0, (0.0, 0.0))]
    mismatches = 0
    for g in candidates:
        for e in REFLECTIONS:
            numeric = group_distance(act_endpoint(spec, e, g), g) <= 1e-12
            mismatches += numeric != is_fixed_point(e, g, tol=1e-12)
    return PropertyResult("fixed_point_characterization", mismatches == 0, float(mismatches), 0.0, len(candidates) * 3)


def prop_transformed_solutions(spec, structure, rng, n, tol, scale) -> PropertyResult:
    res = []
    for _ in range(n):
        lam = random_phase_point(rng, 3.0)
        T = rng.uniform(1.0, 6.0)
        _, traj = exp_map(spec, structure, lam, T, tol)
        for e in REFLECTIONS:
            res.append(ode_residual(spec, structure, act_trajectory(spec, e, traj), T, n=100, h=2e-3))
    return _check("transformed_solutions_solve_ode", res, 1e-8 * scale)


def prop_equivariance(spec, structure, rng, n, tol, scale) -> PropertyResult:
    res = []
    for _ in range(n):
        lam = random_phase_point(rng, 3.0)
        pr = period(spec, lam)
        t_hi = min(3.0 * pr.value, 10.0) if pr.finite else 10.0
        T = rng.uniform(0.0, t_hi)
        for e in REFLECTIONS:
            res.append(verify_equivariance(spec, structure, e, lam, T, tol))
    return _check("equivariance_exp", res, 1e-7 * scale)


def prop_period_closure(spec, pts, tol, scale) -> PropertyResult:
    return _check("period_closure", [closure_residual(spec, lam, pr.value, tol) for lam, pr in pts], 1e-8 * scale)


def prop_crossing_lattice(spec, pts, tol, scale) -> PropertyResult:
    res = []
    for lam, pr in pts:
        got = [t for t, _ in crossing_times(spec, lam, 2.0 * pr.value - 1e-6, tol)]
        want = [pr.t1 + k * pr.value / 2.0 for k in range(4)]
        res.append(math.inf if len(got) != 4 else max(abs(a - b) for a, b in zip(got, want)))
    return _check("crossing_lattice", res, 1e-7 * scale)


def prop_z_zeros(spec, pts, tol, scale) -> PropertyResult:
    res = []
    for lam, pr in pts:
        rep = z_zeros(spec, lam, 2.0 * pr.value + 1e-6, tol, pr=pr)
        res.append(rep.max_mismatch())
    return _check("z_zeros_structure", res, 1e-7 * scale)


def prop_period_from_zeros(spec, pts, tol, scale) -> PropertyResult:
    res = [abs(first_period_from_zeros(spec, lam, tol) - pr.value) for lam, pr in pts if abs(math.cos(lam.phi)) > 0.1]
    return _check("period_from_z_zeros", res, 1e-8 * scale)


def prop_maxwell(spec, structure, pts, tol, scale) -> PropertyResult:
    gaps, seps = [], []
    for lam, pr in pts:
        if abs(math.cos(lam.phi)) <= 1e-3:
            continue
        cert = maxwell_certificate(spec, structure, lam, pr.value, n_grid=501, tol=tol)
        gaps.append(cert.endpoint_gap)
        seps.append(cert.max_separation)
    out = _check("maxwell_certificates", gaps, 1e-7 * scale, min_separation=min(seps, default=math.inf))
    out.passed = out.passed and all(s > 1e-3 for s in seps)
    return out


def prop_witness(spec, structure, rng, n, tol, scale) -> PropertyResult:
    decs, norms = [], []
    for _ in range(n):
        lam = random_phase_point(rng, 3.0)
        wr = w_positivity_witness(spec, structure, lam, 20.0, tol=tol)
        if wr.trivial:
            continue
        decs.append(wr.max_decrease)
        norms.append(wr.min_norm)
    out = _check("w_monotone_witness", decs, 1e-10 * scale, min_norm_w=min(norms, default=math.inf))
    out.passed = out.passed and all(x > 0 for x in norms)
    return out


def prop_maxwell_invariance(spec, rng, n, tol, scale) -> PropertyResult:
    devs, consistent = [], True
    for _ in range(n):
        rep = first_maxwell_invariance_check(spec, random_phase_point(rng, 3.0), samples=10, tol=tol)
        devs.append(rep.max_deviation)
        consistent = consistent and rep.consistent
    out = _check("first_maxwell_time_invariance", devs, 1e-7 * scale, consistent_infinite_classification=consistent)
    out.passed = out.passed and consistent
    return out


def prop_separatrices(spec) -> PropertyResult:
    seps = separatrices(spec)
    arrivals = [c.arrival_distance for c in seps.curves.values()]
    strips = all(c.strip_ok for c in seps.curves.values())
    out = _check("separatrix_certificates", arrivals, 1e-6, strips_ok=strips, section_mismatch=seps.max_section_mismatch())
    out.passed = out.passed and strips
    return out


def run_verify(cfg: Config, seed: int = 0, samples: int = 100) -> dict:
    """Run every property and return the JSON-ready report."""
    spec = cfg.group()
    structure = cfg.structure(spec)
    tol = cfg.tolerances.integrator()
    fine = tol.scaled(1e-2)
    scale = max(1.0, cfg.tolerances.rel / DEFAULT_REL, cfg.tolerances.abs / DEFAULT_REL)
    rng = np.random.default_rng(seed)
    small = max(1, min(samples, 20))

    checks: list[Callable[[], PropertyResult]] = [
        lambda: prop_rho_oracle(spec, rng, 10 * samples),
        lambda: prop_rho_homomorphism(spec, rng, 10 * samples),
        lambda: prop_lambda_cocycle(spec, structure, rng, 10 * samples),
        lambda: prop_lambda_quadrature(spec, structure, rng, small),
        lambda: prop_klein_table(spec, rng, samples),
        lambda: prop_fixed_points(spec, rng, samples),
        lambda: prop_separatrices(spec),
        lambda: prop_transformed_solutions(spec, structure, rng, max(1, min(samples, 10)), fine, scale),
        lambda: prop_equivariance(spec, structure, rng, samples, fine, scale),
    ]
    results = [c() for c in checks]
    # near the lines phi = +-pi/2 the z zeros pair into ill-conditioned double roots
    pts = sample_periodic(spec, rng, small, min_cos=1e-4, tol=tol)
    results += [
        prop_period_closure(spec, pts, tol, scale),
        prop_crossing_lattice(spec, pts, tol, scale),
        prop_z_zeros(spec, pts, tol, scale),
        prop_period_from_zeros(spec, pts, tol, scale),
        prop_maxwell(spec, structure, pts, tol, scale),
        prop_witness(spec, structure, rng, small, tol, scale),
        prop_maxwell_invariance(spec, rng, small, tol, scale),
    ]
    return {
        "config": cfg.to_dict(),
        "seed": seed,
        "samples": samples,
        "regime": spec.regime.value,
        "threshold_scale": scale,
        "passed": all(r.passed for r in results),
        "properties": [r.as_dict() for r in results],
    }
