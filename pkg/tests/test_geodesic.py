import math

import numpy as np
import pytest

from conftest import ETA, REGIMES
from solvmax.errors import EquilibriumInput, PreconditionOnLine
from solvmax.geodesic import (
    GeodesicTrajectory,
    cotangent_residual,
    exp_map,
    first_period_from_zeros,
    on_reflection_line,
    predicted_z_zeros,
    reconstruct_covector,
    w_positivity_witness,
    z_zeros,
)
from solvmax.group import group_distance, make_group_spec, make_structure, multiply
from solvmax.ode import Tolerances
from solvmax.pendulum import PeriodResult, PeriodClass, PhasePoint, period

FINE = Tolerances(1e-12, 1e-12)


def setup(name="det_neg"):
    spec = make_group_spec(REGIMES[name])
    return spec, make_structure(spec, ETA)


def test_straight_line_along_z():
    spec, st = setup()
    g, traj = exp_map(spec, st, PhasePoint(0.0, 0.0), 2.0)
    assert g.z == pytest.approx(2.0, abs=1e-12)
    assert np.allclose(g.w, [0.0, 0.0], atol=1e-12)
    assert traj.arc_length == 2.0


def test_straight_line_along_w():
    spec, st = setup()
    g, _ = exp_map(spec, st, PhasePoint(-math.pi / 2, 0.0), 2.0)
    assert g.z == pytest.approx(0.0, abs=1e-12)
    assert np.allclose(g.w, [-2.0, -2.0], atol=1e-12)


def test_horizontal_velocity_is_unit():
    # (z', <p, w'>) has z'^2 + (sin phi)^2 = 1 and <p, w'> = sin^2 phi
    spec, st = setup("focus")
    lam = PhasePoint(0.7, 1.3)
    _, traj = exp_map(spec, st, lam, 3.0, FINE)
    p = reconstruct_covector(spec, st, lam)
    ts = np.linspace(0.1, 2.9, 40)
    h = 1e-4
    dw = (traj(ts + h)[3:5] - traj(ts - h)[3:5]) / (2 * h)
    assert np.max(np.abs(p @ dw - np.sin(traj.phi(ts)) ** 2)) < 1e-8
    dz = (traj.z(ts + h) - traj.z(ts - h)) / (2 * h)
    assert np.max(np.abs(dz - np.cos(traj.phi(ts)))) < 1e-8


@pytest.mark.parametrize("name,lam", [("det_neg", (0.3, 2.0)), ("focus", (1.0, -0.5)), ("node", (-2.0, 1.0))])
def test_against_tighter_tolerance(name, lam):
    spec, st = setup(name)
    lam = PhasePoint(*lam)
    a, _ = exp_map(spec, st, lam, 5.0, FINE)
    b, _ = exp_map(spec, st, lam, 5.0, Tolerances(1e-13, 1e-13))
    assert group_distance(a, b) <= 1e-9


@pytest.mark.parametrize("name", ["det_neg", "focus"])
def test_endpoint_cocycle(name):
    spec, st = setup(name)
    lam, S, T = PhasePoint(0.4, 1.1), 1.3, 2.1
    g_total, traj = exp_map(spec, st, lam, S + T, FINE)
    g_S = traj.at(S)
    lam_S = PhasePoint(float(traj.phi(S)), float(traj.r(S)))
    g_rest, _ = exp_map(spec, st, lam_S, T, FINE)
    assert group_distance(g_total, multiply(spec, g_S, g_rest)) <= 1e-8


def test_zero_time_is_identity():
    traj = GeodesicTrajectory(None, np.array([0.2, 0.3, 0.0, 0.0, 0.0]), 0.0)
    assert traj.endpoint.z == 0.0 and np.array_equal(traj.endpoint.w, [0.0, 0.0])


class TestZeros:
    def test_predicted_set(self):
        pr = PeriodResult(3.0, 0.5, PeriodClass.PERIODIC)
        assert predicted_z_zeros(pr, 7.0) == (1.0, 3.0, 4.0, 6.0, 7.0)

    def test_predicted_merges_coincident(self):
        pr = PeriodResult(2.0, 1.0, PeriodClass.PERIODIC)
        assert predicted_z_zeros(pr, 6.0) == (2.0, 4.0, 6.0)

    @pytest.mark.parametrize("name,lam", [("det_neg", (0.0, 3.0)), ("det_neg", (-1.0, 0.5)), ("focus", (0.3, 6.0))])
    def test_structure(self, name, lam):
        spec, _ = setup(name)
        lam = PhasePoint(*lam)
        pr = period(spec, lam, FINE)
        rep = z_zeros(spec, lam, 3 * pr.value + 0.1, FINE, pr)
        assert rep.max_mismatch() <= 1e-7

    def test_equilibrium_rejected(self):
        spec, _ = setup()
        with pytest.raises(EquilibriumInput):
            z_zeros(spec, PhasePoint(0.0, 0.0), 3.0)

    def test_first_period(self):
        spec, _ = setup()
        lam = PhasePoint(0.0, 3.0)
        assert first_period_from_zeros(spec, lam, FINE) == pytest.approx(period(spec, lam, FINE).value, abs=1e-8)

    def test_first_period_on_line(self):
        spec, _ = setup()
        with pytest.raises(PreconditionOnLine):
            first_period_from_zeros(spec, PhasePoint(math.pi / 2, 0.3))

    def test_reflection_line(self):
        assert on_reflection_line(0.3, math.pi - 0.3)
        assert on_reflection_line(-0.3, -math.pi + 0.3)
        assert not on_reflection_line(0.3, 0.3)


class TestCovector:
    def test_exact_matches_sampled(self):
        spec, st = setup("focus")
        lam = PhasePoint(0.4, -0.8)
        _, traj = exp_map(spec, st, lam, 4.0, FINE)
        exact = reconstruct_covector(spec, st, lam)
        sampled = reconstruct_covector(spec, st, lam, "sampled", traj)
        assert np.allclose(exact, sampled, atol=1e-8)
        assert cotangent_residual(spec, st, traj, exact, np.linspace(0, 4, 200)) < 1e-8

    def test_unknown_method(self):
        spec, st = setup()
        with pytest.raises(ValueError):
            reconstruct_covector(spec, st, PhasePoint(0.0, 1.0), "guess")


class TestWitness:
    @pytest.mark.parametrize("name,lam", [("det_neg", (0.3, 1.0)), ("focus", (2.0, -1.0)), ("node", (0.1, 0.1))])
    def test_monotone_and_positive(self, name, lam):
        spec, st = setup(name)
        res = w_positivity_witness(spec, st, PhasePoint(*lam), 20.0, tol=FINE)
        assert res.min_norm > 0 and res.nondecreasing
        assert res.cotangent_residual < 1e-8

    def test_trivial_on_z_axis(self):
        spec, st = setup()
        res = w_positivity_witness(spec, st, PhasePoint(0.0, 0.0), 5.0)
        assert res.trivial
