import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import ETA, REGIMES
from solvmax.geodesic import exp_map
from solvmax.group import GroupElement, group_distance, make_group_spec, make_structure
from solvmax.ode import Tolerances
from solvmax.pendulum import PhasePoint, solve_vertical
from solvmax.symmetry import (
    KLEIN,
    REFLECTIONS,
    SymmetryElement as S,
    act_endpoint,
    act_phase_point,
    act_phase_preimage,
    act_trajectory,
    angles_equal,
    is_fixed_point,
    ode_residual,
    verify_equivariance,
)

FINE = Tolerances(1e-12, 1e-12)


def setup(name="det_neg"):
    spec = make_group_spec(REGIMES[name])
    return spec, make_structure(spec, ETA)


class TestKleinTable:
    def test_involutions(self):
        for e in KLEIN:
            assert e * e is S.ID

    def test_products(self):
        assert S.E1 * S.E2 is S.E3
        assert S.E2 * S.E3 is S.E1
        assert S.E3 * S.E1 is S.E2

    def test_abelian(self):
        for a, b in itertools.product(KLEIN, KLEIN):
            assert a * b is b * a

    def test_time_reversal(self):
        assert [e.reverses_time for e in KLEIN] == [False, False, True, True]


elements = st.builds(lambda z, a, b: GroupElement(z, (a, b)), st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3))


class TestEndpointAction:
    @given(elements)
    def test_action_is_klein(self, g):
        spec = make_group_spec(REGIMES["focus"])
        for a, b in itertools.product(KLEIN, KLEIN):
            lhs = act_endpoint(spec, a, act_endpoint(spec, b, g))
            rhs = act_endpoint(spec, a * b, g)
            assert group_distance(lhs, rhs) <= 1e-12 * max(1.0, math.exp(6))

    def test_fixed_points(self):
        spec = make_group_spec(REGIMES["det_neg"])
        samples = [GroupElement(0, (0, 0)), GroupElement(1, (0, 0)), GroupElement(0, (1, 2)), GroupElement(1, (1, 2))]
        for g in samples:
            for e in REFLECTIONS:
                fixed = group_distance(act_endpoint(spec, e, g), g) == 0.0
                assert fixed == is_fixed_point(e, g)

    def test_e2_example(self):
        spec = make_group_spec(REGIMES["det_neg"])
        g = act_endpoint(spec, S.E2, GroupElement(1.0, (1.0, 1.0)))
        assert g.z == -1.0
        assert np.allclose(g.w, [-math.exp(-1), -math.exp(2)], rtol=1e-15)


class TestPhaseAction:
    def test_points(self):
        assert act_phase_point(S.E1, 0.3, 0.5) == (-0.3, -0.5)
        phi, r = act_phase_point(S.E2, 0.3, 0.5)
        assert angles_equal(phi, 0.3 + math.pi, 1e-15) and r == -0.5
        assert act_phase_point(S.E3, 0.3, 0.5) == (math.pi - 0.3, 0.5)

    def test_preimage_uses_endpoint(self):
        spec, _ = setup()
        lam, T = PhasePoint(0.2, 1.5), 1.7
        y = solve_vertical(spec, lam, T, FINE)(T)
        l2 = act_phase_preimage(spec, S.E2, lam, T, tol=FINE)
        l3 = act_phase_preimage(spec, S.E3, lam, T, tol=FINE)
        assert angles_equal(l2.phi, y[0] + math.pi, 1e-10) and l2.r == pytest.approx(-y[1], abs=1e-10)
        assert angles_equal(l3.phi, math.pi - y[0], 1e-10) and l3.r == pytest.approx(y[1], abs=1e-10)
        assert act_phase_preimage(spec, S.E1, lam, T) == PhasePoint(-0.2, -1.5)


class TestTrajectories:
    @pytest.mark.parametrize("e", list(REFLECTIONS))
    @pytest.mark.parametrize("name", ["det_neg", "focus"])
    def test_transformed_solves_system(self, name, e):
        spec, st_ = setup(name)
        T = 3.0
        _, traj = exp_map(spec, st_, PhasePoint(0.5, 1.2), T, FINE)
        img = act_trajectory(spec, e, traj)
        assert ode_residual(spec, st_, img, T, h=2e-3) <= 1e-8

    def test_transformed_starts_at_identity(self):
        spec, st_ = setup()
        _, traj = exp_map(spec, st_, PhasePoint(0.5, 1.2), 2.0, FINE)
        for e in REFLECTIONS:
            y0 = act_trajectory(spec, e, traj)(0.0)
            assert np.max(np.abs(y0[2:])) < 1e-14

    def test_vertical_only(self):
        spec, _ = setup()
        vt = solve_vertical(spec, PhasePoint(0.5, 1.2), 2.0, FINE)
        img = act_trajectory(spec, S.E3, vt)
        assert img(0.5).shape == (2,)
        assert ode_residual(spec, None, img, 2.0, h=2e-3) <= 1e-8


class TestEquivariance:
    @pytest.mark.parametrize("e", list(REFLECTIONS))
    @pytest.mark.parametrize(
        "name,lam,T", [("det_neg", (0.3, 2.0), 4.0), ("focus", (1.0, -0.5), 3.0), ("node", (-2.0, 1.0), 3.0)]
    )
    def test_commutes(self, name, lam, T, e):
        spec, st_ = setup(name)
        assert verify_equivariance(spec, st_, e, PhasePoint(*lam), T, FINE) <= 1e-8

    def test_identity_trivial(self):
        spec, st_ = setup()
        assert verify_equivariance(spec, st_, S.ID, PhasePoint(0.3, 2.0), 1.0) == 0.0
