"""Plant dynamics: drag, torque balances, Jacobians."""

import math

import numpy as np
import pytest

from pipebot import (
    DivergenceError,
    ParameterError,
    PlantState,
    RobotParams,
    TractionTorques,
    analytic_jacobian,
    drag_force,
    numeric_jacobian,
    plant_deriv,
)
from pipebot.sim import integrate_step


class TestRobotParams:
    def test_defaults_valid(self):
        p = RobotParams()
        assert p.mass == 2.23
        assert p.drag_mode == "signed"

    @pytest.mark.parametrize("field,value", [
        ("mass", -1.0),
        ("mass", 0.0),
        ("arm_length", float("nan")),
        ("inertia_y", 0.0),
        ("water_density", -3.0),
    ])
    def test_positive_fields(self, field, value):
        with pytest.raises(ParameterError, match=field):
            RobotParams(**{field: value})

    def test_wheel_must_fit_in_pipe(self):
        with pytest.raises(ParameterError, match="wheel_radius"):
            RobotParams(wheel_radius=0.2, pipe_diameter=0.4)

    @pytest.mark.parametrize("theta", [0.0, -0.1, math.pi / 2, 2.0])
    def test_arm_angle_range(self, theta):
        with pytest.raises(ParameterError, match="theta1"):
            RobotParams(theta1=theta)

    def test_drag_mode_checked(self):
        with pytest.raises(ParameterError, match="drag_mode"):
            RobotParams(drag_mode="quadratic")


class TestDragForce:
    def test_zero_relative_velocity_both_modes(self):
        for mode in ("signed", "unsigned"):
            p = RobotParams(flow_velocity=0.7, drag_mode=mode)
            assert drag_force(p, 0.7) == 0.0

    def test_reference_magnitude(self):
        # 0.5 * 1000 * 0.47 * 0.05 * 1^2 with the robot at rest in 1 m/s flow
        p = RobotParams(flow_velocity=1.0)
        assert drag_force(p, 0.0) == pytest.approx(11.75)

    def test_signed_mode_opposes_motion(self):
        p = RobotParams(flow_velocity=0.0)
        f = drag_force(p, 2.0)
        assert f == pytest.approx(-0.5 * 1000 * 0.47 * 0.05 * 4.0)
        assert f < 0.0

    def test_unsigned_mode_always_pushes_forward(self):
        p = RobotParams(flow_velocity=0.0, drag_mode="unsigned")
        assert drag_force(p, 2.0) == pytest.approx(+0.5 * 1000 * 0.47 * 0.05 * 4.0)

    def test_sign_matches_relative_velocity(self):
        p = RobotParams(flow_velocity=0.3)
        rng = np.random.default_rng(7)
        for v in rng.uniform(-2.0, 2.0, size=50):
            if v == p.flow_velocity:
                continue
            f = drag_force(p, v)
            assert math.copysign(1.0, f) == math.copysign(
                1.0, p.flow_velocity - v
            ), f"drag sign wrong at v={v}"


class TestPlantDeriv:
    def test_equilibrium(self):
        p = RobotParams(flow_velocity=0.25)
        d = plant_deriv(p, PlantState(v=0.25), TractionTorques())
        np.testing.assert_allclose(d, [0.25, 0, 0, 0, 0, 0], atol=0.0)

    def test_symmetric_torques_cancel_pitch(self):
        p = RobotParams()
        d = plant_deriv(p, PlantState(v=p.flow_velocity),
                        TractionTorques(0.0, 0.3, 0.3))
        assert d[3] == pytest.approx(0.0, abs=1e-15)

    def test_common_mode_acceleration(self):
        # 3 tau / (R m) at zero relative flow
        p = RobotParams()
        tau = 0.0745
        d = plant_deriv(p, PlantState(v=0.0), TractionTorques(tau, tau, tau))
        assert d[1] == pytest.approx(3 * tau / (0.05 * 2.23))
        assert d[1] == pytest.approx(2.004484304932735, rel=1e-12)

    def test_swapping_wheels_2_3_negates_pitch(self):
        p = RobotParams()
        s = PlantState(v=p.flow_velocity)
        d_a = plant_deriv(p, s, TractionTorques(0.1, 0.2, 0.5))
        d_b = plant_deriv(p, s, TractionTorques(0.1, 0.5, 0.2))
        assert d_a[3] == pytest.approx(-d_b[3], rel=1e-12)
        assert d_a[1] == pytest.approx(d_b[1], rel=1e-12)

    def test_non_finite_state_rejected(self):
        p = RobotParams()
        with pytest.raises(DivergenceError):
            plant_deriv(p, PlantState(v=float("inf")), TractionTorques())
        with pytest.raises(DivergenceError):
            plant_deriv(p, PlantState(), TractionTorques(float("nan"), 0, 0))

    def test_terminal_velocity_under_signed_drag(self):
        # coasting with zero torque: the gap w = V_f - v obeys w' = -c w^2
        # with c = (rho Cd A / 2) / m, so w(t) = 1 / (c t + 1/w0) -- a slow
        # algebraic approach, which the integrated run must reproduce
        p = RobotParams(flow_velocity=0.4)
        c = 0.5 * p.water_density * p.drag_coeff * p.frontal_area / p.mass
        s = PlantState()
        u = TractionTorques()
        gaps = []
        for _ in range(4000):
            s = integrate_step(lambda st, uu: plant_deriv(p, st, uu), s, u, 1e-3)
            gaps.append(abs(p.flow_velocity - s.v))
        exact = 1.0 / (c * 4.0 + 1.0 / p.flow_velocity)
        assert gaps[-1] == pytest.approx(exact, rel=1e-6)
        assert all(b <= a + 1e-15 for a, b in zip(gaps, gaps[1:]))

    def test_stabilizing_extraction_order(self):
        s = PlantState(x=1, v=2, phi=3, phi_rate=4, psi=5, psi_rate=6)
        np.testing.assert_array_equal(s.stabilizing(), [3, 4, 5, 6])


class TestJacobians:
    def test_step_validation(self):
        p = RobotParams()
        with pytest.raises(ParameterError):
            numeric_jacobian(p, PlantState(), TractionTorques(), h=0.0)
        with pytest.raises(ParameterError):
            numeric_jacobian(p, PlantState(), TractionTorques(), h=1e-300)

    def test_equilibrium_structure(self):
        p = RobotParams()
        a, b = numeric_jacobian(p, PlantState(), TractionTorques(), h=1e-6)
        np.testing.assert_allclose(a[0], [0, 1, 0, 0], atol=1e-12)
        np.testing.assert_allclose(a[2], [0, 0, 0, 1], atol=1e-12)
        # wheel 1 exerts no pitch moment
        assert b[1, 0] == pytest.approx(0.0, abs=1e-12)

    def test_matches_analytic_at_equilibrium(self):
        p = RobotParams()
        h = 1e-6
        a_num, b_num = numeric_jacobian(p, PlantState(), TractionTorques(), h)
        a_ana, b_ana = analytic_jacobian(p, PlantState(), TractionTorques())
        scale = max(1.0, np.abs(a_ana).max(), np.abs(b_ana).max())
        tol = 10 * h * h * scale
        np.testing.assert_allclose(a_num, a_ana, atol=tol)
        np.testing.assert_allclose(b_num, b_ana, atol=tol)

    def test_matches_analytic_at_generic_point(self):
        p = RobotParams(theta1=0.6, theta2=0.8, theta3=0.7)
        s = PlantState(phi=0.2, phi_rate=-0.5, psi=-0.3, psi_rate=0.4)
        u = TractionTorques(0.4, -0.2, 0.6)
        h = 1e-5
        a_num, b_num = numeric_jacobian(p, s, u, h)
        a_ana, b_ana = analytic_jacobian(p, s, u)
        scale = max(1.0, np.abs(a_ana).max(), np.abs(b_ana).max())
        tol = 10 * h * h * scale
        err_a = np.abs(a_num - a_ana).max()
        err_b = np.abs(b_num - b_ana).max()
        assert err_a <= tol, f"A mismatch {err_a:.2e} > {tol:.2e}"
        assert err_b <= tol, f"B mismatch {err_b:.2e} > {tol:.2e}"
