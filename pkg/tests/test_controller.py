"""Observer model and the combined PID + LQR control step."""

import numpy as np
import pytest

from pipebot import (
    ControllerConfig,
    GainMatrix,
    Measurement,
    NoiseStd,
    ParameterError,
    PidGains,
    PidState,
    PlantState,
    RobotParams,
    control_step,
    observe,
    synthesized_gain,
)

DT = 1e-4


def make_config(**kw):
    defaults = dict(gain=synthesized_gain(), desired_velocity=0.5,
                    wheel_radius=0.05)
    defaults.update(kw)
    return ControllerConfig(**defaults)


def fresh_states():
    return (PidState(), PidState(), PidState())


class TestObserve:
    def test_ideal_projection(self):
        s = PlantState(x=1.0, v=0.5, phi=0.1, phi_rate=-0.2, psi=0.3,
                       psi_rate=0.4)
        m = observe(s, RobotParams(), make_config(), t=1.25)
        assert m.omega1 == m.omega2 == m.omega3 == pytest.approx(10.0)
        assert (m.phi, m.phi_rate, m.psi, m.psi_rate) == (0.1, -0.2, 0.3, 0.4)
        assert m.timestamp == 1.25

    def test_seeded_noise_reproducible(self):
        cfg = make_config(noise_std=NoiseStd(0.05, 0.01, 0.02), rng_seed=99)
        s = PlantState(v=0.5)
        m1 = observe(s, RobotParams(), cfg, 0.0,
                     rng=np.random.default_rng(cfg.rng_seed))
        m2 = observe(s, RobotParams(), cfg, 0.0,
                     rng=np.random.default_rng(cfg.rng_seed))
        assert m1 == m2
        assert m1.omega1 != pytest.approx(10.0)  # noise actually applied

    def test_noise_statistics(self):
        cfg = make_config(noise_std=NoiseStd(encoder=0.1), rng_seed=5)
        rng = np.random.default_rng(cfg.rng_seed)
        s = PlantState(v=0.5)
        draws = [observe(s, RobotParams(), cfg, 0.0, rng=rng).omega1
                 for _ in range(4000)]
        assert np.std(draws) == pytest.approx(0.1, rel=0.1)
        assert np.mean(draws) == pytest.approx(10.0, abs=0.01)

    def test_noise_std_validation(self):
        with pytest.raises(ParameterError):
            NoiseStd(encoder=-0.1)


class TestControlStep:
    def test_zero_input_fixed_point(self):
        cfg = make_config(desired_velocity=0.5)
        m = Measurement(10.0, 10.0, 10.0, 0.0, 0.0, 0.0, 0.0, 0.0)
        out, _ = control_step(cfg, m, fresh_states(), DT)
        assert out.torques.as_array().tolist() == [0.0, 0.0, 0.0]

    def test_common_mode_on_equal_speed_error(self):
        cfg = make_config(desired_velocity=0.5)
        m = Measurement(8.0, 8.0, 8.0, 0.0, 0.0, 0.0, 0.0, 0.0)
        out, _ = control_step(cfg, m, fresh_states(), DT)
        u = out.torques.as_array()
        assert u[0] == u[1] == u[2]
        assert u[0] > 0.0  # under speed -> positive torque

    def test_pure_yaw_reference_torques(self):
        cfg = make_config(desired_velocity=0.5)
        m = Measurement(10.0, 10.0, 10.0, 0.0, 0.0, 1.0, 0.0, 0.0)
        out, _ = control_step(cfg, m, fresh_states(), DT)
        u = out.torques.as_array()
        np.testing.assert_allclose(u, [11.5470, -5.7735, -5.7735], atol=1e-3)

    def test_decomposition_exact_without_limit(self):
        cfg = make_config(desired_velocity=0.3)
        m = Measurement(2.0, 3.0, 4.0, 0.1, -0.2, 0.05, 0.3, 0.0)
        out, _ = control_step(cfg, m, fresh_states(), DT)
        np.testing.assert_array_equal(
            out.torques.as_array(), out.pid_torques + out.lqr_torques)

    def test_saturation(self):
        cfg = make_config(desired_velocity=0.5, torque_limit=0.5)
        m = Measurement(-50.0, -50.0, -50.0, 0.5, 0.0, -0.5, 0.0, 0.0)
        out, _ = control_step(cfg, m, fresh_states(), DT)
        assert np.abs(out.torques.as_array()).max() <= 0.5

    def test_states_thread_through(self):
        cfg = make_config(desired_velocity=0.5)
        m = Measurement(8.0, 9.0, 10.0, 0.0, 0.0, 0.0, 0.0, 0.0)
        _, states = control_step(cfg, m, fresh_states(), DT)
        assert all(s.primed for s in states)
        assert states[0].previous_error == pytest.approx(0.5 - 0.05 * 8.0)
        assert states[2].previous_error == pytest.approx(0.0)

    def test_error_is_contact_velocity(self):
        # wheel 1 rad/s slow at R = 0.05 -> 0.05 m/s error into the PID
        cfg = make_config(
            desired_velocity=0.5,
            pid_gains=PidGains(k_p=2.0, k_i=0.0, k_d=0.0),
            gain=GainMatrix(np.zeros((3, 4))),
        )
        m = Measurement(9.0, 10.0, 10.0, 0.0, 0.0, 0.0, 0.0, 0.0)
        out, _ = control_step(cfg, m, fresh_states(), DT)
        assert out.torques.tau1 == pytest.approx(2.0 * 0.05)
        assert out.torques.tau2 == 0.0

    def test_config_validation(self):
        with pytest.raises(ParameterError):
            make_config(torque_limit=-1.0)
        with pytest.raises(ParameterError):
            make_config(wheel_radius=0.0)
        with pytest.raises(ParameterError):
            make_config(desired_velocity=float("nan"))
