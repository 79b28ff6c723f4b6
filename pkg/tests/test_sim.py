"""Closed-loop simulation: integrator, scenario plumbing, metrics."""

import math

import numpy as np
import pytest

from pipebot import (
    ControllerConfig,
    DivergenceError,
    GainMatrix,
    NoiseStd,
    ParameterError,
    PidGains,
    PidState,
    PlantState,
    RobotParams,
    Scenario,
    TractionTorques,
    Trajectory,
    compute_metrics,
    control_step,
    integrate_step,
    iteration,
    observe,
    plant_deriv,
    run_scenario,
)

U0 = TractionTorques()


def passive_controller(**cfg_kw):
    """All-zero gains: the controller never pushes on the plant."""
    return ControllerConfig(
        gain=GainMatrix(np.zeros((3, 4))),
        pid_gains=PidGains(k_p=0.0, k_i=0.0, k_d=0.0),
        desired_velocity=0.0,
        **cfg_kw,
    )


class TestIntegrateStep:
    def test_zero_derivative_fixed_point(self):
        s = PlantState(x=1.0, v=2.0, phi=0.3, phi_rate=0.4, psi=0.5,
                       psi_rate=0.6)
        out = integrate_step(lambda st, u: np.zeros(6), s, U0, 0.1)
        np.testing.assert_array_equal(out.as_array(), s.as_array())

    def test_exponential_decay_accuracy(self):
        # y' = -y: classical RK4 truncates the series after the h^4 term,
        # so the one-step error at h = 0.1 is ~8.2e-8 and halving h divides
        # it by ~32.
        decay = lambda st, u: -st.as_array()
        s = PlantState.from_array(np.ones(6))
        exact = lambda h: math.exp(-h)
        err = lambda h: abs(integrate_step(decay, s, U0, h).x - exact(h))
        e1, e2 = err(0.1), err(0.05)
        assert e1 == pytest.approx(8.196e-8, rel=1e-3)
        assert 20.0 < e1 / e2 < 45.0

    @pytest.mark.filterwarnings("ignore:overflow:RuntimeWarning")
    def test_nonfinite_step_raises(self):
        s = PlantState()
        blowup = lambda st, u: np.full(6, 1e308)
        with pytest.raises(DivergenceError):
            integrate_step(blowup, s, U0, 10.0)

    def test_dt_validation(self):
        with pytest.raises(ParameterError):
            integrate_step(lambda st, u: np.zeros(6), PlantState(), U0, 0.0)


class TestScenario:
    def test_validation(self):
        ctl = passive_controller()
        with pytest.raises(ParameterError):
            Scenario(RobotParams(), ctl, dt=0.0)
        with pytest.raises(ParameterError):
            Scenario(RobotParams(), ctl, duration=1e-5, dt=1e-4)
        with pytest.raises(ParameterError):
            Scenario(RobotParams(), ctl, phi0_deg=91.0)
        with pytest.raises(ParameterError):
            Scenario(RobotParams(), ctl, psi0_deg=-90.5)

    def test_initial_state_converts_degrees(self):
        sc = Scenario(RobotParams(), passive_controller(), phi0_deg=30.0,
                      psi0_deg=-45.0, phi_rate0=0.1, v0=0.2)
        s = sc.initial_state()
        assert s.phi == pytest.approx(math.radians(30.0))
        assert s.psi == pytest.approx(math.radians(-45.0))
        assert (s.x, s.v, s.phi_rate, s.psi_rate) == (0.0, 0.2, 0.1, 0.0)

    @pytest.mark.parametrize("duration,dt,n", [
        (0.001, 1e-4, 11),
        (2.0, 1e-4, 20001),
        (1.0, 1e-3, 1001),
        (0.0999999999, 1e-4, 1000),  # just under an exact multiple
    ])
    def test_sample_count(self, duration, dt, n):
        sc = Scenario(RobotParams(), passive_controller(),
                      duration=duration, dt=dt)
        assert sc.sample_count() == n


class TestRunScenario:
    def test_grid(self):
        sc = Scenario(RobotParams(), passive_controller(), duration=0.01)
        traj, _ = run_scenario(sc)
        assert traj.t.size == sc.sample_count() == 101
        assert traj.t[0] == 0.0
        np.testing.assert_allclose(np.diff(traj.t), sc.dt, rtol=1e-12)
        assert traj.states.shape == (101, 6)
        assert traj.measurements.shape == (101, 7)

    def test_equilibrium_is_exactly_preserved(self):
        sc = Scenario(RobotParams(), passive_controller(), duration=0.05)
        traj, metrics = run_scenario(sc)
        np.testing.assert_array_equal(traj.states, 0.0)
        np.testing.assert_array_equal(traj.torques, 0.0)
        assert metrics.peak_torque == 0.0
        assert not metrics.diverged

    def test_free_stream_drags_robot_toward_flow_velocity(self):
        params = RobotParams(flow_velocity=0.5)
        sc = Scenario(params, passive_controller(), duration=2.0, dt=1e-3)
        traj, _ = run_scenario(sc)
        v = traj.states[:, 1]
        assert np.all(np.diff(v) > 0.0)  # monotone approach
        assert v[-1] < 0.5
        assert v[-1] > 0.41  # quadratic drag closes most of the gap in 2 s

    def test_trajectory_matches_public_building_blocks(self):
        # The hand-inlined loop must agree with the composable API:
        # observe -> control_step -> integrate_step, sample by sample.
        for noise in (None, NoiseStd(0.02, 0.002, 0.005)):
            sc = iteration(3, duration=0.02, noise=noise, rng_seed=7)
            cfg, p = sc.controller, sc.params
            traj, _ = run_scenario(sc)

            rng = (np.random.default_rng(cfg.rng_seed)
                   if cfg.noise_std.any_active() else None)
            s = sc.initial_state()
            pid_states = (PidState(), PidState(), PidState())
            deriv = lambda st, u: plant_deriv(p, st, u)
            n = sc.sample_count()
            for i in range(n):
                m = observe(s, p, cfg, i * sc.dt, rng=rng)
                out, pid_states = control_step(cfg, m, pid_states, sc.dt)
                np.testing.assert_allclose(
                    traj.states[i], s.as_array(), atol=1e-12)
                np.testing.assert_allclose(
                    traj.torques[i], out.torques.as_array(), atol=1e-10)
                np.testing.assert_allclose(
                    traj.measurements[i],
                    [m.omega1, m.omega2, m.omega3, m.phi, m.phi_rate,
                     m.psi, m.psi_rate], atol=1e-12)
                if i < n - 1:
                    s = integrate_step(deriv, s, out.torques, sc.dt)

    @pytest.mark.filterwarnings("ignore:overflow:RuntimeWarning")
    @pytest.mark.filterwarnings("ignore:invalid value:RuntimeWarning")
    def test_divergence_is_reported_not_raised(self):
        # Unsigned drag with the robot moving against still water feeds the
        # speed back positively: v' ~ v^2 blows up in finite time.
        params = RobotParams(drag_mode="unsigned")
        sc = Scenario(params, passive_controller(), v0=1.0, duration=2.0)
        traj, metrics = run_scenario(sc)
        assert traj.diverged_at is not None
        assert traj.t.size == traj.diverged_at  # finite prefix only
        assert traj.t.size < sc.sample_count()
        assert np.all(np.isfinite(traj.states))
        assert metrics.diverged
        assert not metrics.settled()
        assert metrics.velocity_settling_time is None
        assert metrics.phi_settling_time is None

    def test_settling_insensitive_to_dt(self):
        # halving the step moves each settling time by well under 1%
        coarse = run_scenario(iteration(3, duration=1.2, dt=1e-4))[1]
        fine = run_scenario(iteration(3, duration=1.2, dt=5e-5))[1]
        for attr in ("velocity_settling_time", "phi_settling_time",
                     "psi_settling_time"):
            assert getattr(fine, attr) == pytest.approx(
                getattr(coarse, attr), rel=0.01)

    def test_benchmark_scenario_settles(self):
        traj, metrics = run_scenario(iteration(1, duration=1.0))
        assert metrics.settled()
        assert metrics.velocity_settling_time < 0.5
        assert metrics.phi_settling_time < 1.0
        assert metrics.psi_settling_time < 1.0
        # angles end the run inside the +/-1 degree band
        assert abs(traj.states[-1, 2]) < math.radians(1.0)
        assert abs(traj.states[-1, 4]) < math.radians(1.0)


def make_trajectory(t, v, phi, psi, torques, lqr=None):
    n = t.size
    states = np.zeros((n, 6))
    states[:, 1], states[:, 2], states[:, 4] = v, phi, psi
    torques = np.asarray(torques, dtype=float)
    lqr = torques / 10.0 if lqr is None else np.asarray(lqr, dtype=float)
    return Trajectory(t=t, states=states, torques=torques,
                      pid_torques=torques - lqr, lqr_torques=lqr,
                      measurements=np.zeros((n, 7)))


class TestComputeMetrics:
    def scenario(self, vd=1.0):
        ctl = ControllerConfig(gain=GainMatrix(np.zeros((3, 4))),
                               desired_velocity=vd)
        return Scenario(RobotParams(), ctl)

    def test_settling_definitions(self):
        t = np.arange(5) * 0.1
        traj = make_trajectory(
            t,
            v=np.array([0.0, 0.9, 0.99, 1.0, 1.0]),  # enters 2% band at t=0.2
            phi=np.zeros(5),                          # settled from the start
            psi=np.full(5, 0.1),                      # never inside 1 degree
            torques=np.array([[3.0, 0, 0], [2, 0, 0], [1, 0, 0],
                              [0.5, 0, 0], [0.2, 0, 0]]),
        )
        m = compute_metrics(traj, self.scenario(vd=1.0))
        assert m.velocity_settling_time == pytest.approx(0.2)
        assert m.phi_settling_time == 0.0
        assert m.psi_settling_time is None
        assert not m.settled()
        assert m.peak_torque == 3.0
        # steady-state bands cover the final quarter: samples 3 and 4
        assert m.steady_state_torque_band == 0.5
        assert m.steady_state_lqr_band == pytest.approx(0.05)

    def test_reentry_resets_settling(self):
        t = np.arange(6) * 0.1
        phi = np.array([0.0, 0.0, 0.05, 0.0, 0.0, 0.0])  # leaves the band once
        traj = make_trajectory(t, v=np.ones(6), phi=phi, psi=np.zeros(6),
                               torques=np.zeros((6, 3)))
        m = compute_metrics(traj, self.scenario(vd=1.0))
        assert m.phi_settling_time == pytest.approx(0.3)

    def test_empty_trajectory_rejected(self):
        traj = make_trajectory(np.empty(0), np.empty(0), np.empty(0),
                               np.empty(0), np.empty((0, 3)))
        with pytest.raises(ParameterError):
            compute_metrics(traj, self.scenario())
