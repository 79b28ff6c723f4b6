"""Fixed-step closed-loop simulation and performance metrics.

A run advances observer -> controller -> plant in lockstep on a uniform
grid: at each sample the controller sees the current measurement and its
torques are held constant (zero-order hold) while the plant integrates one
classical RK4 step.  Every sample is recorded, including the per-wheel PID
and LQR torque components, so controller decompositions can be audited
after the fact.

The inner loop is deliberately scalar Python: at 4x6 derivative evaluations
per step a vectorized formulation buys nothing, and scalars keep a 20k-step
run well under a second.  The loop's PID recurrence and the public
``control_step`` are cross-checked against each other in the test suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .controller import ControllerConfig
from .errors import DivergenceError, ParameterError
from .plant import (
    PlantState,
    RobotParams,
    TractionTorques,
    accelerations,
    deriv_context,
)

#: Settling band half-widths: fraction of |V_d| for velocity, absolute for angles.
VELOCITY_BAND_FRACTION = 0.02
ANGLE_BAND_RAD = math.radians(1.0)


@dataclass(frozen=True)
class Scenario:
    """One closed-loop experiment: plant, controller, initial attitude, grid."""

    params: RobotParams
    controller: ControllerConfig
    phi0_deg: float = 0.0
    psi0_deg: float = 0.0
    phi_rate0: float = 0.0
    psi_rate0: float = 0.0
    v0: float = 0.0
    duration: float = 2.0
    dt: float = 1e-4

    def __post_init__(self):
        if not self.dt > 0.0:
            raise ParameterError("dt must be positive")
        if self.duration < self.dt:
            raise ParameterError("duration must be at least one step")
        for name in ("phi0_deg", "psi0_deg"):
            v = getattr(self, name)
            if not (math.isfinite(v) and abs(v) <= 90.0):
                raise ParameterError(f"|{name}| must be <= 90 degrees, got {v!r}")

    def initial_state(self) -> PlantState:
        return PlantState(
            x=0.0,
            v=self.v0,
            phi=math.radians(self.phi0_deg),
            phi_rate=self.phi_rate0,
            psi=math.radians(self.psi0_deg),
            psi_rate=self.psi_rate0,
        )

    def sample_count(self) -> int:
        """floor(duration/dt) + 1 samples, robust to float division."""
        return int(math.floor(self.duration / self.dt + 1e-9)) + 1


@dataclass
class Trajectory:
    """Recorded run: uniform grid, states, torques and their components.

    ``measurements`` columns are [omega1, omega2, omega3, phi, phi_rate,
    psi, psi_rate].  If the integration produced a non-finite state the
    arrays stop at the last finite sample and ``diverged_at`` holds the
    index of the first bad one.
    """

    t: np.ndarray
    states: np.ndarray
    torques: np.ndarray
    pid_torques: np.ndarray
    lqr_torques: np.ndarray
    measurements: np.ndarray
    diverged_at: int | None = None

    @property
    def stabilizing(self) -> np.ndarray:
        """Attitude sub-trajectory [phi, phi_rate, psi, psi_rate]."""
        return self.states[:, 2:6]


@dataclass(frozen=True)
class RunMetrics:
    """Settling and torque figures of merit for one run.

    Settling times are None when the signal never enters its band and stays;
    ``steady_state_torque_band`` and ``steady_state_lqr_band`` are the max
    absolute total/LQR-component torques over the final quarter of the run.
    """

    velocity_settling_time: float | None
    phi_settling_time: float | None
    psi_settling_time: float | None
    peak_torque: float
    steady_state_torque_band: float
    steady_state_lqr_band: float
    diverged: bool = False

    def settled(self) -> bool:
        return (not self.diverged
                and self.velocity_settling_time is not None
                and self.phi_settling_time is not None
                and self.psi_settling_time is not None)


def integrate_step(deriv: Callable, s: PlantState, u: TractionTorques,
                   dt: float) -> PlantState:
    """One classical RK4 step with the torques held constant.

    ``deriv(s, u)`` must return the length-6 state derivative.

    Raises
    ------
    DivergenceError
        If the step produces a non-finite state.
    """
    if not dt > 0.0:
        raise ParameterError("dt must be positive")
    y = s.as_array()
    k1 = np.asarray(deriv(s, u), dtype=float)
    k2 = np.asarray(deriv(PlantState.from_array(y + 0.5 * dt * k1), u), dtype=float)
    k3 = np.asarray(deriv(PlantState.from_array(y + 0.5 * dt * k2), u), dtype=float)
    k4 = np.asarray(deriv(PlantState.from_array(y + dt * k3), u), dtype=float)
    out = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if not np.all(np.isfinite(out)):
        raise DivergenceError("integration step produced a non-finite state")
    return PlantState.from_array(out)


def run_scenario(sc: Scenario) -> tuple[Trajectory, RunMetrics]:
    """Simulate one scenario and compute its metrics.

    Returns the full sampled trajectory; on numerical blow-up the finite
    prefix is returned with ``diverged_at`` set instead of raising.
    """
    p, cfg = sc.params, sc.controller
    ctx = deriv_context(p)
    dt = sc.dt
    n_samples = sc.sample_count()

    # hoist every per-step constant out of the loop
    k = cfg.gain.k
    (k00, k01, k02, k03), (k10, k11, k12, k13), (k20, k21, k22, k23) = k
    g = cfg.pid_gains
    kp, ki, kd, ilim = g.k_p, g.k_i, g.k_d, g.integral_limit
    alpha = 1.0 / (1.0 + g.derivative_filter_coeff)
    vd = cfg.desired_velocity
    r_ctl = cfg.wheel_radius
    inv_r_enc = 1.0 / p.wheel_radius
    tmax = cfg.torque_limit
    ns = cfg.noise_std
    noisy = ns.any_active()
    rng = np.random.default_rng(cfg.rng_seed) if noisy else None

    t_arr = np.empty(n_samples)
    states = np.empty((n_samples, 6))
    torques = np.empty((n_samples, 3))
    pid_arr = np.empty((n_samples, 3))
    lqr_arr = np.empty((n_samples, 3))
    meas_arr = np.empty((n_samples, 7))

    s0 = sc.initial_state()
    x, v = s0.x, s0.v
    phi, phid, psi, psid = s0.phi, s0.phi_rate, s0.psi, s0.psi_rate
    integ = [0.0, 0.0, 0.0]
    prev_e = [0.0, 0.0, 0.0]
    filt = [0.0, 0.0, 0.0]
    primed = False
    diverged_at = None
    recorded = n_samples

    for i in range(n_samples):
        # --- observe ---
        w = v * inv_r_enc
        if noisy:
            d = rng.standard_normal(7)
            m = (w + ns.encoder * d[0], w + ns.encoder * d[1],
                 w + ns.encoder * d[2], phi + ns.angle * d[3],
                 phid + ns.rate * d[4], psi + ns.angle * d[5],
                 psid + ns.rate * d[6])
        else:
            m = (w, w, w, phi, phid, psi, psid)

        # --- control: LQR on IMU channels + per-wheel PID on contact speed ---
        mp, mpd, mq, mqd = m[3], m[4], m[5], m[6]
        lqr = (-(k00 * mp + k01 * mpd + k02 * mq + k03 * mqd),
               -(k10 * mp + k11 * mpd + k12 * mq + k13 * mqd),
               -(k20 * mp + k21 * mpd + k22 * mq + k23 * mqd))
        u = [0.0, 0.0, 0.0]
        pid = [0.0, 0.0, 0.0]
        for j in range(3):
            e = vd - r_ctl * m[j]
            pe = e if not primed else prev_e[j]
            acc = integ[j] + ki * 0.5 * dt * (e + pe)
            if acc > ilim:
                acc = ilim
            elif acc < -ilim:
                acc = -ilim
            fd = filt[j] + alpha * ((e - pe) / dt - filt[j])
            integ[j], prev_e[j], filt[j] = acc, e, fd
            pid[j] = kp * e + acc + kd * fd
            tq = pid[j] + lqr[j]
            if tmax is not None:
                if tq > tmax:
                    tq = tmax
                elif tq < -tmax:
                    tq = -tmax
            u[j] = tq
        primed = True

        t_arr[i] = i * dt
        states[i, 0] = x
        states[i, 1] = v
        states[i, 2] = phi
        states[i, 3] = phid
        states[i, 4] = psi
        states[i, 5] = psid
        torques[i] = u
        pid_arr[i] = pid
        lqr_arr[i] = lqr
        meas_arr[i] = m

        if i == n_samples - 1:
            break

        # --- integrate one RK4 step under zero-order hold ---
        t1, t2, t3 = u
        a1, ap1, aq1 = accelerations(ctx, v, phi, psi, t1, t2, t3)
        v2 = v + 0.5 * dt * a1
        a2, ap2, aq2 = accelerations(ctx, v2, phi + 0.5 * dt * phid,
                                     psi + 0.5 * dt * psid, t1, t2, t3)
        phid2 = phid + 0.5 * dt * ap1
        psid2 = psid + 0.5 * dt * aq1
        v3 = v + 0.5 * dt * a2
        a3, ap3, aq3 = accelerations(ctx, v3, phi + 0.5 * dt * phid2,
                                     psi + 0.5 * dt * psid2, t1, t2, t3)
        phid3 = phid + 0.5 * dt * ap2
        psid3 = psid + 0.5 * dt * aq2
        v4 = v + dt * a3
        a4, ap4, aq4 = accelerations(ctx, v4, phi + dt * phid3,
                                     psi + dt * psid3, t1, t2, t3)
        phid4 = phid + dt * ap3
        psid4 = psid + dt * aq3

        sixth = dt / 6.0
        x += sixth * (v + 2.0 * (v2 + v3) + v4)
        v += sixth * (a1 + 2.0 * (a2 + a3) + a4)
        phi += sixth * (phid + 2.0 * (phid2 + phid3) + phid4)
        phid += sixth * (ap1 + 2.0 * (ap2 + ap3) + ap4)
        psi += sixth * (psid + 2.0 * (psid2 + psid3) + psid4)
        psid += sixth * (aq1 + 2.0 * (aq2 + aq3) + aq4)

        if not (math.isfinite(x) and math.isfinite(v) and math.isfinite(phi)
                and math.isfinite(phid) and math.isfinite(psi)
                and math.isfinite(psid)):
            diverged_at = i + 1
            recorded = i + 1
            break

    traj = Trajectory(
        t=t_arr[:recorded],
        states=states[:recorded],
        torques=torques[:recorded],
        pid_torques=pid_arr[:recorded],
        lqr_torques=lqr_arr[:recorded],
        measurements=meas_arr[:recorded],
        diverged_at=diverged_at,
    )
    return traj, compute_metrics(traj, sc)


def _settling_time(t: np.ndarray, signal: np.ndarray,
                   band: float) -> float | None:
    """First time |signal| <= band holding to the end, else None."""
    inside = np.abs(signal) <= band
    if not inside[-1]:
        return None
    outside = np.nonzero(~inside)[0]
    if outside.size == 0:
        return float(t[0])
    return float(t[outside[-1] + 1])


def compute_metrics(traj: Trajectory, sc: Scenario) -> RunMetrics:
    """Settling times and torque statistics for a recorded run.

    Velocity settles into +/-2% of the setpoint, angles into +/-1 degree;
    a signal counts as settled at the first sample after which it never
    leaves its band.  Steady-state bands are taken over the final 25% of
    the recorded samples.
    """
    if traj.t.size == 0:
        raise ParameterError("cannot compute metrics of an empty trajectory")
    vd = sc.controller.desired_velocity
    v_err = traj.states[:, 1] - vd
    peak = float(np.abs(traj.torques).max())
    tail = max(int(math.floor(0.75 * traj.t.size)), 0)
    diverged = traj.diverged_at is not None
    return RunMetrics(
        velocity_settling_time=None if diverged else _settling_time(
            traj.t, v_err, VELOCITY_BAND_FRACTION * abs(vd)),
        phi_settling_time=None if diverged else _settling_time(
            traj.t, traj.states[:, 2], ANGLE_BAND_RAD),
        psi_settling_time=None if diverged else _settling_time(
            traj.t, traj.states[:, 4], ANGLE_BAND_RAD),
        peak_torque=peak,
        steady_state_torque_band=float(np.abs(traj.torques[tail:]).max()),
        steady_state_lqr_band=float(np.abs(traj.lqr_torques[tail:]).max()),
        diverged=diverged,
    )
