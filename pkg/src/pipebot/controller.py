"""Combined attitude stabilizer and velocity-tracking controller.

The observer turns the true plant state into sensor readings: three wheel
encoders (equal angular velocity on a straight path) and an IMU giving the
attitude angles and rates, each channel optionally corrupted by seeded
Gaussian noise.  The control step then mixes, per wheel, a PID torque
tracking the body-velocity setpoint with the LQR attitude torque -K x_s.
Mixing is additive: velocity tracking is common-mode, attitude correction
is differential, and superposition keeps both designs intact.  The PID acts
on the contact-velocity error (setpoint minus wheel surface speed, m/s);
with the reference PID gains this yields startup torques on the order of
the actuator's rating rather than orders of magnitude above it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError
from .pid import PidGains, PidState, pid_step
from .plant import PlantState, RobotParams, TractionTorques
from .riccati import GainMatrix


@dataclass(frozen=True)
class NoiseStd:
    """Per-channel measurement noise standard deviations (all >= 0).

    ``encoder`` in rad/s, ``angle`` in rad, ``rate`` in rad/s.
    """

    encoder: float = 0.0
    angle: float = 0.0
    rate: float = 0.0

    def __post_init__(self):
        for name in ("encoder", "angle", "rate"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0.0):
                raise ParameterError(f"noise std {name} must be >= 0, got {v!r}")

    def any_active(self) -> bool:
        return self.encoder > 0.0 or self.angle > 0.0 or self.rate > 0.0


@dataclass(frozen=True)
class Measurement:
    """One sensor snapshot: encoder wheel speeds plus IMU attitude."""

    omega1: float
    omega2: float
    omega3: float
    phi: float
    phi_rate: float
    psi: float
    psi_rate: float
    timestamp: float

    def stabilizing(self) -> np.ndarray:
        return np.array([self.phi, self.phi_rate, self.psi, self.psi_rate])


@dataclass(frozen=True)
class ControllerConfig:
    """Everything the controller needs at run time."""

    gain: GainMatrix
    pid_gains: PidGains = field(default_factory=PidGains)
    desired_velocity: float = 0.0
    wheel_radius: float = 0.05
    torque_limit: float | None = None
    noise_std: NoiseStd = field(default_factory=NoiseStd)
    rng_seed: int = 0

    def __post_init__(self):
        if not math.isfinite(self.desired_velocity):
            raise ParameterError("desired_velocity must be finite")
        if not self.wheel_radius > 0.0:
            raise ParameterError("wheel_radius must be positive")
        if self.torque_limit is not None and not self.torque_limit > 0.0:
            raise ParameterError("torque_limit must be positive when set")


@dataclass(frozen=True)
class ControlOutput:
    """Clamped wheel torques plus the unclamped per-wheel components."""

    torques: TractionTorques
    pid_torques: np.ndarray
    lqr_torques: np.ndarray


def observe(s: PlantState, params: RobotParams, cfg: ControllerConfig,
            t: float, rng: np.random.Generator | None = None) -> Measurement:
    """Sensor model: encoders from body velocity, IMU from attitude.

    On a straight path all wheels roll at the body contact speed, so each
    encoder reads v/R.  With any noise std configured, zero-mean Gaussian
    noise is drawn from ``rng``; pass one generator across a whole run for
    a reproducible stream (one is created from ``cfg.rng_seed`` if omitted).
    """
    w = s.v / params.wheel_radius
    m = [w, w, w, s.phi, s.phi_rate, s.psi, s.psi_rate]
    ns = cfg.noise_std
    if ns.any_active():
        if rng is None:
            rng = np.random.default_rng(cfg.rng_seed)
        draws = rng.standard_normal(7)
        stds = (ns.encoder, ns.encoder, ns.encoder,
                ns.angle, ns.rate, ns.angle, ns.rate)
        m = [mi + sd * d for mi, sd, d in zip(m, stds, draws)]
    return Measurement(m[0], m[1], m[2], m[3], m[4], m[5], m[6], t)


def control_step(cfg: ControllerConfig, m: Measurement,
                 pid_states: tuple[PidState, PidState, PidState],
                 dt: float) -> tuple[ControlOutput, tuple[PidState, ...]]:
    """One controller sample: measurement in, three wheel torques out.

    Per wheel i the PID tracks the contact-velocity error
    ``desired_velocity - R * omega_i`` and the LQR adds -K x_s from the IMU
    channels.  The sum is clamped to ``torque_limit`` when one is set;
    the returned components are pre-clamp, so with no limit configured the
    decomposition total = pid + lqr is exact.
    """
    k = cfg.gain.k
    xs = (m.phi, m.phi_rate, m.psi, m.psi_rate)
    lqr = np.array([
        -(k[i, 0] * xs[0] + k[i, 1] * xs[1] + k[i, 2] * xs[2] + k[i, 3] * xs[3])
        for i in range(3)
    ])
    pid = np.empty(3)
    new_states = []
    for i, (omega, st) in enumerate(zip((m.omega1, m.omega2, m.omega3),
                                        pid_states)):
        error = cfg.desired_velocity - cfg.wheel_radius * omega
        pid[i], st_next = pid_step(cfg.pid_gains, st, error, dt)
        new_states.append(st_next)
    total = pid + lqr
    if cfg.torque_limit is not None:
        total = np.clip(total, -cfg.torque_limit, cfg.torque_limit)
    out = ControlOutput(
        torques=TractionTorques(float(total[0]), float(total[1]), float(total[2])),
        pid_torques=pid,
        lqr_torques=lqr,
    )
    return out, tuple(new_states)
