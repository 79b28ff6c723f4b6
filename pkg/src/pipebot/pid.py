"""Discrete PID for per-wheel angular-velocity tracking.

Trapezoid integral with the integral contribution clamped (anti-windup),
backward-difference derivative smoothed by a first-order filter whose time
constant is ``derivative_filter_coeff * dt``.  State is an explicit value
threaded through calls, so controllers are trivially independent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ParameterError


@dataclass(frozen=True)
class PidGains:
    """Shared gains for the three wheel-speed loops.

    k_p [N·m per rad/s], k_i [N·m per rad], k_d [N·m·s per rad/s].
    ``integral_limit`` clamps the integral torque contribution [N·m].
    """

    k_p: float = 8.7313
    k_i: float = 322.4160
    k_d: float = 0.0072
    derivative_filter_coeff: float = 0.1
    integral_limit: float = 100.0

    def __post_init__(self):
        for name in ("k_p", "k_i", "k_d", "derivative_filter_coeff"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0.0):
                raise ParameterError(f"{name} must be finite and >= 0, got {v!r}")
        if not (math.isfinite(self.integral_limit) and self.integral_limit > 0.0):
            raise ParameterError("integral_limit must be finite and > 0")


@dataclass(frozen=True)
class PidState:
    """Controller memory between steps.

    ``integral`` is the clamped integral torque contribution [N·m].  A fresh
    state is unprimed: the first step seeds the error history with the
    incoming error, so there is no derivative kick at startup.
    """

    integral: float = 0.0
    previous_error: float = 0.0
    filtered_derivative: float = 0.0
    primed: bool = False


def pid_step(gains: PidGains, state: PidState, error: float,
             dt: float) -> tuple[float, PidState]:
    """Advance one controller by one sample.

    Returns the commanded torque [N·m] and the successor state.
    """
    if not dt > 0.0:
        raise ParameterError(f"dt must be positive, got {dt!r}")
    prev = state.previous_error if state.primed else error
    integral = state.integral + gains.k_i * 0.5 * dt * (error + prev)
    if integral > gains.integral_limit:
        integral = gains.integral_limit
    elif integral < -gains.integral_limit:
        integral = -gains.integral_limit
    # low-pass the backward difference; coeff 0 means no filtering
    alpha = 1.0 / (1.0 + gains.derivative_filter_coeff)
    filtered = state.filtered_derivative + alpha * (
        (error - prev) / dt - state.filtered_derivative
    )
    torque = gains.k_p * error + integral + gains.k_d * filtered
    return torque, PidState(integral, error, filtered, True)


def wheel_speed_from_velocity(v_r: float, wheel_radius: float) -> float:
    """Wheel angular velocity [rad/s] for body velocity ``v_r`` [m/s]."""
    if not wheel_radius > 0.0:
        raise ParameterError("wheel_radius must be positive")
    return v_r / wheel_radius

def velocity_from_wheel_speed(omega: float, wheel_radius: float) -> float:
    """Body velocity [m/s] for wheel angular velocity ``omega`` [rad/s]."""
    if not wheel_radius > 0.0:
        raise ParameterError("wheel_radius must be positive")
    return omega * wheel_radius
