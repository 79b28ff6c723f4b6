"""Nonlinear rigid-body dynamics of the three-wheel in-pipe robot.

State is (x, v, phi, phi_rate, psi, psi_rate): axial position/velocity plus
the two attitude angles (rotation about the pipe-frame y and z axes) and
their rates.  The three wheel torques act through the arm geometry; the
water column exerts a quadratic drag force on the body.

All internal units are strict SI (m, s, rad, N·m).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import DivergenceError, ParameterError

_SQRT3_2 = math.sqrt(3.0) / 2.0

#: Accepted drag conventions: "signed" opposes relative motion (physical),
#: "unsigned" always pushes the body forward regardless of direction.
DRAG_MODES = ("signed", "unsigned")


@dataclass(frozen=True)
class RobotParams:
    """Geometry, inertia and hydrodynamic constants of the robot.

    Attributes
    ----------
    arm_length : float
        Wheel-arm length L_a from the body center to the wheel contact [m].
    mass : float
        Total robot mass [kg].
    inertia_y, inertia_z : float
        Body moments of inertia about the pitch (y) and yaw (z) axes [kg m^2].
    wheel_radius : float
        Wheel radius R [m].
    pipe_diameter : float
        Inner diameter D of the pipe the robot is pressed against [m].
    drag_coeff : float
        Dimensionless drag coefficient C_d of the body.
    frontal_area : float
        Frontal area facing the flow [m^2].
    water_density : float
        Density of the working fluid [kg/m^3].
    flow_velocity : float
        Axial water velocity V_f [m/s]; positive means flow pushes forward.
    theta1, theta2, theta3 : float
        Arm elevation angles [rad]; each must lie in (0, pi/2).
    drag_mode : str
        "signed" (default) or "unsigned"; see :func:`drag_force`.
    """

    arm_length: float = 0.17
    mass: float = 2.23
    inertia_y: float = 0.0126
    inertia_z: float = 0.0093
    wheel_radius: float = 0.05
    pipe_diameter: float = 0.4
    drag_coeff: float = 0.47
    frontal_area: float = 0.05
    water_density: float = 1000.0
    flow_velocity: float = 0.0
    theta1: float = math.pi / 4
    theta2: float = math.pi / 4
    theta3: float = math.pi / 4
    drag_mode: str = "signed"

    def __post_init__(self):
        positive = {
            "arm_length": self.arm_length,
            "mass": self.mass,
            "inertia_y": self.inertia_y,
            "inertia_z": self.inertia_z,
            "wheel_radius": self.wheel_radius,
            "pipe_diameter": self.pipe_diameter,
            "drag_coeff": self.drag_coeff,
            "frontal_area": self.frontal_area,
            "water_density": self.water_density,
        }
        for name, value in positive.items():
            if not (math.isfinite(value) and value > 0):
                raise ParameterError(f"{name} must be finite and > 0, got {value!r}")
        if not math.isfinite(self.flow_velocity):
            raise ParameterError("flow_velocity must be finite")
        if self.wheel_radius >= self.pipe_diameter / 2:
            raise ParameterError(
                f"wheel_radius {self.wheel_radius} must be smaller than half the "
                f"pipe diameter {self.pipe_diameter}"
            )
        for name in ("theta1", "theta2", "theta3"):
            th = getattr(self, name)
            if not (0.0 < th < math.pi / 2):
                raise ParameterError(f"{name} must lie in (0, pi/2), got {th!r}")
        if self.drag_mode not in DRAG_MODES:
            raise ParameterError(
                f"drag_mode must be one of {DRAG_MODES}, got {self.drag_mode!r}"
            )

    def with_(self, **changes) -> "RobotParams":
        """Return a copy with the given fields replaced."""
        return replace(self, **changes)


@dataclass(frozen=True)
class PlantState:
    """Full plant state: axial motion plus the two attitude channels."""

    x: float = 0.0
    v: float = 0.0
    phi: float = 0.0
    phi_rate: float = 0.0
    psi: float = 0.0
    psi_rate: float = 0.0

    def as_array(self) -> np.ndarray:
        return np.array(
            [self.x, self.v, self.phi, self.phi_rate, self.psi, self.psi_rate]
        )

    def stabilizing(self) -> np.ndarray:
        """The attitude sub-vector [phi, phi_rate, psi, psi_rate]."""
        return np.array([self.phi, self.phi_rate, self.psi, self.psi_rate])

    def is_finite(self) -> bool:
        return all(
            math.isfinite(f)
            for f in (self.x, self.v, self.phi, self.phi_rate, self.psi, self.psi_rate)
        )

    @classmethod
    def from_array(cls, arr) -> "PlantState":
        x, v, phi, phi_rate, psi, psi_rate = arr
        return cls(float(x), float(v), float(phi), float(phi_rate),
                   float(psi), float(psi_rate))


@dataclass(frozen=True)
class TractionTorques:
    """Wheel traction torques tau1, tau2, tau3 [N·m]."""

    tau1: float = 0.0
    tau2: float = 0.0
    tau3: float = 0.0

    def as_array(self) -> np.ndarray:
        return np.array([self.tau1, self.tau2, self.tau3])

    def is_finite(self) -> bool:
        return all(math.isfinite(t) for t in (self.tau1, self.tau2, self.tau3))

    @classmethod
    def from_array(cls, arr) -> "TractionTorques":
        t1, t2, t3 = arr
        return cls(float(t1), float(t2), float(t3))


def deriv_context(params: RobotParams) -> tuple:
    """Precompute the constants used by the acceleration core.

    The returned tuple is consumed by :func:`accelerations`; hoisting it out
    of integration loops avoids repeated attribute lookups on ``params``.
    """
    return (
        1.0 / params.mass,
        1.0 / params.wheel_radius,
        0.5 * params.water_density * params.drag_coeff * params.frontal_area,
        params.flow_velocity,
        params.arm_length / (2.0 * params.inertia_y * params.wheel_radius),
        params.arm_length / (params.inertia_z * params.wheel_radius),
        params.theta1,
        params.theta2,
        params.theta3,
        params.drag_mode == "signed",
    )


def accelerations(ctx: tuple, v: float, phi: float, psi: float,
                  t1: float, t2: float, t3: float) -> tuple:
    """Evaluate (v_dot, phi_ddot, psi_ddot) from a precomputed context.

    This is the single source of truth for the torque balances; everything
    else (plant_deriv, the simulator, Jacobians) is built on it.
    """
    inv_m, inv_r, drag_c, v_f, c_y, c_z, th1, th2, th3, signed = ctx
    rel = v_f - v
    # quadratic body drag; signed mode opposes relative motion
    f_d = drag_c * rel * (abs(rel) if signed else rel)
    a = ((t1 + t2 + t3) * inv_r + f_d) * inv_m
    cos3m = math.cos(th3 - phi)
    # pitch balance: wheels 2 and 3 act antisymmetrically about y
    a_phi = c_y * (t3 * cos3m - t2 * math.cos(th2 + phi))
    # yaw balance: wheels 2/3 share a common-mode lever term, wheel 1 opposes
    a_psi = c_z * (
        _SQRT3_2 * (t3 * cos3m + t2 * math.cos(th3 + phi)) * (1.0 + math.sin(psi))
        - t1 * math.cos(th1 + psi)
    )
    return a, a_phi, a_psi


def drag_force(params: RobotParams, v_r: float) -> float:
    """Hydrodynamic drag on the body at axial velocity ``v_r``.

    In ``signed`` mode the force is 1/2 rho C_d A (V_f - v_r)|V_f - v_r|,
    which pushes the robot toward the flow velocity from either side.  In
    ``unsigned`` mode it is 1/2 rho C_d A (v_r - V_f)^2: always nonnegative,
    i.e. the flow always pushes the body forward.  The unsigned form makes
    the uncontrolled plant run away and is kept only for replicating
    reference behavior; ``signed`` is the default.

    Parameters
    ----------
    params : RobotParams
    v_r : float
        Robot axial velocity [m/s].

    Returns
    -------
    float
        Drag force [N], positive pushing the robot forward.
    """
    rel = params.flow_velocity - v_r
    c = 0.5 * params.water_density * params.drag_coeff * params.frontal_area
    if params.drag_mode == "signed":
        return c * rel * abs(rel)
    return c * rel * rel


def plant_deriv(params: RobotParams, s: PlantState,
                u: TractionTorques) -> np.ndarray:
    """Time derivative of the full plant state.

    Parameters
    ----------
    params : RobotParams
    s : PlantState
    u : TractionTorques

    Returns
    -------
    numpy.ndarray, shape (6,)
        [v, v_dot, phi_rate, phi_ddot, psi_rate, psi_ddot].

    Raises
    ------
    DivergenceError
        If the state or torques contain non-finite values (the caller's
        integration has blown up).
    """
    if not (s.is_finite() and u.is_finite()):
        raise DivergenceError("non-finite state or torque passed to plant_deriv")
    a, a_phi, a_psi = accelerations(
        deriv_context(params), s.v, s.phi, s.psi, u.tau1, u.tau2, u.tau3
    )
    return np.array([s.v, a, s.phi_rate, a_phi, s.psi_rate, a_psi])


def _stab_deriv(ctx: tuple, xs: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Derivative of the attitude subsystem [phi, phi_rate, psi, psi_rate]."""
    _, a_phi, a_psi = accelerations(ctx, 0.0, xs[0], xs[2], u[0], u[1], u[2])
    return np.array([xs[1], a_phi, xs[3], a_psi])


def numeric_jacobian(params: RobotParams, s0: PlantState, u0: TractionTorques,
                     h: float = 1e-6) -> tuple[np.ndarray, np.ndarray]:
    """Central-difference Jacobians of the attitude subsystem.

    Differentiates d/dt [phi, phi_rate, psi, psi_rate] with respect to the
    attitude states and the three torques at the operating point (s0, u0).

    Parameters
    ----------
    params : RobotParams
    s0 : PlantState
        Operating state (only phi, phi_rate, psi, psi_rate enter).
    u0 : TractionTorques
        Operating torques.
    h : float
        Central-difference step.

    Returns
    -------
    (A_num, B_num) : (numpy.ndarray 4x4, numpy.ndarray 4x3)

    Raises
    ------
    ParameterError
        If ``h`` is not positive or too small to perturb the state.
    """
    if not (h > 0.0) or 1.0 + h == 1.0:
        raise ParameterError(f"finite-difference step h={h!r} is not representable")
    ctx = deriv_context(params)
    xs0 = s0.stabilizing()
    uv0 = u0.as_array()
    a_num = np.empty((4, 4))
    b_num = np.empty((4, 3))
    for j in range(4):
        dx = np.zeros(4)
        dx[j] = h
        a_num[:, j] = (_stab_deriv(ctx, xs0 + dx, uv0)
                       - _stab_deriv(ctx, xs0 - dx, uv0)) / (2.0 * h)
    for j in range(3):
        du = np.zeros(3)
        du[j] = h
        b_num[:, j] = (_stab_deriv(ctx, xs0, uv0 + du)
                       - _stab_deriv(ctx, xs0, uv0 - du)) / (2.0 * h)
    return a_num, b_num


def analytic_jacobian(params: RobotParams, s0: PlantState,
                      u0: TractionTorques) -> tuple[np.ndarray, np.ndarray]:
    """Hand-differentiated Jacobians of the attitude subsystem.

    Serves as the oracle for :func:`numeric_jacobian`; both differentiate
    the same implemented right-hand side.

    Returns
    -------
    (A, B) : (numpy.ndarray 4x4, numpy.ndarray 4x3)
    """
    ctx = deriv_context(params)
    _, _, _, _, c_y, c_z, th1, th2, th3, _ = ctx
    phi, psi = s0.phi, s0.psi
    t1, t2, t3 = u0.tau1, u0.tau2, u0.tau3

    sin3m, cos3m = math.sin(th3 - phi), math.cos(th3 - phi)
    sin3p, cos3p = math.sin(th3 + phi), math.cos(th3 + phi)
    sin2p, cos2p = math.sin(th2 + phi), math.cos(th2 + phi)
    sp, cp = math.sin(psi), math.cos(psi)

    a = np.zeros((4, 4))
    a[0, 1] = 1.0
    a[2, 3] = 1.0
    a[1, 0] = c_y * (t3 * sin3m + t2 * sin2p)
    a[3, 0] = c_z * _SQRT3_2 * (t3 * sin3m - t2 * sin3p) * (1.0 + sp)
    a[3, 2] = c_z * (_SQRT3_2 * (t3 * cos3m + t2 * cos3p) * cp
                     + t1 * math.sin(th1 + psi))

    b = np.zeros((4, 3))
    b[1, 1] = -c_y * cos2p
    b[1, 2] = c_y * cos3m
    b[3, 0] = -c_z * math.cos(th1 + psi)
    b[3, 1] = c_z * _SQRT3_2 * cos3p * (1.0 + sp)
    b[3, 2] = c_z * _SQRT3_2 * cos3m * (1.0 + sp)
    return a, b
