"""Control synthesis and closed-loop simulation for a three-wheel in-pipe robot.

The robot drives along a water-filled pipe on three spring-loaded wheel
arms.  Three wheel torques are the only actuators; they must simultaneously
track an axial velocity setpoint and regulate the two attitude angles.
This package provides the nonlinear plant model, its linearization, LQR
gain synthesis via a Riccati solver, per-wheel PID speed loops, the
combined controller, a deterministic fixed-step simulator with telemetry
output, and a command-line interface (``pipebot``).
"""

from .controller import (
    ControlOutput,
    ControllerConfig,
    Measurement,
    NoiseStd,
    control_step,
    observe,
)
from .errors import (
    ConfigError,
    DivergenceError,
    ParameterError,
    PipebotError,
    SynthesisError,
)
from .linmodel import LinearModel, ReconcileReport, design_model, linearize, reconcile
from .pid import (
    PidGains,
    PidState,
    pid_step,
    velocity_from_wheel_speed,
    wheel_speed_from_velocity,
)
from .plant import (
    PlantState,
    RobotParams,
    TractionTorques,
    analytic_jacobian,
    drag_force,
    numeric_jacobian,
    plant_deriv,
)
from .presets import (
    ACTUATOR_LIMIT,
    ITERATIONS,
    REFERENCE_GAIN,
    iteration,
    reference_params,
    reference_weights,
    synthesized_gain,
)
from .riccati import (
    CareSolution,
    GainMatrix,
    LqrWeights,
    care_residual,
    control_law,
    lqr_cost,
    lqr_gain,
    solve_care,
)
from .sim import (
    RunMetrics,
    Scenario,
    Trajectory,
    compute_metrics,
    integrate_step,
    run_scenario,
)
from .telemetry import read_telemetry, telemetry_rows, write_telemetry
from .validate import CriterionResult, run_acceptance

__version__ = "0.1.0"

__all__ = [
    "ACTUATOR_LIMIT",
    "CareSolution",
    "ConfigError",
    "ControlOutput",
    "ControllerConfig",
    "CriterionResult",
    "DivergenceError",
    "GainMatrix",
    "ITERATIONS",
    "LinearModel",
    "LqrWeights",
    "Measurement",
    "NoiseStd",
    "ParameterError",
    "PidGains",
    "PidState",
    "PipebotError",
    "PlantState",
    "REFERENCE_GAIN",
    "ReconcileReport",
    "RobotParams",
    "RunMetrics",
    "Scenario",
    "SynthesisError",
    "TractionTorques",
    "Trajectory",
    "analytic_jacobian",
    "care_residual",
    "compute_metrics",
    "control_law",
    "control_step",
    "design_model",
    "drag_force",
    "integrate_step",
    "iteration",
    "linearize",
    "lqr_cost",
    "lqr_gain",
    "numeric_jacobian",
    "observe",
    "pid_step",
    "plant_deriv",
    "read_telemetry",
    "reconcile",
    "reference_params",
    "reference_weights",
    "run_acceptance",
    "run_scenario",
    "solve_care",
    "synthesized_gain",
    "telemetry_rows",
    "velocity_from_wheel_speed",
    "wheel_speed_from_velocity",
    "write_telemetry",
]
