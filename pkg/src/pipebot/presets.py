"""Reference robot configuration and benchmark scenarios.

The constants here describe the reference build of the robot (geometry,
inertia, hydrodynamics) and the controller weights used throughout the
docs and the acceptance suite.  ``REFERENCE_GAIN`` is the published gain
matrix for that configuration; the synthesis reproduces it from scratch
with the ``gain-consistent`` input-matrix variant at pipe diameter 0.4 m.

Three benchmark scenarios exercise the closed loop at increasing speed and
initial attitude error; ``iteration(n)`` returns them ready to run.
"""

from __future__ import annotations

import numpy as np

from .controller import ControllerConfig, NoiseStd
from .errors import ParameterError
from .linmodel import design_model
from .pid import PidGains
from .plant import RobotParams
from .riccati import GainMatrix, LqrWeights, lqr_gain, solve_care
from .sim import Scenario

#: Published state-feedback gain for the reference configuration
#: (rows: wheels 1..3; columns: phi, phi_rate, psi, psi_rate).
REFERENCE_GAIN = np.array([
    [0.0, 0.0, -11.5470, -2.5889],
    [-10.0, -2.2442, 5.7735, 1.2945],
    [10.0, 2.2442, 5.7735, 1.2945],
])

#: Benchmark scenarios: n -> (desired velocity m/s, phi0 deg, psi0 deg).
ITERATIONS = {
    1: (0.1, -10.0, 10.0),
    2: (0.3, 20.0, 20.0),
    3: (0.5, -23.0, -25.0),
}

#: Actuator torque rating used by the optional saturation preset [N·m].
ACTUATOR_LIMIT = 12.0


def reference_params() -> RobotParams:
    """The reference robot; identical to the RobotParams defaults."""
    return RobotParams()


def reference_weights() -> LqrWeights:
    """Q = diag(200, 10, 200, 10), R = I3."""
    return LqrWeights.from_diagonals([200.0, 10.0, 200.0, 10.0],
                                     [1.0, 1.0, 1.0])


def synthesized_gain(params: RobotParams | None = None,
                     variant: str = "gain-consistent",
                     weights: LqrWeights | None = None) -> GainMatrix:
    """Solve the Riccati equation for the given configuration and return K."""
    params = params or reference_params()
    weights = weights or reference_weights()
    model = design_model(params, variant)
    sol = solve_care(model.a, model.b, weights)
    return lqr_gain(sol, model.b, weights.r)


def iteration(n: int, *, torque_limit: float | None = None,
              noise: NoiseStd | None = None, rng_seed: int = 0,
              duration: float = 2.0, dt: float = 1e-4) -> Scenario:
    """Benchmark scenario ``n`` in {1, 2, 3}.

    The gain is synthesized fresh from the reference configuration, so the
    scenario exercises the full pipeline rather than hard-coded numbers.
    """
    if n not in ITERATIONS:
        raise ParameterError(f"iteration must be 1, 2 or 3, got {n!r}")
    v_d, phi0, psi0 = ITERATIONS[n]
    params = reference_params()
    cfg = ControllerConfig(
        gain=synthesized_gain(params),
        pid_gains=PidGains(),
        desired_velocity=v_d,
        wheel_radius=params.wheel_radius,
        torque_limit=torque_limit,
        noise_std=noise or NoiseStd(),
        rng_seed=rng_seed,
    )
    return Scenario(params=params, controller=cfg, phi0_deg=phi0,
                    psi0_deg=psi0, duration=duration, dt=dt)
