"""Run-configuration files: TOML schema, defaults, presets, builders.

A run config has four sections — ``[robot]``, ``[controller]``,
``[scenario]``, ``[output]`` — plus an optional ``[sweep]`` section holding
axis lists for batch runs.  Every key has a documented default, so an empty
file (or none at all) is valid; unknown sections or keys are hard errors so
typos cannot silently fall back to defaults.

Precedence, lowest to highest: built-in defaults, ``--preset`` overlay,
config file, command-line flags.  All values are SI except initial attitude
angles, which are given in degrees.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

try:
    import tomllib
except ModuleNotFoundError:  # pragma: no cover - Python < 3.11
    import tomli as tomllib

from .controller import ControllerConfig, NoiseStd
from .errors import ConfigError
from .pid import PidGains
from .plant import RobotParams
from .presets import ITERATIONS, synthesized_gain
from .riccati import LqrWeights
from .sim import Scenario

DEFAULTS: dict = {
    "robot": {
        "arm_length": 0.17,
        "mass": 2.23,
        "inertia_y": 0.0126,
        "inertia_z": 0.0093,
        "wheel_radius": 0.05,
        "pipe_diameter": 0.4,
        "drag_coeff": 0.47,
        "frontal_area": 0.05,
        "water_density": 1000.0,
        "flow_velocity": 0.0,
        "theta1": math.pi / 4,
        "theta2": math.pi / 4,
        "theta3": math.pi / 4,
        "drag_mode": "signed",
    },
    "controller": {
        "q_diag": [200.0, 10.0, 200.0, 10.0],
        "r_diag": [1.0, 1.0, 1.0],
        "model_variant": "gain-consistent",
        "k_p": 8.7313,
        "k_i": 322.416,
        "k_d": 0.0072,
        "derivative_filter_coeff": 0.1,
        "integral_limit": 100.0,
        "desired_velocity": 0.0,
        "torque_limit": None,
        "noise_encoder_std": 0.0,
        "noise_angle_std": 0.0,
        "noise_rate_std": 0.0,
        "seed": 0,
    },
    "scenario": {
        "phi0_deg": 0.0,
        "psi0_deg": 0.0,
        "phi_rate0": 0.0,
        "psi_rate0": 0.0,
        "v0": 0.0,
        "duration": 2.0,
        "dt": 1e-4,
    },
    "output": {
        "csv": "run.csv",
        "directory": "sweep",
        "figures": True,
    },
}

# key -> value kind, used for type checking and int->float coercion
_SCHEMA: dict[str, dict[str, str]] = {
    "robot": {
        "arm_length": "float", "mass": "float", "inertia_y": "float",
        "inertia_z": "float", "wheel_radius": "float",
        "pipe_diameter": "float", "drag_coeff": "float",
        "frontal_area": "float", "water_density": "float",
        "flow_velocity": "float", "theta1": "float", "theta2": "float",
        "theta3": "float", "drag_mode": "str",
    },
    "controller": {
        "q_diag": "float_list", "r_diag": "float_list",
        "model_variant": "str", "k_p": "float", "k_i": "float",
        "k_d": "float", "derivative_filter_coeff": "float",
        "integral_limit": "float", "desired_velocity": "float",
        "torque_limit": "float", "noise_encoder_std": "float",
        "noise_angle_std": "float", "noise_rate_std": "float", "seed": "int",
    },
    "scenario": {
        "phi0_deg": "float", "psi0_deg": "float", "phi_rate0": "float",
        "psi_rate0": "float", "v0": "float", "duration": "float",
        "dt": "float",
    },
    "output": {"csv": "str", "directory": "str", "figures": "bool"},
    "sweep": {
        "phi0_deg": "float_list", "psi0_deg": "float_list",
        "desired_velocity": "float_list", "pipe_diameter": "float_list",
        "flow_velocity": "float_list",
    },
}

PRESET_NAMES = tuple(f"paper-iter{n}" for n in sorted(ITERATIONS))


@dataclass(frozen=True)
class OutputOptions:
    """Where the telemetry goes and whether report figures are rendered."""

    csv: str
    directory: str
    figures: bool


def _coerce(section: str, key: str, value, kind: str):
    if kind == "float":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"key '{key}' in [{section}] must be a number")
        return float(value)
    if kind == "int":
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"key '{key}' in [{section}] must be an integer")
        return value
    if kind == "str":
        if not isinstance(value, str):
            raise ConfigError(f"key '{key}' in [{section}] must be a string")
        return value
    if kind == "bool":
        if not isinstance(value, bool):
            raise ConfigError(f"key '{key}' in [{section}] must be a boolean")
        return value
    if kind == "float_list":
        if (not isinstance(value, list) or not value
                or any(isinstance(v, bool) or not isinstance(v, (int, float))
                       for v in value)):
            raise ConfigError(
                f"key '{key}' in [{section}] must be a non-empty list of numbers"
            )
        return [float(v) for v in value]
    raise AssertionError(f"unhandled kind {kind}")


def validate_tree(tree: dict) -> dict:
    """Check sections and keys against the schema; returns a coerced copy.

    Raises
    ------
    ConfigError
        On any unknown section or key, or a value of the wrong type.
    """
    out: dict = {}
    for section, mapping in tree.items():
        if section not in _SCHEMA:
            known = ", ".join(sorted(_SCHEMA))
            raise ConfigError(f"unknown section [{section}] (known: {known})")
        if not isinstance(mapping, dict):
            raise ConfigError(f"[{section}] must be a table of key = value pairs")
        out[section] = {}
        for key, value in mapping.items():
            kind = _SCHEMA[section].get(key)
            if kind is None:
                known = ", ".join(sorted(_SCHEMA[section]))
                raise ConfigError(
                    f"unknown key '{key}' in section [{section}] (known: {known})"
                )
            out[section][key] = _coerce(section, key, value, kind)
    return out


def load_config_file(path: str) -> dict:
    """Parse and validate a TOML config file."""
    try:
        with open(path, "rb") as fh:
            tree = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        # tomllib reports line/column in the message
        raise ConfigError(f"invalid TOML in {path}: {exc}") from exc
    return validate_tree(tree)


def preset_overlay(name: str) -> dict:
    """The config fragment a ``--preset`` flag expands to."""
    for n, (v_d, phi0, psi0) in ITERATIONS.items():
        if name == f"paper-iter{n}":
            return {
                "controller": {"desired_velocity": v_d},
                "scenario": {"phi0_deg": phi0, "psi0_deg": psi0},
            }
    raise ConfigError(
        f"unknown preset {name!r}; available: {', '.join(PRESET_NAMES)}"
    )


def merge(base: dict, *overlays: dict) -> dict:
    """Overlay section dicts left to right (later wins, per key)."""
    out = {sec: dict(vals) for sec, vals in base.items()}
    for overlay in overlays:
        for sec, vals in overlay.items():
            out.setdefault(sec, {}).update(vals)
    return out


def resolve(config_path: str | None = None, preset: str | None = None,
            flag_overrides: dict | None = None) -> dict:
    """Produce the effective config: defaults < preset < file < flags."""
    layers = []
    if preset is not None:
        layers.append(preset_overlay(preset))
    if config_path is not None:
        layers.append(load_config_file(config_path))
    if flag_overrides:
        layers.append(validate_tree(flag_overrides))
    return merge(DEFAULTS, *layers)


def build_params(cfg: dict) -> RobotParams:
    return RobotParams(**cfg["robot"])


def build_weights(cfg: dict) -> LqrWeights:
    c = cfg["controller"]
    if len(c["q_diag"]) != 4:
        raise ConfigError("q_diag must have exactly 4 entries")
    if len(c["r_diag"]) != 3:
        raise ConfigError("r_diag must have exactly 3 entries")
    return LqrWeights.from_diagonals(c["q_diag"], c["r_diag"])


def build_controller(cfg: dict, params: RobotParams) -> ControllerConfig:
    c = cfg["controller"]
    gain = synthesized_gain(params, c["model_variant"], build_weights(cfg))
    return ControllerConfig(
        gain=gain,
        pid_gains=PidGains(
            k_p=c["k_p"], k_i=c["k_i"], k_d=c["k_d"],
            derivative_filter_coeff=c["derivative_filter_coeff"],
            integral_limit=c["integral_limit"],
        ),
        desired_velocity=c["desired_velocity"],
        wheel_radius=params.wheel_radius,
        torque_limit=c["torque_limit"],
        noise_std=NoiseStd(
            encoder=c["noise_encoder_std"],
            angle=c["noise_angle_std"],
            rate=c["noise_rate_std"],
        ),
        rng_seed=c["seed"],
    )


def build_scenario(cfg: dict) -> Scenario:
    params = build_params(cfg)
    s = cfg["scenario"]
    return Scenario(
        params=params,
        controller=build_controller(cfg, params),
        phi0_deg=s["phi0_deg"],
        psi0_deg=s["psi0_deg"],
        phi_rate0=s["phi_rate0"],
        psi_rate0=s["psi_rate0"],
        v0=s["v0"],
        duration=s["duration"],
        dt=s["dt"],
    )


def output_options(cfg: dict) -> OutputOptions:
    o = cfg["output"]
    return OutputOptions(csv=o["csv"], directory=o["directory"],
                         figures=o["figures"])


def sweep_axes(cfg: dict) -> dict[str, list[float]]:
    """The sweep axis lists; error when the section is missing or empty."""
    axes = cfg.get("sweep", {})
    if not axes:
        raise ConfigError(
            "sweep requires a [sweep] section with at least one axis "
            "(phi0_deg, psi0_deg, desired_velocity, pipe_diameter, flow_velocity)"
        )
    return axes
