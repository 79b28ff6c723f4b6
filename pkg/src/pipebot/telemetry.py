"""Telemetry CSV format: fixed header, fixed units, deterministic bytes.

Format v1: one comment line naming the format version, one header row, then
one row per integration sample.  Angles are logged in degrees and rates in
deg/s (plot-friendly); torques in N·mm; everything else SI.  Values are
written with 10 significant digits via ``%.10g``, and the line terminator
is always ``\\n``, so identical runs serialize to identical bytes on every
platform.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import ParameterError

FORMAT_LINE = "# pipebot telemetry v1"
HEADER = ("t,x,v,phi_deg,phi_rate,psi_deg,psi_rate,"
          "tau1_nmm,tau2_nmm,tau3_nmm,tau_lqr1_nmm,tau_lqr2_nmm,tau_lqr3_nmm")

_DEG = 180.0 / math.pi


def telemetry_rows(traj) -> np.ndarray:
    """The (n, 13) matrix of output-unit values backing the CSV."""
    s = traj.states
    out = np.empty((traj.t.size, 13))
    out[:, 0] = traj.t
    out[:, 1] = s[:, 0]
    out[:, 2] = s[:, 1]
    out[:, 3] = s[:, 2] * _DEG
    out[:, 4] = s[:, 3] * _DEG
    out[:, 5] = s[:, 4] * _DEG
    out[:, 6] = s[:, 5] * _DEG
    out[:, 7:10] = traj.torques * 1e3
    out[:, 10:13] = traj.lqr_torques * 1e3
    return out


def write_telemetry(path: str, traj) -> str:
    """Write one CSV per the v1 format; returns the path."""
    rows = telemetry_rows(traj)
    lines = [FORMAT_LINE, HEADER]
    for row in rows:
        lines.append(",".join(format(v, ".10g") for v in row))
    lines.append("")
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines))
    return path


def read_telemetry(path: str) -> dict[str, np.ndarray]:
    """Parse a v1 telemetry file back into named columns."""
    with open(path, "r", newline="") as fh:
        first = fh.readline().strip()
        if first != FORMAT_LINE:
            raise ParameterError(
                f"{path} is not a v1 telemetry file (first line {first!r})"
            )
        header = fh.readline().strip()
        if header != HEADER:
            raise ParameterError(f"{path} has an unexpected header")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    names = HEADER.split(",")
    if data.shape[1] != len(names):
        raise ParameterError(f"{path}: expected {len(names)} columns")
    return {name: data[:, i] for i, name in enumerate(names)}
