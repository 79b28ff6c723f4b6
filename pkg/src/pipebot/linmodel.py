"""Linearized attitude models and their cross-checks.

Two routes to a 4-state linear model of the attitude subsystem:

* :func:`design_model` builds the closed-form design matrices used for gain
  synthesis, parameterized by pipe diameter.  Two published variants of the
  yaw input row exist in the wild (they differ by a sqrt(3) factor on the
  wheel-2/3 columns); both are kept as first-class options because only the
  ``gain-consistent`` one reproduces the reference gain matrix.
* :func:`linearize` differentiates the implemented nonlinear plant
  numerically at an operating point.

:func:`reconcile` compares any two models structurally.  Note the design
matrices use D-proportional lever arms while the plant Jacobian uses the
physical arm length, so their magnitudes genuinely differ; reconciliation
asserts sparsity and sign only and reports magnitude ratios for inspection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError
from .plant import PlantState, RobotParams, TractionTorques, numeric_jacobian

VARIANTS = ("sqrt3", "gain-consistent")


@dataclass(frozen=True)
class LinearModel:
    """State-space pair (A, B) for x_s = [phi, phi_rate, psi, psi_rate]."""

    a: np.ndarray
    b: np.ndarray
    provenance: str = "numeric"

    def controllability_matrix(self) -> np.ndarray:
        """[B, AB, A^2 B, A^3 B], shape (4, 12)."""
        blocks = []
        m = self.b
        for _ in range(4):
            blocks.append(m)
            m = self.a @ m
        return np.hstack(blocks)

    def is_controllable(self, tol: float | None = None) -> bool:
        return np.linalg.matrix_rank(self.controllability_matrix(), tol=tol) == 4


def design_model(params: RobotParams, variant: str = "gain-consistent") -> LinearModel:
    """Closed-form design matrices for the attitude subsystem.

    A is two double-integrator blocks.  B couples the three wheel torques
    into the pitch and yaw accelerations through lever arms proportional to
    the pipe diameter D:

    * pitch row: [0, -sqrt(3) D / (4 I_yy R), +sqrt(3) D / (4 I_yy R)]
    * yaw row, ``sqrt3`` variant: [-D/(2 I_zz R), +sqrt(3) D/(4 I_zz R), +sqrt(3) D/(4 I_zz R)]
    * yaw row, ``gain-consistent`` variant: [-D/(2 I_zz R), +D/(4 I_zz R), +D/(4 I_zz R)]

    Parameters
    ----------
    params : RobotParams
        Supplies D = ``pipe_diameter``, R = ``wheel_radius`` and the inertias.
    variant : str
        One of ``"sqrt3"`` or ``"gain-consistent"``.

    Returns
    -------
    LinearModel
    """
    if variant not in VARIANTS:
        raise ParameterError(f"variant must be one of {VARIANTS}, got {variant!r}")
    d = params.pipe_diameter
    r = params.wheel_radius
    i_yy, i_zz = params.inertia_y, params.inertia_z

    a = np.zeros((4, 4))
    a[0, 1] = 1.0
    a[2, 3] = 1.0

    b_y = math.sqrt(3.0) * d / (4.0 * i_yy * r)
    b_z1 = d / (2.0 * i_zz * r)
    if variant == "sqrt3":
        b_z23 = math.sqrt(3.0) * d / (4.0 * i_zz * r)
    else:
        b_z23 = d / (4.0 * i_zz * r)

    b = np.zeros((4, 3))
    b[1, 1] = -b_y
    b[1, 2] = b_y
    b[3, 0] = -b_z1
    b[3, 1] = b_z23
    b[3, 2] = b_z23
    return LinearModel(a, b, provenance=f"design-{variant}")


def linearize(params: RobotParams, s0: PlantState | None = None,
              u0: TractionTorques | None = None, h: float = 1e-6) -> LinearModel:
    """Numeric linearization of the implemented plant at (s0, u0).

    Defaults to the coasting equilibrium (zero attitude, zero torque).
    """
    s0 = s0 if s0 is not None else PlantState(v=params.flow_velocity)
    u0 = u0 if u0 is not None else TractionTorques()
    a, b = numeric_jacobian(params, s0, u0, h)
    return LinearModel(a, b, provenance="numeric")


def _sign_pattern(m: np.ndarray, tol: float) -> np.ndarray:
    scale = np.abs(m).max()
    if scale == 0.0:
        return np.zeros_like(m, dtype=int)
    out = np.sign(m).astype(int)
    out[np.abs(m) <= tol * scale] = 0
    return out


@dataclass(frozen=True)
class ReconcileReport:
    """Structural comparison of two linear models.

    ``sparsity_match`` and ``sign_match`` are the hard requirements;
    ``b_ratios`` holds |B_left| / |B_right| where both entries are nonzero
    (NaN elsewhere) and is informational only.
    """

    sparsity_match: bool
    sign_match: bool
    a_ratios: np.ndarray = field(repr=False)
    b_ratios: np.ndarray = field(repr=False)
    left: str = ""
    right: str = ""

    def summary(self) -> str:
        lines = [
            f"reconcile {self.left or 'left'} vs {self.right or 'right'}:",
            f"  sparsity match: {'yes' if self.sparsity_match else 'NO'}",
            f"  sign match:     {'yes' if self.sign_match else 'NO'}",
            "  |B| ratios (left/right, NaN where either side is zero):",
        ]
        for row in self.b_ratios:
            lines.append("    " + "  ".join(f"{v:10.4g}" for v in row))
        return "\n".join(lines)


def reconcile(lin_left: LinearModel, lin_right: LinearModel,
              tol: float = 1e-9) -> ReconcileReport:
    """Compare two linear models structurally.

    Entries are classified zero/positive/negative with threshold
    ``tol * max|matrix|``.  Sparsity match means identical zero patterns in
    both A and B; sign match additionally requires equal signs on the
    shared nonzero entries.  Magnitude ratios are reported, never asserted.
    """
    for m in (lin_left, lin_right):
        if not (np.all(np.isfinite(m.a)) and np.all(np.isfinite(m.b))):
            raise ParameterError("reconcile requires finite models")

    sa_l, sa_r = _sign_pattern(lin_left.a, tol), _sign_pattern(lin_right.a, tol)
    sb_l, sb_r = _sign_pattern(lin_left.b, tol), _sign_pattern(lin_right.b, tol)
    sparsity = bool(np.array_equal(sa_l != 0, sa_r != 0)
                    and np.array_equal(sb_l != 0, sb_r != 0))
    sign = bool(np.array_equal(sa_l, sa_r) and np.array_equal(sb_l, sb_r))

    def ratios(ml, mr, pl, pr):
        out = np.full(ml.shape, np.nan)
        both = (pl != 0) & (pr != 0)
        out[both] = np.abs(ml[both]) / np.abs(mr[both])
        return out

    return ReconcileReport(
        sparsity_match=sparsity,
        sign_match=sign,
        a_ratios=ratios(lin_left.a, lin_right.a, sa_l, sa_r),
        b_ratios=ratios(lin_left.b, lin_right.b, sb_l, sb_r),
        left=lin_left.provenance,
        right=lin_right.provenance,
    )
