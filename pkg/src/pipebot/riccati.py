"""LQR synthesis: Riccati solver, gain computation, quadratic cost.

The continuous-time algebraic Riccati equation

    A'P + P A - P B R^{-1} B' P + Q = 0

is solved by Kleinman-Newton iteration: starting from any stabilizing gain,
each step solves a Lyapunov equation for the cost-to-go of the current gain
and re-derives the gain from it.  Convergence is monotone and quadratic,
and every iterate is stabilizing, so the method lands on the unique
stabilizing solution.  The initial gain comes from the Bass shifted-Lyapunov
construction, which needs no eigenstructure beyond a norm bound.

Only Lyapunov equations are delegated to scipy; the Riccati logic lives here.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_continuous_lyapunov

from .errors import ParameterError, SynthesisError
from .plant import TractionTorques

_SYM_TOL = 1e-9


def _check_symmetric(m: np.ndarray, name: str) -> np.ndarray:
    scale = max(1.0, float(np.abs(m).max()))
    if np.abs(m - m.T).max() > _SYM_TOL * scale:
        raise ParameterError(f"{name} must be symmetric")
    return 0.5 * (m + m.T)


@dataclass(frozen=True)
class LqrWeights:
    """State and input weighting matrices of the quadratic cost.

    ``q`` must be symmetric positive semidefinite, ``r`` symmetric positive
    definite; both are symmetrized and checked on construction.
    """

    q: np.ndarray
    r: np.ndarray

    def __post_init__(self):
        q = _check_symmetric(np.asarray(self.q, dtype=float), "Q")
        r = _check_symmetric(np.asarray(self.r, dtype=float), "R")
        if np.linalg.eigvalsh(q).min() < -_SYM_TOL * max(1.0, np.abs(q).max()):
            raise ParameterError("Q must be positive semidefinite")
        if np.linalg.eigvalsh(r).min() <= 0.0:
            raise ParameterError("R must be positive definite")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "r", r)

    @classmethod
    def from_diagonals(cls, q_diag, r_diag) -> "LqrWeights":
        return cls(np.diag(np.asarray(q_diag, dtype=float)),
                   np.diag(np.asarray(r_diag, dtype=float)))


@dataclass(frozen=True)
class CareSolution:
    """Stabilizing Riccati solution with its quality certificates."""

    p: np.ndarray
    residual_norm: float
    closed_loop_eigs: np.ndarray
    iterations: int = 0


@dataclass(frozen=True)
class GainMatrix:
    """State-feedback gain K for u = -K x_s  [N·m per rad, N·m per rad/s]."""

    k: np.ndarray

    def __post_init__(self):
        k = np.atleast_2d(np.asarray(self.k, dtype=float))
        if not np.all(np.isfinite(k)):
            raise ParameterError("gain matrix must be finite")
        object.__setattr__(self, "k", k)


def care_residual(a: np.ndarray, b: np.ndarray, w: LqrWeights,
                  p: np.ndarray) -> float:
    """Frobenius norm of A'P + PA - P B R^{-1} B' P + Q."""
    rinv_btp = np.linalg.solve(w.r, b.T @ p)
    res = a.T @ p + p @ a - p @ b @ rinv_btp + w.q
    return float(np.linalg.norm(res, "fro"))


def _bass_initial_gain(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """A stabilizing gain via the Bass shifted-Lyapunov construction.

    With beta exceeding the spectral abscissa of A, the solution Z of
    (A + beta I) Z + Z (A + beta I)' = 2 B B' is PSD, and positive definite
    exactly when (A, B) is controllable; K0 = B' Z^{-1} then renders
    A - B K0 Hurwitz (Z itself is the Lyapunov certificate).
    """
    n = a.shape[0]
    beta = float(np.linalg.norm(a, "fro")) + 0.5
    try:
        z = solve_continuous_lyapunov(a + beta * np.eye(n), 2.0 * b @ b.T)
        k0 = np.linalg.solve(z.T, b).T  # B' Z^{-1} without forming the inverse
    except np.linalg.LinAlgError as exc:
        raise SynthesisError(
            "stabilizing initialization failed; the pair (A, B) appears "
            "uncontrollable"
        ) from exc
    return k0


def solve_care(a: np.ndarray, b: np.ndarray, w: LqrWeights, *,
               tol: float = 1e-8, max_iter: int = 100) -> CareSolution:
    """Stabilizing solution of the continuous-time algebraic Riccati equation.

    Parameters
    ----------
    a : numpy.ndarray, shape (n, n)
    b : numpy.ndarray, shape (n, m)
    w : LqrWeights
    tol : float
        Relative residual target: iteration stops once the Frobenius
        residual is <= tol * (1 + ||P||_F).
    max_iter : int
        Newton iteration cap.

    Returns
    -------
    CareSolution

    Raises
    ------
    SynthesisError
        If no stabilizing initial gain exists (non-stabilizable pair) or the
        iteration fails to meet the residual target within ``max_iter``.

    Notes
    -----
    A zero Q is degenerate: the zero solution satisfies the equation with
    zero gain, but nothing is stabilized.  That case returns P = 0 with a
    warning instead of failing, so callers can surface it.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    n = a.shape[0]
    if a.shape != (n, n) or b.shape[0] != n:
        raise ParameterError(f"incompatible shapes A{a.shape}, B{b.shape}")
    if max_iter < 1:
        raise ParameterError("max_iter must be at least 1")

    if not np.any(w.q):
        warnings.warn(
            "Q = 0 admits the zero Riccati solution: gain is zero and the "
            "closed loop is left unregulated",
            stacklevel=2,
        )
        p = np.zeros_like(a)
        return CareSolution(p, care_residual(a, b, w, p), np.linalg.eigvals(a), 0)

    # start from a stabilizing gain (zero works when A is already Hurwitz)
    if np.max(np.linalg.eigvals(a).real) < 0.0:
        k = np.zeros((b.shape[1], n))
    else:
        k = _bass_initial_gain(a, b)
        if np.max(np.linalg.eigvals(a - b @ k).real) >= 0.0:
            raise SynthesisError(
                "no stabilizing initial gain found; the pair (A, B) is not "
                "stabilizable"
            )

    p = np.zeros_like(a)
    for it in range(1, max_iter + 1):
        a_cl = a - b @ k
        rhs = -(w.q + k.T @ w.r @ k)
        p = solve_continuous_lyapunov(a_cl.T, rhs)
        p = 0.5 * (p + p.T)
        k = np.linalg.solve(w.r, b.T @ p)
        res = care_residual(a, b, w, p)
        if res <= tol * (1.0 + np.linalg.norm(p, "fro")):
            eigs = np.linalg.eigvals(a - b @ k)
            if np.max(eigs.real) >= 0.0:
                raise SynthesisError("converged solution is not stabilizing")
            pmin = float(np.linalg.eigvalsh(p).min())
            if pmin < -1e-9 * max(1.0, float(np.linalg.norm(p))):
                raise SynthesisError("converged solution is not PSD")
            return CareSolution(p, res, eigs, it)

    raise SynthesisError(
        f"Riccati iteration did not converge within {max_iter} steps "
        f"(residual {res:.3e})"
    )


def lqr_gain(sol: CareSolution, b: np.ndarray, r: np.ndarray) -> GainMatrix:
    """K = R^{-1} B' P from a Riccati solution.

    Raises
    ------
    SynthesisError
        If R is singular.
    """
    b = np.asarray(b, dtype=float)
    r = np.asarray(r, dtype=float)
    try:
        k = np.linalg.solve(r, b.T @ sol.p)
    except np.linalg.LinAlgError as exc:
        raise SynthesisError("input weight matrix R is singular") from exc
    return GainMatrix(k)


def control_law(gain: GainMatrix, x_s) -> TractionTorques:
    """State feedback u = -K x_s as wheel torques."""
    u = -gain.k @ np.asarray(x_s, dtype=float)
    if not np.all(np.isfinite(u)):
        raise ParameterError("control law produced non-finite torques")
    return TractionTorques(float(u[0]), float(u[1]), float(u[2]))


def lqr_cost(traj, w: LqrWeights) -> float:
    """Trapezoidal approximation of the quadratic cost along a trajectory.

    ``traj`` must expose ``t`` (shape (n,)), ``stabilizing`` (shape (n, 4))
    and ``torques`` (shape (n, 3)) sampled on a uniform grid; the simulator's
    trajectory type does.

    Raises
    ------
    ParameterError
        If the trajectory has fewer than two samples.
    """
    t = np.asarray(traj.t, dtype=float)
    xs = np.asarray(traj.stabilizing, dtype=float)
    u = np.asarray(traj.torques, dtype=float)
    if t.size < 2:
        raise ParameterError("lqr_cost needs at least two trajectory samples")
    integrand = (np.einsum("ij,jk,ik->i", xs, w.q, xs)
                 + np.einsum("ij,jk,ik->i", u, w.r, u))
    dt = np.diff(t)
    return float(0.5 * np.sum((integrand[1:] + integrand[:-1]) * dt))
