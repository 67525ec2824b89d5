"""Equilibrium geometry and axial normal modes of a harmonically trapped ion chain.

Positions are solved in the dimensionless coordinates u = z / zeta, where
zeta = (e^2 / 4 pi eps0 m nu1^2)^(1/3) is the Coulomb length scale of the
trap. In these units the stationarity condition for ion m reads

    u_m - sum_{n<m} (u_m - u_n)^-2 + sum_{n>m} (u_m - u_n)^-2 = 0

and the Hessian of the potential is the dimensionless dynamical matrix A
whose eigenvalues lambda_j^2 give the mode frequencies nu_j = nu1 * lambda_j.
The two lowest modes are universal: the center-of-mass mode at lambda^2 = 1
and the breathing mode at lambda^2 = 3.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import TrapConfig
from .constants import CONSTANTS

_RESIDUAL_TOL = 1e-12
_JACOBI_OFF_TOL = 1e-13
_DEGENERACY_TOL = 1e-9


class SolverError(RuntimeError):
    """Base class for numerical failures in the chain solve."""


class NoConvergenceError(SolverError):
    def __init__(self, iterations: int, residual: float):
        super().__init__(
            f"equilibrium solve did not converge after {iterations} iterations "
            f"(residual {residual:.3e})"
        )
        self.iterations = iterations
        self.residual = residual


class DegeneratePositionsError(SolverError):
    def __init__(self, i: int, j: int, separation: float):
        super().__init__(f"ions {i + 1} and {j + 1} nearly coincide (|du| = {separation:.3e})")


class EigenNoConvergenceError(SolverError):
    def __init__(self, sweeps: int, off_norm: float):
        super().__init__(
            f"Jacobi diagonalization stalled after {sweeps} sweeps (off-diagonal norm {off_norm:.3e})"
        )


@dataclass(frozen=True)
class ChainSolution:
    """Equilibrium and normal-mode data for one chain.

    mode_matrix rows are modes, columns are ions: S[j, n] is the
    participation of ion n+1 in mode j+1. Rows are sign-fixed so the
    entry of largest magnitude is positive (ties broken toward the lowest
    ion index); quantities that are odd under eigenvector sign flips
    (e.g. the carrier shifts Delta_j downstream) inherit this convention.
    """

    length_scale: float                 # zeta, m
    positions: np.ndarray               # u, dimensionless, ascending, mean zero
    dynamical_matrix: np.ndarray        # A, dimensionless, symmetric
    mode_eigenvalues: np.ndarray        # lambda^2, ascending
    mode_matrix: np.ndarray             # S, orthogonal, rows = modes
    mode_frequencies: np.ndarray        # nu_j = nu1 * lambda_j, rad/s
    ground_state_extents: np.ndarray    # dz_j = sqrt(hbar / 2 m nu_j), m
    mass: float                         # kg
    nu1: float                          # rad/s
    warnings: tuple[str, ...] = ()

    SIGN_CONVENTION = "largest-magnitude mode entry positive, ties to lowest ion index"

    @property
    def ion_count(self) -> int:
        return len(self.positions)

    @property
    def positions_m(self) -> np.ndarray:
        return self.positions * self.length_scale

    def min_spacing_m(self) -> float:
        if self.ion_count < 2:
            return math.inf
        return float(np.min(np.diff(self.positions)) * self.length_scale)

    def to_json_dict(self) -> dict:
        return {
            "ion_count": self.ion_count,
            "length_scale_m": self.length_scale,
            "positions_dimensionless": self.positions.tolist(),
            "positions_m": self.positions_m.tolist(),
            "mode_eigenvalues": self.mode_eigenvalues.tolist(),
            "mode_frequencies_hz": (self.mode_frequencies / (2.0 * math.pi)).tolist(),
            "mode_matrix": self.mode_matrix.tolist(),
            "ground_state_extents_m": self.ground_state_extents.tolist(),
            "axial_frequency_hz": self.nu1 / (2.0 * math.pi),
            "mass_kg": self.mass,
            "sign_convention": self.SIGN_CONVENTION,
            "warnings": list(self.warnings),
        }


def length_scale(config: TrapConfig) -> float:
    """Coulomb length scale zeta = (e^2 / 4 pi eps0 m nu1^2)^(1/3) in meters."""
    c = CONSTANTS
    return (
        c.elementary_charge**2
        / (4.0 * math.pi * c.vacuum_permittivity * config.mass * config.nu1**2)
    ) ** (1.0 / 3.0)


def stationarity_residual(u: np.ndarray) -> np.ndarray:
    """Dimensionless force balance; zero at equilibrium."""
    u = np.asarray(u, dtype=float)
    d = u[:, None] - u[None, :]
    np.fill_diagonal(d, np.inf)
    return u - np.sum(np.sign(d) / d**2, axis=1)


def dynamical_matrix(u: np.ndarray) -> np.ndarray:
    """Hessian of the trap + Coulomb potential at positions u.

    A[n, n] = 1 + 2 sum_{p != n} |u_n - u_p|^-3 and
    A[n, l] = -2 |u_n - u_l|^-3 off the diagonal.
    """
    u = np.asarray(u, dtype=float)
    n = len(u)
    d = np.abs(u[:, None] - u[None, :])
    np.fill_diagonal(d, np.inf)
    if n > 1:
        i, j = np.unravel_index(np.argmin(d), d.shape)
        if d[i, j] < 1e-9:
            raise DegeneratePositionsError(min(i, j), max(i, j), float(d[i, j]))
    inv3 = d**-3
    a = -2.0 * inv3
    a[np.diag_indices(n)] = 1.0 + 2.0 * np.sum(inv3, axis=1)
    return a


def _initial_guess(n: int) -> np.ndarray:
    half_extent = 0.5 * (2.0 * n**-0.57) * n * 0.5
    return np.linspace(-half_extent, half_extent, n)


def solve_equilibrium(n: int, max_iter: int = 200) -> np.ndarray:
    """Equilibrium positions of n ions, dimensionless, ascending, mean zero.

    Damped Newton iteration on the stationarity system; the Jacobian is the
    dynamical matrix, which is strictly diagonally dominant and hence
    positive definite for any ordered configuration. A short scaled-descent
    fallback handles the (never observed for n <= 50) case of a rejected
    Newton step.
    """
    if not 1 <= n <= 50:
        raise ValueError(f"ion count must be in [1, 50], got {n}")
    if n == 1:
        return np.zeros(1)

    u = _initial_guess(n)
    residual = stationarity_residual(u)
    res_norm = float(np.max(np.abs(residual)))
    for iteration in range(max_iter):
        if res_norm < 0.5e-13:
            break
        step = np.linalg.solve(dynamical_matrix(u), residual)
        improved = False
        alpha = 1.0
        for _ in range(40):
            trial = u - alpha * step
            if np.all(np.diff(trial) > 0.0):
                trial_res = stationarity_residual(trial)
                trial_norm = float(np.max(np.abs(trial_res)))
                if trial_norm < res_norm:
                    u, residual, res_norm = trial, trial_res, trial_norm
                    improved = True
                    break
            alpha *= 0.5
        if not improved:
            # descend along the raw force with a conservative step
            scale = 1e-3 / max(1.0, res_norm)
            for _ in range(5):
                trial = u - scale * residual
                if np.all(np.diff(trial) > 0.0):
                    u = trial
                    residual = stationarity_residual(u)
                    res_norm = float(np.max(np.abs(residual)))
    else:
        if res_norm > _RESIDUAL_TOL:
            raise NoConvergenceError(max_iter, res_norm)

    u = u - u.mean()
    res_norm = float(np.max(np.abs(stationarity_residual(u))))
    if res_norm > _RESIDUAL_TOL:
        raise NoConvergenceError(max_iter, res_norm)
    return u


def _jacobi_rotate(a: np.ndarray, v: np.ndarray, p: int, q: int) -> None:
    """One Givens rotation zeroing a[p, q], accumulating the basis in v."""
    apq = a[p, q]
    if apq == 0.0:
        return
    theta = 0.5 * (a[q, q] - a[p, p]) / apq
    # smaller root of t^2 + 2 t theta - 1 = 0 for numerical stability
    t = math.copysign(1.0, theta) / (abs(theta) + math.hypot(1.0, theta))
    c = 1.0 / math.hypot(1.0, t)
    s = t * c

    app, aqq = a[p, p], a[q, q]
    a[p, p] = app - t * apq
    a[q, q] = aqq + t * apq
    a[p, q] = a[q, p] = 0.0

    rows = [i for i in range(a.shape[0]) if i != p and i != q]
    aip = a[rows, p].copy()
    aiq = a[rows, q].copy()
    a[rows, p] = a[p, rows] = c * aip - s * aiq
    a[rows, q] = a[q, rows] = s * aip + c * aiq

    vp = v[:, p].copy()
    vq = v[:, q].copy()
    v[:, p] = c * vp - s * vq
    v[:, q] = s * vp + c * vq


def _off_diagonal_norm(a: np.ndarray) -> float:
    off = a - np.diag(np.diag(a))
    return float(np.linalg.norm(off))


def normal_modes(a: np.ndarray, max_sweeps: int = 100) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and sign-fixed mode matrix of a symmetric matrix.

    Cyclic Jacobi rotations; terminates when the off-diagonal Frobenius
    norm drops below 1e-13, which small chain matrices always reach.
    Returns (lambda^2 vector, S) with rows of S the eigenvectors.
    """
    a = np.array(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("dynamical matrix must be square")
    if not np.allclose(a, a.T, atol=1e-12, rtol=0.0):
        raise ValueError("dynamical matrix must be symmetric")
    n = a.shape[0]
    v = np.eye(n)

    off = _off_diagonal_norm(a)
    sweeps = 0
    while off > _JACOBI_OFF_TOL:
        if sweeps >= max_sweeps:
            raise EigenNoConvergenceError(sweeps, off)
        for p in range(n - 1):
            for q in range(p + 1, n):
                _jacobi_rotate(a, v, p, q)
        sweeps += 1
        off = _off_diagonal_norm(a)

    eigenvalues = np.diag(a).copy()
    order = np.argsort(eigenvalues, kind="stable")
    eigenvalues = eigenvalues[order]
    s = v.T[order]

    # sign convention: largest-magnitude entry of each mode row positive
    for row in s:
        pivot = int(np.argmax(np.abs(row)))
        if row[pivot] < 0.0:
            row *= -1.0
    return eigenvalues, s


def solve_chain(config: TrapConfig) -> ChainSolution:
    """Full chain pipeline: equilibrium, dynamical matrix, normal modes."""
    u = solve_equilibrium(config.ion_count)
    a = dynamical_matrix(u)
    eigenvalues, s = normal_modes(a)

    warnings = []
    gaps = np.diff(eigenvalues)
    for j, gap in enumerate(gaps):
        if abs(gap) < _DEGENERACY_TOL:
            warnings.append(
                f"modes {j + 1} and {j + 2} nearly degenerate "
                f"(lambda^2 gap {gap:.3e}); ordering kept from diagonalization"
            )

    zeta = length_scale(config)
    nu = config.nu1 * np.sqrt(eigenvalues)
    extents = np.sqrt(CONSTANTS.hbar / (2.0 * config.mass * nu))
    return ChainSolution(
        length_scale=zeta,
        positions=u,
        dynamical_matrix=a,
        mode_eigenvalues=eigenvalues,
        mode_matrix=s,
        mode_frequencies=nu,
        ground_state_extents=extents,
        mass=config.mass,
        nu1=config.nu1,
        warnings=tuple(warnings),
    )
