"""Gradient-induced couplings of an ion chain in an axial magnetic-field gradient.

A position-dependent Zeeman shift tilts each ion's qubit splitting at rate
d(omega_j)/dz = (mu1 - mu0) mu_B B'(z_j) / hbar. Through the shared
vibrational modes this produces

  * the dimensionless mode-ion couplings
        eps[j, n] = S[j, n] * grad_n * dz_j / nu_j,
  * an effective qubit-qubit Ising coupling
        J[n, l] = sum_j nu_j * eps[j, n] * eps[j, l],
  * per-ion carrier shifts Delta_j = (1/2) sum_n nu_n eps[n, j],
  * and effective Lamb-Dicke parameters eta'[n, j] that let microwave
    radiation drive motional sidebands despite a negligible bare eta.

Everything here is a pure function of the trap config, the chain solution
and the field profile. All angular frequencies are rad/s internally;
serialization converts to ordinary Hz.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .chain import ChainSolution
from .config import TrapConfig, UniformGradientField
from .constants import CONSTANTS

VALIDITY_THRESHOLD = 0.1

PHASE_AMBIGUITY_NOTE = (
    "per-ion drive phase is the small-eta approximation pi/2; the exact "
    "arctangent depends on the mode index and is reported per (mode, ion)"
)


class NonUniformGradientError(ValueError):
    """Closed-form estimate requested for a non-uniform field profile."""


@dataclass(frozen=True)
class CouplingReport:
    """All gradient-induced quantities for one chain configuration.

    Matrix index conventions: epsilon_matrix, eta_eff and phases_exact are
    [mode, ion]; j_matrix is [ion, ion] (symmetric, zero diagonal). The
    shifts and J entries depend on the mode-matrix sign convention recorded
    in sign_convention.
    """

    omega_gradients: np.ndarray    # rad/(s m) per ion
    epsilon_matrix: np.ndarray     # [mode, ion]
    j_matrix: np.ndarray           # rad/s, [ion, ion]
    shifts: np.ndarray             # Delta_j, rad/s per ion
    eta_bare: np.ndarray           # per mode
    eta_eff: np.ndarray            # [mode, ion]
    phases: np.ndarray             # rad per ion (pi/2 approximation)
    phases_exact: np.ndarray       # rad, [mode, ion]
    validity: float                # max |grad| dz_1 / nu_1
    qubit_frequencies: np.ndarray  # omega_n(z0_n), rad/s per ion
    sign_convention: str
    notes: tuple[str, ...] = ()

    @property
    def ion_count(self) -> int:
        return len(self.omega_gradients)

    @property
    def harmonic_approximation_valid(self) -> bool:
        return self.validity < VALIDITY_THRESHOLD

    def to_json_dict(self) -> dict:
        two_pi = 2.0 * math.pi
        return {
            "ion_count": self.ion_count,
            "qubit_frequency_gradients_hz_per_m": (self.omega_gradients / two_pi).tolist(),
            "epsilon_matrix": self.epsilon_matrix.tolist(),
            "j_matrix_hz": (self.j_matrix / two_pi).tolist(),
            "shifts_hz": (self.shifts / two_pi).tolist(),
            "eta_bare": self.eta_bare.tolist(),
            "eta_eff": self.eta_eff.tolist(),
            "phases_rad": self.phases.tolist(),
            "phases_exact_rad": self.phases_exact.tolist(),
            "qubit_frequencies_hz": (self.qubit_frequencies / two_pi).tolist(),
            "validity": {
                "epsilon": self.validity,
                "threshold": VALIDITY_THRESHOLD,
                "harmonic_approximation_valid": self.harmonic_approximation_valid,
            },
            "sign_convention": self.sign_convention,
            "notes": list(self.notes),
        }


def omega_gradients(config: TrapConfig, chain: ChainSolution) -> np.ndarray:
    """Zeeman frequency gradient of each ion's qubit at its rest position.

    d(omega_n)/dz = (mu1 - mu0) * mu_B * B'(z0_n) / hbar, in rad/(s m).
    Raises OutOfProfileRangeError if an ion sits outside a sampled profile.
    """
    moment = config.species.differential_moment * CONSTANTS.bohr_magneton
    grads = [config.field.gradient_at(z) for z in chain.positions_m]
    return moment * np.asarray(grads) / CONSTANTS.hbar


def qubit_frequencies(config: TrapConfig, chain: ChainSolution) -> np.ndarray:
    """Position-shifted qubit splittings omega_n = omega0 + dmu mu_B B(z0_n) / hbar."""
    moment = config.species.differential_moment * CONSTANTS.bohr_magneton
    fields = np.asarray([config.field.field_at(z) for z in chain.positions_m])
    return config.species.omega0 + moment * fields / CONSTANTS.hbar


def epsilon_matrix(grads: np.ndarray, chain: ChainSolution) -> np.ndarray:
    """Mode-ion coupling eps[j, n] = S[j, n] grad_n dz_j / nu_j."""
    per_mode = chain.ground_state_extents / chain.mode_frequencies
    return chain.mode_matrix * np.asarray(grads)[None, :] * per_mode[:, None]


def j_matrix(grads: np.ndarray, chain: ChainSolution) -> np.ndarray:
    """Pairwise qubit coupling J[n, l] = sum_j nu_j eps[j, n] eps[j, l], rad/s.

    Symmetric with zero diagonal (sigma_z^2 terms are constants and are
    dropped); invariant under sign flips of any mode row since each term
    carries two same-mode factors.
    """
    eps = epsilon_matrix(grads, chain)
    j = np.einsum("j,jn,jl->nl", chain.mode_frequencies, eps, eps)
    np.fill_diagonal(j, 0.0)
    return j


def j_matrix_bruteforce_oracle(grads: np.ndarray, chain: ChainSolution) -> np.ndarray:
    """Independent J computation by expanding the squared mode-displacement sum.

    Expands [sum_n grad_n S[j, n] sigma_z_n]^2 per mode j over sigma_z
    products with the mode prefactor hbar / (2 m nu_j^2) and collects the
    pairwise coefficients; sigma_z^2 diagonal terms are constants and are
    discarded. Exists purely as a check path for j_matrix.
    """
    grads = np.asarray(grads, dtype=float)
    n_ions = chain.ion_count
    j = np.zeros((n_ions, n_ions))
    for mode in range(n_ions):
        prefactor = CONSTANTS.hbar / (2.0 * chain.mass * chain.mode_frequencies[mode] ** 2)
        row = chain.mode_matrix[mode]
        for n in range(n_ions):
            for l in range(n_ions):
                if n == l:
                    continue  # sigma_z^2 = identity: constant energy offset
                j[n, l] += prefactor * grads[n] * grads[l] * row[n] * row[l]
    return j


def approx_j(config: TrapConfig, chain: ChainSolution) -> float:
    """Closed-form order-of-magnitude coupling for a uniform gradient, rad/s.

    J ~ (1 / 4 N m hbar) (dmu mu_B B')^2 (1 / nu1^2) sum_j lambda_j^-2,
    which assumes every mode amplitude is ~ N^(-1/2). Crude by design;
    exact values come from j_matrix.
    """
    if not isinstance(config.field, UniformGradientField):
        raise NonUniformGradientError(
            "closed-form J estimate requires a uniform field gradient"
        )
    moment = config.species.differential_moment * CONSTANTS.bohr_magneton
    n = config.ion_count
    lambda_sq = chain.mode_eigenvalues
    return (
        (moment * config.field.b) ** 2
        / (4.0 * n * config.mass * CONSTANTS.hbar * config.nu1**2)
        * float(np.sum(1.0 / lambda_sq))
    )


def validity_epsilon(config: TrapConfig, chain: ChainSolution) -> float:
    """Harmonic-approximation smallness parameter max_j |grad_j| dz_1 / nu_1.

    Compares the gradient-induced potential term over one ground-state
    extent with the mode quantum hbar*nu1; the derived Hamiltonian holds
    while this is well below unity.
    """
    grads = omega_gradients(config, chain)
    dz1 = math.sqrt(CONSTANTS.hbar / (2.0 * config.mass * config.nu1))
    return float(np.max(np.abs(grads)) * dz1 / config.nu1)


def effective_lamb_dicke(
    config: TrapConfig, chain: ChainSolution, grads: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Effective Lamb-Dicke parameters, drive phases and carrier shifts.

    eta'[n, j] = |eta_n S[n, j] + i eps[n, j]| combines the bare
    photon-recoil coupling with the gradient-induced one; for microwave
    drives the eps term dominates by orders of magnitude. Returns
    (eta_eff [mode, ion], phases per ion = pi/2 approximation,
    shifts Delta_j in rad/s). The exact per-(mode, ion) phase is
    pi/2 - atan2(eta_n S[n, j], eps[n, j]).
    """
    k = config.wavevector()
    eta_bare = chain.ground_state_extents * k
    eps = epsilon_matrix(grads, chain)
    bare_part = eta_bare[:, None] * chain.mode_matrix
    eta_eff = np.sqrt(bare_part**2 + eps**2)
    phases = np.full(chain.ion_count, 0.5 * math.pi)
    shifts = 0.5 * chain.mode_frequencies @ eps
    return eta_eff, phases, shifts


def exact_phases(config: TrapConfig, chain: ChainSolution, grads: np.ndarray) -> np.ndarray:
    """Per-(mode, ion) drive phase pi/2 - atan2(eta_n S[n, j], eps[n, j])."""
    k = config.wavevector()
    eta_bare = chain.ground_state_extents * k
    eps = epsilon_matrix(grads, chain)
    return 0.5 * math.pi - np.arctan2(eta_bare[:, None] * chain.mode_matrix, eps)


def build_report(config: TrapConfig, chain: ChainSolution) -> CouplingReport:
    """Assemble every gradient-induced quantity into one report."""
    grads = omega_gradients(config, chain)
    k = config.wavevector()
    eta_eff, phases, shifts = effective_lamb_dicke(config, chain, grads)
    return CouplingReport(
        omega_gradients=grads,
        epsilon_matrix=epsilon_matrix(grads, chain),
        j_matrix=j_matrix(grads, chain),
        shifts=shifts,
        eta_bare=chain.ground_state_extents * k,
        eta_eff=eta_eff,
        phases=phases,
        phases_exact=exact_phases(config, chain, grads),
        validity=validity_epsilon(config, chain),
        qubit_frequencies=qubit_frequencies(config, chain),
        sign_convention=chain.SIGN_CONVENTION,
        notes=(PHASE_AMBIGUITY_NOTE,),
    )


@dataclass(frozen=True)
class SpectralLine:
    frequency: float   # rad/s, absolute
    amplitude: float   # relative to the carrier
    label: str


def sideband_spectrum(
    config: TrapConfig, chain: ChainSolution, report: CouplingReport, ion: int
) -> list[SpectralLine]:
    """First-order stick spectrum of the drive response of one ion.

    Carrier of unit amplitude at omega_j(z0_j) + Delta_j; one red and one
    blue sideband per mode, displaced by -/+ nu_n with amplitude
    eta'[n, j] (motional ground state, first order). Sorted by frequency.
    Ion indices are 1-based.
    """
    if not 1 <= ion <= chain.ion_count:
        raise ValueError(f"ion index must be in [1, {chain.ion_count}], got {ion}")
    idx = ion - 1
    carrier = report.qubit_frequencies[idx] + report.shifts[idx]
    lines = [SpectralLine(float(carrier), 1.0, "carrier")]
    for mode in range(chain.ion_count):
        nu = chain.mode_frequencies[mode]
        amp = float(report.eta_eff[mode, idx])
        lines.append(SpectralLine(float(carrier - nu), amp, f"red_{mode + 1}"))
        lines.append(SpectralLine(float(carrier + nu), amp, f"blue_{mode + 1}"))
    lines.sort(key=lambda line: line.frequency)
    return lines
