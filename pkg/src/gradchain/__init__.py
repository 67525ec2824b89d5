"""Simulator for ion chains in a static axial magnetic-field gradient.

Pipeline: a validated TrapConfig feeds the chain solver (equilibrium
positions and normal modes), whose output feeds the coupling report
(gradient-induced J matrix, carrier shifts, effective Lamb-Dicke
parameters); the report parameterizes exact spin dynamics driven either
directly or through the pulse-program DSL.
"""

from .chain import ChainSolution, dynamical_matrix, length_scale, normal_modes, solve_chain, solve_equilibrium
from .config import TrapConfig, load_config, validate_config
from .constants import CONSTANTS, SPECIES_REGISTRY, PhysicalConstants, Species
from .coupling import (
    CouplingReport,
    approx_j,
    build_report,
    effective_lamb_dicke,
    epsilon_matrix,
    j_matrix,
    j_matrix_bruteforce_oracle,
    omega_gradients,
    qubit_frequencies,
    sideband_spectrum,
    validity_epsilon,
)
from .pulse import PulseProgram, RunRecord, interpret, parse, pretty_print
from .spins import (
    PulseSpec,
    SpinHamiltonian,
    SpinState,
    apply_hard_pulse,
    apply_pulse,
    evolve_oracle,
    expectation,
    free_evolution,
    initialize,
    sample_measurement,
)
from .units import format_quantity, parse_quantity

__version__ = "0.1.0"

__all__ = [
    "CONSTANTS",
    "ChainSolution",
    "CouplingReport",
    "PhysicalConstants",
    "PulseProgram",
    "PulseSpec",
    "RunRecord",
    "SPECIES_REGISTRY",
    "Species",
    "SpinHamiltonian",
    "SpinState",
    "TrapConfig",
    "approx_j",
    "apply_hard_pulse",
    "apply_pulse",
    "build_report",
    "dynamical_matrix",
    "effective_lamb_dicke",
    "epsilon_matrix",
    "evolve_oracle",
    "expectation",
    "format_quantity",
    "free_evolution",
    "initialize",
    "interpret",
    "j_matrix",
    "j_matrix_bruteforce_oracle",
    "length_scale",
    "load_config",
    "normal_modes",
    "omega_gradients",
    "parse",
    "parse_quantity",
    "pretty_print",
    "qubit_frequencies",
    "sample_measurement",
    "sideband_spectrum",
    "solve_chain",
    "solve_equilibrium",
    "validate_config",
    "validity_epsilon",
]
