"""Exact state-vector dynamics of the qubit register under Ising coupling and RWA drives.

Basis convention: basis index b has qubit n in state |1> iff bit (n-1) of
b is set, and sigma_z eigenvalues are s_n = +1 for |1>, -1 for |0>. Labels
list qubit 1 first, so initialize(2, "10") puts qubit 1 in |1> (index 1).

The Hamiltonian is diagonal between pulses,

    E(b)/hbar = (1/2) sum_n w_n s_n(b) - (1/2) sum_{n<l} J_nl s_n(b) s_l(b),

so free evolution is exact phase accumulation. A single-tone drive on one
qubit splits the register into independent 2x2 blocks, one per spectator
configuration; each block sees detuning delta = w_j - w - sum_l J_jl s_l
and rotates at the generalized Rabi frequency sqrt(Omega^2 + delta^2).
This blockwise treatment is exact under the rotating wave approximation,
with no time stepping. Simultaneous multi-tone drives are rejected rather
than approximated: the exactness guarantee needs one tone at a time.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MAX_QUBITS = 16        # 2 MiB of complex128 amplitudes
MAX_ORACLE_QUBITS = 6
BASIS_CONVENTION = "qubit n is bit (n-1) of the basis index; labels list qubit 1 first; sigma_z|1> = +|1>"


class BadLabelError(ValueError):
    pass


class StateTooLargeError(ValueError):
    def __init__(self, n: int, limit: int):
        super().__init__(f"register of {n} qubits exceeds the supported maximum of {limit}")


@dataclass
class SpinState:
    """Owned, mutable amplitude vector over the computational basis."""

    amplitudes: np.ndarray
    qubit_order: str = BASIS_CONVENTION

    @property
    def n_qubits(self) -> int:
        return int(self.amplitudes.size).bit_length() - 1

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def copy(self) -> "SpinState":
        return SpinState(self.amplitudes.copy(), self.qubit_order)

    def to_json_dict(self) -> dict:
        return {
            "basis_convention": self.qubit_order,
            "amplitudes": [[float(a.real), float(a.imag)] for a in self.amplitudes],
        }


@dataclass(frozen=True)
class SpinHamiltonian:
    """Effective qubit frequencies (carrier shifts folded in) and J couplings."""

    omega_eff: np.ndarray  # rad/s per qubit
    coupling: np.ndarray   # J, rad/s, symmetric, zero diagonal

    def __post_init__(self):
        omega = np.asarray(self.omega_eff, dtype=float)
        j = np.asarray(self.coupling, dtype=float)
        object.__setattr__(self, "omega_eff", omega)
        object.__setattr__(self, "coupling", j)
        n = omega.size
        if j.shape != (n, n):
            raise ValueError(f"coupling matrix shape {j.shape} does not match {n} qubits")
        if not np.allclose(j, j.T, rtol=1e-12, atol=0.0):
            raise ValueError("coupling matrix must be symmetric")

    @property
    def n_qubits(self) -> int:
        return int(self.omega_eff.size)


@dataclass(frozen=True)
class PulseSpec:
    """One single-tone drive: target ion (1-based), Rabi rate, tone, phase, duration."""

    target_ion: int
    rabi_frequency: float   # rad/s, >= 0
    drive_frequency: float  # rad/s
    phase: float            # rad
    duration: float         # s, >= 0

    def __post_init__(self):
        if self.rabi_frequency < 0.0:
            raise ValueError("Rabi frequency must be non-negative")
        if self.duration < 0.0:
            raise ValueError("pulse duration must be non-negative")


def _sign_table(n: int) -> np.ndarray:
    """s[b, q] = +/-1 for qubit q+1 in basis state b."""
    b = np.arange(1 << n, dtype=np.int64)
    bits = (b[:, None] >> np.arange(n)[None, :]) & 1
    return 2.0 * bits - 1.0


def diagonal_rates(h: SpinHamiltonian) -> np.ndarray:
    """E(b)/hbar for every basis state, rad/s."""
    s = _sign_table(h.n_qubits)
    linear = 0.5 * s @ h.omega_eff
    pair = 0.25 * np.einsum("bn,nl,bl->b", s, h.coupling, s)  # half of n<l double count
    return linear - pair


def initialize(n: int, basis_label: str) -> SpinState:
    """Register of n qubits in the labeled computational basis state."""
    if n < 1:
        raise BadLabelError(f"need at least one qubit, got {n}")
    if n > MAX_QUBITS:
        raise StateTooLargeError(n, MAX_QUBITS)
    if len(basis_label) != n or any(c not in "01" for c in basis_label):
        raise BadLabelError(f"label {basis_label!r} is not a {n}-bit string of 0s and 1s")
    index = sum(1 << q for q, c in enumerate(basis_label) if c == "1")
    amplitudes = np.zeros(1 << n, dtype=complex)
    amplitudes[index] = 1.0
    return SpinState(amplitudes)


def label_of(index: int, n: int) -> str:
    return "".join("1" if (index >> q) & 1 else "0" for q in range(n))


def free_evolution(state: SpinState, h: SpinHamiltonian, t: float) -> SpinState:
    """Diagonal evolution: amplitude b picks up exp(-i E(b) t / hbar)."""
    if t < 0.0:
        raise ValueError("evolution time must be non-negative")
    state.amplitudes *= np.exp(-1j * diagonal_rates(h) * t)
    return state


def _block_unitary(delta: np.ndarray, omega_r: float, phase: float, tau: float):
    """2x2 propagators of [[0, (W/2)e^{-i phi}], [(W/2)e^{i phi}, delta]] for each block."""
    effective = np.hypot(delta, omega_r)
    half_angle = 0.5 * effective * tau
    cos = np.cos(half_angle)
    # sin(x)/x stays finite for unresolved blocks (effective ~ 0)
    sinc = np.where(effective > 0.0, np.sin(half_angle) / np.where(effective > 0.0, effective, 1.0), 0.5 * tau)
    common = np.exp(-0.5j * delta * tau)
    u00 = common * (cos + 1j * delta * sinc)
    u11 = common * (cos - 1j * delta * sinc)
    coupling = -1j * omega_r * sinc * common
    u01 = coupling * np.exp(-1j * phase)
    u10 = coupling * np.exp(1j * phase)
    return u00, u01, u10, u11


def apply_pulse(state: SpinState, h: SpinHamiltonian, pulse: PulseSpec) -> SpinState:
    """Exact RWA evolution for one single-tone pulse on one target qubit.

    Every spectator configuration c defines an independent 2x2 block with
    detuning delta(c); spectator phases accumulate exactly alongside. The
    drive phase is interpreted at the pulse's local t = 0 (callers that
    model a phase-coherent synthesizer shift it by -omega * t_start).
    """
    n = h.n_qubits
    j = pulse.target_ion
    if not 1 <= j <= n:
        raise ValueError(f"target ion {j} out of range [1, {n}]")
    if state.amplitudes.size != 1 << n:
        raise ValueError("state size does not match Hamiltonian")

    rates = diagonal_rates(h)
    mask = 1 << (j - 1)
    b_all = np.arange(1 << n)
    b0 = b_all[(b_all & mask) == 0]
    b1 = b0 | mask

    delta = rates[b1] - rates[b0] - pulse.drive_frequency
    u00, u01, u10, u11 = _block_unitary(delta, pulse.rabi_frequency, pulse.phase, pulse.duration)

    a0 = state.amplitudes[b0]
    a1 = state.amplitudes[b1]
    new0 = u00 * a0 + u01 * a1
    new1 = u10 * a0 + u11 * a1
    # back out of the per-block rotating frame into the lab frame
    lab0 = np.exp(-1j * rates[b0] * pulse.duration)
    state.amplitudes[b0] = lab0 * new0
    state.amplitudes[b1] = lab0 * np.exp(-1j * pulse.drive_frequency * pulse.duration) * new1
    return state


def apply_hard_pulse(state: SpinState, ion: int, area: float, phase: float) -> SpinState:
    """Idealized zero-duration rotation of one qubit by the given area (rad)."""
    n = state.n_qubits
    if not 1 <= ion <= n:
        raise ValueError(f"target ion {ion} out of range [1, {n}]")
    mask = 1 << (ion - 1)
    b_all = np.arange(1 << n)
    b0 = b_all[(b_all & mask) == 0]
    b1 = b0 | mask
    cos = np.cos(0.5 * area)
    sin = np.sin(0.5 * area)
    a0 = state.amplitudes[b0].copy()
    a1 = state.amplitudes[b1]
    state.amplitudes[b0] = cos * a0 - 1j * sin * np.exp(-1j * phase) * a1
    state.amplitudes[b1] = cos * a1 - 1j * sin * np.exp(1j * phase) * a0
    return state


_OBSERVABLES = ("sx", "sy", "sz")


def expectation(state: SpinState, observable: str, ion: int) -> float:
    """<sigma_alpha> of one qubit, alpha in {sx, sy, sz}."""
    if observable not in _OBSERVABLES:
        raise ValueError(f"observable must be one of {_OBSERVABLES}, got {observable!r}")
    n = state.n_qubits
    if not 1 <= ion <= n:
        raise ValueError(f"ion index {ion} out of range [1, {n}]")
    mask = 1 << (ion - 1)
    b_all = np.arange(1 << n)
    if observable == "sz":
        signs = np.where((b_all & mask) != 0, 1.0, -1.0)
        return float(np.sum(signs * np.abs(state.amplitudes) ** 2))
    b0 = b_all[(b_all & mask) == 0]
    b1 = b0 | mask
    cross = np.sum(np.conj(state.amplitudes[b0]) * state.amplitudes[b1])
    if observable == "sx":
        return float(2.0 * cross.real)
    return float(-2.0 * cross.imag)  # sy = i|0><1| - i|1><0| in this sign convention


def measurement_probabilities(state: SpinState, ions: list[int] | None = None) -> dict[str, float]:
    """Marginal z-basis outcome distribution over the listed ions (default all)."""
    n = state.n_qubits
    if ions is None:
        ions = list(range(1, n + 1))
    probs = np.abs(state.amplitudes) ** 2
    out: dict[str, float] = {}
    for b, p in enumerate(probs):
        key = "".join("1" if (b >> (ion - 1)) & 1 else "0" for ion in ions)
        out[key] = out.get(key, 0.0) + float(p)
    return out


def sample_measurement(state: SpinState, rng: np.random.Generator | int) -> str:
    """Draw one full z-basis outcome label with probability |amplitude|^2."""
    if isinstance(rng, (int, np.integer)):
        rng = np.random.default_rng(int(rng))
    probs = np.abs(state.amplitudes) ** 2
    probs = probs / probs.sum()
    index = int(rng.choice(probs.size, p=probs))
    return label_of(index, state.n_qubits)


# dense-matrix verification path -------------------------------------------

_SIGMA_Z = np.array([[-1.0, 0.0], [0.0, 1.0]], dtype=complex)  # sigma_z|1> = +|1>
_SIGMA_PLUS = np.array([[0.0, 0.0], [1.0, 0.0]], dtype=complex)


class OracleTooLargeError(ValueError):
    def __init__(self, n: int):
        super().__init__(f"dense oracle supports at most {MAX_ORACLE_QUBITS} qubits, got {n}")


def _operator_on(matrix: np.ndarray, ion: int, n: int) -> np.ndarray:
    """Embed a single-qubit operator on qubit `ion` (bit ion-1 of the index)."""
    op = np.kron(np.eye(1 << (n - ion), dtype=complex), matrix)
    return np.kron(op, np.eye(1 << (ion - 1), dtype=complex))


def _expm_scaled_series(a: np.ndarray) -> np.ndarray:
    """Matrix exponential by scaling-and-squaring with a Taylor series."""
    norm = float(np.linalg.norm(a, np.inf))
    scale = max(0, int(np.ceil(np.log2(norm / 0.5)))) if norm > 0.5 else 0
    b = a / (1 << scale)
    result = np.eye(a.shape[0], dtype=complex)
    term = np.eye(a.shape[0], dtype=complex)
    for k in range(1, 64):
        term = term @ b / k
        result = result + term
        if np.linalg.norm(term, np.inf) < 1e-18 * np.linalg.norm(result, np.inf):
            break
    for _ in range(scale):
        result = result @ result
    return result


def evolve_oracle(
    state: SpinState, h: SpinHamiltonian, drives: list[PulseSpec], t: float
) -> SpinState:
    """Dense-matrix evolution used only to validate the fast paths.

    Builds the full RWA Hamiltonian from explicit Pauli operators (in the
    rotating frame of the single drive, if any) and exponentiates it.
    Returns a new state; the input is untouched.
    """
    n = h.n_qubits
    if n > MAX_ORACLE_QUBITS:
        raise OracleTooLargeError(n)
    if len(drives) > 1:
        raise ValueError("simultaneous multi-tone drives are not supported")

    dim = 1 << n
    ham = np.zeros((dim, dim), dtype=complex)
    z_ops = [_operator_on(_SIGMA_Z, ion, n) for ion in range(1, n + 1)]
    for ion in range(n):
        ham += 0.5 * h.omega_eff[ion] * z_ops[ion]
    for a in range(n):
        for b in range(a + 1, n):
            ham -= 0.5 * h.coupling[a, b] * (z_ops[a] @ z_ops[b])

    rotating_ion = None
    if drives:
        pulse = drives[0]
        rotating_ion = pulse.target_ion
        sp = _operator_on(_SIGMA_PLUS, pulse.target_ion, n)
        ham -= 0.5 * pulse.drive_frequency * z_ops[pulse.target_ion - 1]
        ham += 0.5 * pulse.rabi_frequency * (
            np.exp(1j * pulse.phase) * sp + np.exp(-1j * pulse.phase) * sp.conj().T
        )

    propagator = _expm_scaled_series(-1j * ham * t)
    amplitudes = propagator @ state.amplitudes
    if rotating_ion is not None:
        # undo the rotating-frame transformation at the final time
        back = _expm_scaled_series(-1j * drives[0].drive_frequency * t * 0.5 * z_ops[rotating_ion - 1])
        amplitudes = back @ amplitudes
    return SpinState(amplitudes, state.qubit_order)
