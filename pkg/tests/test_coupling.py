from dataclasses import replace

import numpy as np
import pytest

from conftest import C_LIGHT, HBAR, MU_B, TWO_PI, YB_MASS, standard_raw
from gradchain.chain import solve_chain
from gradchain.config import OutOfProfileRangeError, validate_config
from gradchain.coupling import (
    NonUniformGradientError,
    approx_j,
    build_report,
    effective_lamb_dicke,
    epsilon_matrix,
    exact_phases,
    j_matrix,
    j_matrix_bruteforce_oracle,
    omega_gradients,
    qubit_frequencies,
    sideband_spectrum,
    validity_epsilon,
)

GRAD_10TM = MU_B * 10.0 / HBAR  # d(omega)/dz for Yb171 in 10 T/m


def make(n=2, nu1="100kHz", b="10T/m", field=None):
    raw = standard_raw(n=n, nu1=nu1, b=b)
    if field is not None:
        raw["field"] = field
    cfg = validate_config(raw)
    return cfg, solve_chain(cfg)


# omega gradients and qubit frequencies --------------------------------------

def test_gradients_uniform_10tm(config2, chain2):
    grads = omega_gradients(config2, chain2)
    assert np.allclose(grads, GRAD_10TM, rtol=1e-12)
    assert grads[0] == pytest.approx(8.794e11, rel=1e-3)


def test_gradients_zero_field():
    cfg, chain = make(n=3, b="0T/m")
    assert np.all(omega_gradients(cfg, chain) == 0.0)


def test_gradients_quadratic_vary_monotonically():
    cfg, chain = make(n=4, field={"quadratic": {"b": "10T/m", "c": 1e5}})
    grads = omega_gradients(cfg, chain)
    assert np.all(np.diff(grads) > 0)  # dB/dz = b + 2 c z rises along the chain


def test_gradients_sampled_profile_and_range():
    cfg, chain = make(n=2)
    extent = float(np.max(np.abs(chain.positions_m)))
    wide = {"sampled": {"points": [[-2 * extent, 0.0], [2 * extent, 4 * extent * 10.0]]}}
    cfg_wide, chain_wide = make(n=2, field=wide)
    assert np.allclose(omega_gradients(cfg_wide, chain_wide), GRAD_10TM, rtol=1e-12)
    narrow = {"sampled": {"points": [[-0.1 * extent, 0.0], [0.1 * extent, 1e-6]]}}
    cfg_narrow, chain_narrow = make(n=2, field=narrow)
    with pytest.raises(OutOfProfileRangeError):
        omega_gradients(cfg_narrow, chain_narrow)


def test_qubit_frequencies_no_field():
    cfg, chain = make(n=3, b="0T/m")
    assert np.allclose(qubit_frequencies(cfg, chain), TWO_PI * 12.6e9, rtol=1e-15)


def test_qubit_frequencies_monotonic_and_spacing(config10, chain10):
    omegas = qubit_frequencies(config10, chain10)
    splittings = np.diff(omegas)
    assert np.all(splittings > 0)
    # splitting between neighbors is gradient * local spacing
    spacing = np.diff(chain10.positions_m)
    assert np.allclose(splittings, GRAD_10TM * spacing, rtol=1e-9)
    # around a MHz for the 10 T/m, 100 kHz chain
    assert splittings.min() / TWO_PI == pytest.approx(1.0e6, rel=0.1)
    # spacing is non-uniform, so splittings are too
    assert splittings.max() > 1.2 * splittings.min()


# epsilon matrix --------------------------------------------------------------

def test_epsilon_single_ion_value():
    cfg, chain = make(n=1)
    eps = epsilon_matrix(omega_gradients(cfg, chain), chain)
    nu1 = TWO_PI * 1e5
    dz1 = np.sqrt(HBAR / (2 * YB_MASS * nu1))
    assert eps[0, 0] == pytest.approx(GRAD_10TM * dz1 / nu1, rel=1e-12)
    assert eps[0, 0] == pytest.approx(0.0241, rel=0.01)


def test_epsilon_zero_gradient():
    cfg, chain = make(n=4, b="0T/m")
    assert np.all(epsilon_matrix(omega_gradients(cfg, chain), chain) == 0.0)


def test_epsilon_com_symmetric(config2, chain2):
    eps = epsilon_matrix(omega_gradients(config2, chain2), chain2)
    assert abs(eps[0, 0]) == pytest.approx(abs(eps[0, 1]), rel=1e-12)


def test_epsilon_linear_in_gradient():
    cfg_a, chain_a = make(n=3, b="10T/m")
    cfg_b, chain_b = make(n=3, b="10.0001T/m")
    eps_a = epsilon_matrix(omega_gradients(cfg_a, chain_a), chain_a)
    eps_b = epsilon_matrix(omega_gradients(cfg_b, chain_b), chain_b)
    slope = (eps_b - eps_a) / 1e-4
    assert np.allclose(slope, eps_a / 10.0, rtol=1e-6)


# J matrix --------------------------------------------------------------------

def test_two_ion_closed_form_grid():
    # J12 = hbar (d omega/dz)^2 / (6 m nu1^2) for two ions in a uniform gradient
    for b in (2.0, 10.0, 37.5):
        for nu1_hz in (5e4, 1e5, 4e5):
            cfg, chain = make(n=2, nu1=f"{nu1_hz!r}Hz", b=f"{b!r}T/m")
            j = j_matrix(omega_gradients(cfg, chain), chain)
            grad = MU_B * b / HBAR
            expected = HBAR * grad**2 / (6 * YB_MASS * (TWO_PI * nu1_hz) ** 2)
            assert j[0, 1] == pytest.approx(expected, rel=1e-10)
            assert j[1, 0] == j[0, 1]
            assert j[0, 0] == 0.0 and j[1, 1] == 0.0


def test_two_ion_j_is_19_3_hz(report2):
    assert report2.j_matrix[0, 1] / TWO_PI == pytest.approx(19.3, rel=1e-3)


def test_j_zero_gradient():
    cfg, chain = make(n=5, b="0T/m")
    assert np.all(j_matrix(omega_gradients(cfg, chain), chain) == 0.0)


def test_n10_max_j_within_order_of_magnitude(report10):
    max_j_hz = np.max(report10.j_matrix) / TWO_PI
    assert 4.0 <= max_j_hz <= 400.0


def test_oracle_equivalence_three_ions_positive():
    cfg, chain = make(n=3)
    j = j_matrix_bruteforce_oracle(omega_gradients(cfg, chain), chain)
    assert j[0, 1] > 0 and j[0, 2] > 0 and j[1, 2] > 0


def test_oracle_single_ion_empty():
    cfg, chain = make(n=1)
    assert np.all(j_matrix_bruteforce_oracle(omega_gradients(cfg, chain), chain) == 0.0)


@pytest.mark.parametrize("n", range(2, 13))
def test_oracle_equivalence_random_profiles(n):
    rng = np.random.default_rng(100 + n)
    chain = solve_chain(validate_config(standard_raw(n=n)))
    for _ in range(6):
        grads = rng.uniform(-1e12, 1e12, n)
        a = j_matrix(grads, chain)
        b = j_matrix_bruteforce_oracle(grads, chain)
        scale = np.max(np.abs(a))
        assert np.max(np.abs(a - b)) <= 1e-12 * scale
        assert np.allclose(a, a.T, atol=0)


def test_sign_flip_invariance():
    cfg, chain = make(n=4)
    grads = omega_gradients(cfg, chain)
    j_ref = j_matrix(grads, chain)
    for row in range(4):
        flipped_s = chain.mode_matrix.copy()
        flipped_s[row] *= -1.0
        flipped = replace(chain, mode_matrix=flipped_s)
        assert np.array_equal(j_matrix(grads, flipped), j_ref)


def test_j_scaling_laws():
    # J ~ b^2 and ~ nu1^-2: the mode spectrum and S are invariant, so the
    # whole matrix rescales; checked over the full 3x3 (b, nu1) grid
    base_cfg, base_chain = make(n=3)
    base = j_matrix(omega_gradients(base_cfg, base_chain), base_chain)
    for b_factor in (2.0, 5.0, 11.0):
        for nu_factor in (2.0, 5.0, 11.0):
            cfg, chain = make(n=3, b=f"{10.0 * b_factor!r}T/m", nu1=f"{1e5 * nu_factor!r}Hz")
            j = j_matrix(omega_gradients(cfg, chain), chain)
            assert np.allclose(j, base * b_factor**2 / nu_factor**2, rtol=1e-10)


# closed-form estimate ---------------------------------------------------------

def test_approx_j_single_ion_exact():
    cfg, chain = make(n=1)
    expected = (MU_B * 10.0) ** 2 / (4 * YB_MASS * HBAR * (TWO_PI * 1e5) ** 2)
    assert approx_j(cfg, chain) == pytest.approx(expected, rel=1e-12)


def test_approx_j_nu1_power_law():
    cfg_a, chain_a = make(n=5)
    cfg_b, chain_b = make(n=5, nu1="400kHz")
    assert approx_j(cfg_b, chain_b) == pytest.approx(approx_j(cfg_a, chain_a) / 16.0, rel=1e-10)


def test_approx_j_n10_frozen(config10, chain10):
    # keep within a factor of ten of the exact nearest-neighbor couplings
    assert approx_j(config10, chain10) / TWO_PI == pytest.approx(5.397628553441851, rel=1e-10)


def test_approx_j_vs_exact_neighbors(config10, chain10, report10):
    neighbor = np.array([report10.j_matrix[i, i + 1] for i in range(9)])
    estimate = approx_j(config10, chain10)
    ratio = estimate / neighbor.mean()
    assert 0.1 < ratio < 10.0


def test_approx_j_requires_uniform():
    cfg, chain = make(n=2, field={"quadratic": {"b": "10T/m", "c": 100.0}})
    with pytest.raises(NonUniformGradientError):
        approx_j(cfg, chain)


# validity ----------------------------------------------------------------------

def test_validity_standard_case(config2, chain2, report2):
    assert validity_epsilon(config2, chain2) == pytest.approx(0.0241, rel=0.01)
    assert report2.harmonic_approximation_valid


def test_validity_zero_gradient():
    cfg, chain = make(n=2, b="0T/m")
    assert validity_epsilon(cfg, chain) == 0.0


def test_validity_strong_gradient_flagged():
    cfg, chain = make(n=2, b="500T/m")
    report = build_report(cfg, chain)
    assert report.validity == pytest.approx(1.20, rel=0.01)
    assert not report.harmonic_approximation_valid


# effective Lamb-Dicke -----------------------------------------------------------

def test_eta_bare_microwave_tiny(config10, chain10, report10):
    nu1 = TWO_PI * 1e5
    dz1 = np.sqrt(HBAR / (2 * YB_MASS * nu1))
    k = TWO_PI * 12.6e9 / C_LIGHT
    assert report10.eta_bare[0] == pytest.approx(dz1 * k, rel=1e-12)
    assert report10.eta_bare[0] < 1e-5


def test_zero_gradient_reductions():
    cfg, chain = make(n=3, b="0T/m")
    grads = omega_gradients(cfg, chain)
    eta_eff, phases, shifts = effective_lamb_dicke(cfg, chain, grads)
    k = TWO_PI * 12.6e9 / C_LIGHT
    eta_bare = chain.ground_state_extents * k
    assert np.allclose(eta_eff, np.abs(eta_bare[:, None] * chain.mode_matrix), atol=0)
    assert np.all(shifts == 0.0)
    assert np.all(phases == 0.5 * np.pi)


def test_eta_eff_modulus_identity(config10, chain10):
    grads = omega_gradients(config10, chain10)
    eta_eff, _, _ = effective_lamb_dicke(config10, chain10, grads)
    eps = epsilon_matrix(grads, chain10)
    k = config10.wavevector()
    bare = chain10.ground_state_extents[:, None] * chain10.mode_matrix
    assert np.allclose(eta_eff**2, (k * bare) ** 2 + eps**2, rtol=1e-12)


def test_two_ion_shifts(config2, chain2):
    grads = omega_gradients(config2, chain2)
    _, _, shifts = effective_lamb_dicke(config2, chain2, grads)
    nu1 = TWO_PI * 1e5
    dz1 = np.sqrt(HBAR / (2 * YB_MASS * nu1))
    dz2 = dz1 * 3.0**-0.25
    expected1 = GRAD_10TM / (2 * np.sqrt(2.0)) * (dz1 + dz2)
    expected2 = GRAD_10TM / (2 * np.sqrt(2.0)) * (dz1 - dz2)
    assert shifts[0] == pytest.approx(expected1, rel=1e-10)
    assert shifts[1] == pytest.approx(expected2, rel=1e-10)
    assert shifts[0] / TWO_PI == pytest.approx(1.50e3, rel=0.01)
    assert shifts[1] / TWO_PI == pytest.approx(0.20e3, rel=0.03)


def test_exact_phases_near_pi_half(config2, chain2):
    grads = omega_gradients(config2, chain2)
    phases = exact_phases(config2, chain2, grads)
    # microwave eta is ~1e-6 of eps, so the exact phase sits within ~1e-3 of
    # +pi/2 (eps > 0) or -pi/2 (eps < 0, where the mode row is negative)
    wrapped = np.angle(np.exp(1j * phases))
    assert np.all(np.abs(np.abs(wrapped) - 0.5 * np.pi) < 1e-3)
    eps = epsilon_matrix(grads, chain2)
    assert np.all(np.sign(wrapped) == np.sign(eps))


# sideband spectrum ----------------------------------------------------------------

def test_spectrum_two_ions(config2, chain2, report2):
    lines = sideband_spectrum(config2, chain2, report2, 1)
    assert len(lines) == 5  # carrier + 2 modes x 2 signs
    freqs = [line.frequency for line in lines]
    assert freqs == sorted(freqs)
    carrier = [line for line in lines if line.label == "carrier"][0]
    assert carrier.amplitude == 1.0
    assert carrier.frequency == pytest.approx(
        report2.qubit_frequencies[0] + report2.shifts[0], rel=1e-15
    )
    for mode in (1, 2):
        red = [line for line in lines if line.label == f"red_{mode}"][0]
        blue = [line for line in lines if line.label == f"blue_{mode}"][0]
        assert red.amplitude == blue.amplitude == report2.eta_eff[mode - 1, 0]
        # carrier ~ 2 pi 12.6 GHz, so differencing leaves ~1e-5 rad/s noise
        assert blue.frequency - carrier.frequency == pytest.approx(
            chain2.mode_frequencies[mode - 1], abs=1e-4
        )
        assert carrier.frequency - red.frequency == pytest.approx(
            chain2.mode_frequencies[mode - 1], abs=1e-4
        )


def test_spectrum_zero_gradient_carrier_only():
    cfg, chain = make(n=2, b="0T/m")
    report = build_report(cfg, chain)
    lines = sideband_spectrum(cfg, chain, report, 2)
    sidebands = [line for line in lines if line.label != "carrier"]
    assert all(line.amplitude <= report.eta_bare.max() for line in sidebands)
    assert all(line.amplitude < 1e-5 for line in sidebands)


def test_spectrum_rejects_bad_ion(config2, chain2, report2):
    with pytest.raises(ValueError):
        sideband_spectrum(config2, chain2, report2, 3)


# report ------------------------------------------------------------------------

def test_quadratic_profile_gives_unequal_pair_couplings():
    # a position-dependent gradient makes J_nl differ between equivalent pairs
    cfg, chain = make(n=3, field={"quadratic": {"b": "10T/m", "c": 3e5}})
    j = j_matrix(omega_gradients(cfg, chain), chain)
    assert abs(j[0, 1] - j[1, 2]) > 0.05 * abs(j[0, 1])
    uniform_cfg, uniform_chain = make(n=3)
    j_u = j_matrix(omega_gradients(uniform_cfg, uniform_chain), uniform_chain)
    assert j_u[0, 1] == pytest.approx(j_u[1, 2], rel=1e-10)  # mirror symmetry


def test_sampled_profile_full_report():
    cfg0, chain0 = make(n=3)
    extent = float(np.max(np.abs(chain0.positions_m)))
    # piecewise approximation of the uniform 10 T/m ramp reproduces it exactly
    zs = np.linspace(-3 * extent, 3 * extent, 7)
    field = {"sampled": {"points": [[float(z), float(10.0 * z)] for z in zs]}}
    cfg, chain = make(n=3, field=field)
    report = build_report(cfg, chain)
    reference = build_report(cfg0, chain0)
    assert np.allclose(report.j_matrix, reference.j_matrix, rtol=1e-9)
    assert np.allclose(report.shifts, reference.shifts, rtol=1e-9)


def test_explicit_wavevector_scales_eta():
    raw = standard_raw(n=2)
    raw["drive_wavevector"] = {"explicit": 1.0e6}
    cfg = validate_config(raw)
    chain = solve_chain(cfg)
    report = build_report(cfg, chain)
    assert np.allclose(report.eta_bare, chain.ground_state_extents * 1.0e6, rtol=1e-12)
    # optical-scale wavevector gives a usable bare Lamb-Dicke parameter
    assert report.eta_bare[0] > 1e-3


def test_full_pipeline_n50_runs():
    import time

    started = time.perf_counter()
    cfg, chain = make(n=50)
    report = build_report(cfg, chain)
    elapsed = time.perf_counter() - started
    assert chain.ion_count == 50
    assert report.j_matrix.shape == (50, 50)
    assert np.all(np.isfinite(report.j_matrix))
    assert elapsed < 30.0


def test_report_serialization(report2):
    doc = report2.to_json_dict()
    assert doc["ion_count"] == 2
    assert doc["j_matrix_hz"][0][1] == pytest.approx(19.3, rel=1e-3)
    assert doc["validity"]["harmonic_approximation_valid"] is True
    assert doc["validity"]["threshold"] == 0.1
    assert len(doc["phases_exact_rad"]) == 2
    assert doc["sign_convention"]
