import numpy as np
import pytest

from conftest import E_CHARGE, EPS0, HBAR, TWO_PI, YB_MASS, standard_raw
from gradchain.chain import (
    DegeneratePositionsError,
    dynamical_matrix,
    length_scale,
    normal_modes,
    solve_chain,
    solve_equilibrium,
    stationarity_residual,
)
from gradchain.config import validate_config


def dimensionless_potential(u):
    """Independent oracle: trap + Coulomb energy in chain units."""
    energy = 0.5 * np.sum(np.asarray(u) ** 2)
    for i in range(len(u)):
        for j in range(i + 1, len(u)):
            energy += 1.0 / abs(u[i] - u[j])
    return energy


def finite_difference_gradient(u, h=1e-6):
    grad = np.zeros(len(u))
    for i in range(len(u)):
        up = np.array(u, dtype=float)
        dn = np.array(u, dtype=float)
        up[i] += h
        dn[i] -= h
        grad[i] = (dimensionless_potential(up) - dimensionless_potential(dn)) / (2 * h)
    return grad


def finite_difference_hessian(u, h=1e-6):
    # differences the force-balance residual, itself checked against the
    # bare potential in test_stationarity_matches_potential_gradient
    n = len(u)
    hess = np.zeros((n, n))
    for i in range(n):
        up = np.array(u, dtype=float)
        dn = np.array(u, dtype=float)
        up[i] += h
        dn[i] -= h
        hess[:, i] = (stationarity_residual(up) - stationarity_residual(dn)) / (2 * h)
    return hess


# equilibrium ---------------------------------------------------------------

def test_single_ion_at_center():
    assert solve_equilibrium(1).tolist() == [0.0]


def test_two_ions_analytic():
    u = solve_equilibrium(2)
    expected = 0.25 ** (1.0 / 3.0)  # u = (2u)^-2  =>  u^3 = 1/4
    assert abs(u[0] + expected) < 1e-10
    assert abs(u[1] - expected) < 1e-10


def test_three_ions_analytic():
    u = solve_equilibrium(3)
    expected = 1.25 ** (1.0 / 3.0)  # outer ions at +/-(5/4)^(1/3), center at 0
    assert abs(u[0] + expected) < 1e-10
    assert abs(u[1]) < 1e-10
    assert abs(u[2] - expected) < 1e-10


@pytest.mark.parametrize("n", [1, 2, 3, 5, 8, 13, 20, 35, 50])
def test_equilibrium_residual_sorted_centered(n):
    u = solve_equilibrium(n)
    assert np.max(np.abs(stationarity_residual(u))) < 1e-12
    assert np.all(np.diff(u) > 0)
    assert abs(np.sum(u)) < 1e-10


@pytest.mark.parametrize("n", [2, 4, 7, 12])
def test_stationarity_matches_potential_gradient(n):
    # the residual is the gradient of the dimensionless chain potential
    u = solve_equilibrium(n) + np.linspace(-0.01, 0.01, n)  # off equilibrium
    assert np.allclose(stationarity_residual(u), finite_difference_gradient(u), atol=1e-7)


def test_deterministic_bit_for_bit():
    for n in (2, 9, 17):
        cfg = validate_config(standard_raw(n=n))
        a = solve_chain(cfg)
        b = solve_chain(cfg)
        assert np.array_equal(a.positions, b.positions)
        assert np.array_equal(a.mode_eigenvalues, b.mode_eigenvalues)
        assert np.array_equal(a.mode_matrix, b.mode_matrix)


# length scale --------------------------------------------------------------

def test_length_scale_yb171_100khz():
    cfg = validate_config(standard_raw())
    nu1 = TWO_PI * 1e5
    expected = (E_CHARGE**2 / (4 * np.pi * EPS0 * YB_MASS * nu1**2)) ** (1 / 3)
    zeta = length_scale(cfg)
    assert zeta == pytest.approx(expected, rel=1e-12)
    assert zeta == pytest.approx(1.273e-5, rel=2e-3)


def test_length_scale_mass_power_law():
    # doubling the mass at fixed nu1 scales zeta by 2^(-1/3)
    light = validate_config(standard_raw())
    zeta_light = length_scale(light)
    heavy_mass = 2.0 * light.mass
    expected = zeta_light * 2.0 ** (-1.0 / 3.0)
    from dataclasses import replace

    heavy_species = replace(light.species, mass=heavy_mass)
    heavy = replace(light, species=heavy_species)
    assert length_scale(heavy) == pytest.approx(expected, rel=1e-12)


def test_min_spacing_n10_near_7um(chain10):
    assert chain10.min_spacing_m() == pytest.approx(7e-6, rel=0.05)


def test_spacing_scaling_law():
    # empirical law: min spacing ~ zeta * 2 N^-0.57. Good to 5% for
    # mid-size chains; degrades to ~6.5% at N=2 and ~6% by N=20.
    for n in range(3, 11):
        u = solve_equilibrium(n)
        ratio = np.min(np.diff(u)) / (2.0 * n**-0.57)
        assert 0.95 < ratio < 1.05, (n, ratio)
    for n in (2, *range(11, 21)):
        u = solve_equilibrium(n)
        ratio = np.min(np.diff(u)) / (2.0 * n**-0.57)
        assert 0.93 < ratio < 1.07, (n, ratio)


# dynamical matrix ----------------------------------------------------------

def test_dynamical_matrix_single_ion():
    assert dynamical_matrix(np.zeros(1)).tolist() == [[1.0]]


def test_dynamical_matrix_two_ions():
    u = solve_equilibrium(2)
    a = dynamical_matrix(u)
    # |u1 - u2|^3 = (2 (1/4)^(1/3))^3 = 2, so off-diagonal -1 and diagonal 2
    assert np.allclose(a, [[2.0, -1.0], [-1.0, 2.0]], atol=1e-10)


@pytest.mark.parametrize("n", [2, 3, 5, 8, 10])
def test_dynamical_matrix_row_sums_are_one(n):
    # Coulomb terms cancel pairwise: A (1, ..., 1)^T = (1, ..., 1)^T
    a = dynamical_matrix(solve_equilibrium(n))
    assert np.allclose(a @ np.ones(n), np.ones(n), atol=1e-11)
    assert np.allclose(a, a.T, atol=0)


@pytest.mark.parametrize("n", [3, 6])
def test_dynamical_matrix_is_potential_hessian(n):
    u = solve_equilibrium(n)
    assert np.allclose(dynamical_matrix(u), finite_difference_hessian(u), atol=1e-7)


def test_degenerate_positions_rejected():
    with pytest.raises(DegeneratePositionsError):
        dynamical_matrix(np.array([0.0, 1e-10]))


# normal modes --------------------------------------------------------------

def test_modes_single_ion():
    lam2, s = normal_modes(np.array([[1.0]]))
    assert lam2.tolist() == [1.0]
    assert s.tolist() == [[1.0]]


def test_modes_two_ions_analytic():
    lam2, s = normal_modes(np.array([[2.0, -1.0], [-1.0, 2.0]]))
    assert np.allclose(lam2, [1.0, 3.0], atol=1e-12)
    r = 1.0 / np.sqrt(2.0)
    assert np.allclose(s, [[r, r], [r, -r]], atol=1e-12)


def test_modes_three_ions_analytic():
    lam2, _ = normal_modes(dynamical_matrix(solve_equilibrium(3)))
    assert np.allclose(lam2, [1.0, 3.0, 29.0 / 5.0], atol=1e-9)


@pytest.mark.parametrize("n", list(range(2, 21)))
def test_universal_low_modes_and_orthogonality(n):
    sol = solve_chain(validate_config(standard_raw(n=n)))
    assert abs(sol.mode_eigenvalues[0] - 1.0) < 1e-9   # center of mass
    assert abs(sol.mode_eigenvalues[1] - 3.0) < 1e-9   # breathing
    assert np.all(sol.mode_eigenvalues > 0)            # true minimum
    gram = sol.mode_matrix @ sol.mode_matrix.T
    assert np.max(np.abs(gram - np.eye(n))) < 1e-10
    # COM row is uniform
    assert np.allclose(sol.mode_matrix[0], np.ones(n) / np.sqrt(n), atol=1e-9)


@pytest.mark.parametrize("n", [2, 5, 10, 20, 50])
def test_modes_match_dense_diagonalization(n):
    # brute-force oracle: numpy's symmetric eigensolver
    a = dynamical_matrix(solve_equilibrium(n))
    lam2, s = normal_modes(a)
    assert np.allclose(lam2, np.linalg.eigvalsh(a), atol=1e-10)
    recon = s @ a @ s.T - np.diag(lam2)
    assert np.max(np.abs(recon)) < 1e-10


def test_mode_sign_convention():
    _, s = normal_modes(dynamical_matrix(solve_equilibrium(7)))
    for row in s:
        pivot = np.argmax(np.abs(row))
        assert row[pivot] > 0


def test_normal_modes_rejects_asymmetric():
    with pytest.raises(ValueError):
        normal_modes(np.array([[1.0, 2.0], [0.0, 1.0]]))


# derived per-mode quantities ----------------------------------------------

def test_mode_frequencies_and_extents(chain2, config2):
    nu1 = TWO_PI * 1e5
    assert np.allclose(chain2.mode_frequencies, nu1 * np.sqrt([1.0, 3.0]), rtol=1e-12)
    dz1 = np.sqrt(HBAR / (2 * YB_MASS * nu1))
    assert chain2.ground_state_extents[0] == pytest.approx(dz1, rel=1e-12)
    assert chain2.ground_state_extents[1] == pytest.approx(dz1 * 3.0**-0.25, rel=1e-12)


def test_ground_state_extent_17nm(chain2):
    assert chain2.ground_state_extents[0] == pytest.approx(17.2e-9, rel=0.01)


def test_chain_json_dict(chain10):
    doc = chain10.to_json_dict()
    assert doc["ion_count"] == 10
    assert len(doc["positions_m"]) == 10
    assert doc["positions_m"][0] == pytest.approx(
        doc["positions_dimensionless"][0] * doc["length_scale_m"], rel=1e-15
    )
    # frequencies serialize as nu1 * lambda in ordinary Hz
    assert doc["mode_frequencies_hz"][0] == pytest.approx(1e5, rel=1e-12)
    assert doc["mode_frequencies_hz"][1] == pytest.approx(1e5 * np.sqrt(3), rel=1e-12)
    assert len(doc["mode_matrix"]) == 10
