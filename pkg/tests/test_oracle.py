"""
Tests for the exact Gaussian lattice entropy.
"""

import math

import numpy as np
import pytest

from field_entangle.oracle import (
	LatticeError,
	LatticeSpec,
	SymplecticSpectrum,
	dense_covariance,
	dense_purity_entropy,
	dense_renyi_entropy,
	ground_state_covariance,
	lattice_laplacian,
	lattice_momenta,
	perturbative_check,
	renyi_field_entropy,
	renyi_from_spectrum,
	renyi_spectrum,
	symplectic_spectrum,
)


@pytest.fixture
def small_lattice():
	"""Six-site chain with unequal masses and a sizeable coupling."""
	return LatticeSpec(dims=1, sites_per_dim=6, mass_phi=1.0, mass_chi=1.2, bilinear_g=0.5)


def test_lattice_spec_validation():
	"""Test the lattice domain checks."""
	with pytest.raises(LatticeError, match="dims"):
		LatticeSpec(4, 4, 1.0, 1.0, 0.1)
	with pytest.raises(LatticeError, match="sites_per_dim"):
		LatticeSpec(1, 1, 1.0, 1.0, 0.1)
	with pytest.raises(LatticeError, match="masses"):
		LatticeSpec(1, 4, 0.0, 1.0, 0.1)
	with pytest.raises(LatticeError, match="unstable"):
		LatticeSpec(1, 8, 1.0, 1.0, 1.0)


def test_lattice_momenta_shape():
	"""Test one momentum vector per site."""
	spec = LatticeSpec(dims=2, sites_per_dim=3, mass_phi=1.0, mass_chi=1.0, bilinear_g=0.1)
	momenta = lattice_momenta(spec)
	assert momenta.shape == (9, 2)
	assert spec.n_sites == 9


def test_laplacian_rows_sum_to_zero():
	"""Test that the periodic Laplacian annihilates constants."""
	spec = LatticeSpec(dims=2, sites_per_dim=4, mass_phi=1.0, mass_chi=1.0, bilinear_g=0.1)
	laplacian = lattice_laplacian(spec)
	assert np.allclose(laplacian.sum(axis=1), 0.0)
	assert np.allclose(laplacian, laplacian.T)


def test_decoupled_moments():
	"""Test <phi phi> = 1/(2 omega) and zero cross moments at g = 0."""
	spec = LatticeSpec(dims=1, sites_per_dim=8, mass_phi=1.0, mass_chi=2.0, bilinear_g=0.0)
	cov = ground_state_covariance(spec)
	omega = np.sqrt(cov.k_hat_squared + 1.0)
	assert np.allclose(cov.phi_phi, 0.5 / omega, rtol=1e-14)
	assert np.allclose(cov.pi_phi_pi_phi, 0.5 * omega, rtol=1e-14)
	assert np.allclose(cov.phi_chi, 0.0, atol=1e-15)


def test_equal_masses_mix_maximally():
	"""Test a mixing angle of pi/4 for degenerate fields."""
	spec = LatticeSpec(dims=1, sites_per_dim=8, mass_phi=1.0, mass_chi=1.0, bilinear_g=0.2)
	cov = ground_state_covariance(spec)
	assert np.allclose(cov.mixing_angle, math.pi / 4)


def test_mode_moments_match_dense_covariance(small_lattice):
	"""Test mode-space correlators against the dense real-space covariance."""
	cov = ground_state_covariance(small_lattice)
	q_cov, p_cov = dense_covariance(small_lattice)
	n = small_lattice.n_sites
	assert cov.correlator("phi_phi", [0]) == pytest.approx(q_cov[0, 0], rel=1e-12)
	assert cov.correlator("phi_phi", [1]) == pytest.approx(q_cov[0, 1], rel=1e-12)
	assert cov.correlator("phi_chi", [0]) == pytest.approx(q_cov[0, n], rel=1e-12)
	assert cov.correlator("pi_phi_pi_phi", [0]) == pytest.approx(p_cov[0, 0], rel=1e-12)
	assert cov.correlator("pi_phi_pi_chi", [0]) == pytest.approx(p_cov[0, n], rel=1e-12)


def test_correlator_rejects_wrong_dimension(small_lattice):
	"""Test the separation length check."""
	with pytest.raises(LatticeError, match="components"):
		ground_state_covariance(small_lattice).correlator("phi_phi", [0, 1])


def test_free_lattice_has_zero_entropy():
	"""Test S = 0 exactly at g = 0."""
	spec = LatticeSpec(dims=1, sites_per_dim=8, mass_phi=1.0, mass_chi=1.0, bilinear_g=0.0)
	assert renyi_field_entropy(spec, 2) == 0.0
	assert renyi_field_entropy(spec, 3, "chi") == 0.0


def test_spectrum_is_above_one_half(small_lattice):
	"""Test nu >= 1/2 for every mode."""
	spectrum = symplectic_spectrum(small_lattice)
	assert np.all(spectrum.values >= 0.5)
	assert np.all(spectrum.excess > 0)


def test_spectrum_rejects_unphysical_values():
	"""Test that nu^2 well below 1/4 is an error rather than clipped."""
	with pytest.raises(LatticeError, match="below 1/2"):
		SymplecticSpectrum.from_squares(np.array([0.25, 0.2]))
	clipped = SymplecticSpectrum.from_squares(np.array([0.25 - 1e-14]))
	assert clipped.values[0] == 0.5


@pytest.mark.parametrize("alpha", [2, 3, 4])
def test_mode_space_matches_dense(small_lattice, alpha):
	"""Test the per-mode entropy against brute-force diagonalization."""
	exact = renyi_field_entropy(small_lattice, alpha)
	assert dense_renyi_entropy(small_lattice, alpha) == pytest.approx(exact, rel=1e-8)


def test_both_fields_share_the_entropy(small_lattice):
	"""Test that the pure global state gives equal entropies for phi and chi."""
	phi = dense_renyi_entropy(small_lattice, 2, "phi")
	chi = dense_renyi_entropy(small_lattice, 2, "chi")
	assert phi == pytest.approx(chi, rel=1e-8)
	assert renyi_field_entropy(small_lattice.swapped(), 2) == pytest.approx(phi, rel=1e-8)


@pytest.mark.parametrize("alpha", [2, 3])
def test_chi_reduction_matches_dense_chi_block(small_lattice, alpha):
	"""Test the per-mode chi entropy against the dense chi-block reduction."""
	mode = renyi_field_entropy(small_lattice, alpha, "chi")
	assert mode == pytest.approx(dense_renyi_entropy(small_lattice, alpha, "chi"), rel=1e-8)
	assert mode == pytest.approx(renyi_field_entropy(small_lattice, alpha, "phi"), rel=1e-12)


def test_purity_matches_second_renyi(small_lattice):
	"""Test -ln Tr rho^2 from determinants against the symplectic formula."""
	exact = renyi_field_entropy(small_lattice, 2)
	assert dense_purity_entropy(small_lattice) == pytest.approx(exact, rel=1e-8)


def test_renyi_decreases_with_alpha(small_lattice):
	"""Test S_2 >= S_3 >= S_4."""
	values = renyi_spectrum(small_lattice, [2, 3, 4])
	assert values[2] >= values[3] >= values[4] > 0


def test_renyi_from_single_mode():
	"""Test S_2 = ln(2 nu) for one mode."""
	spectrum = SymplecticSpectrum.from_squares(np.array([1.0]))
	assert renyi_from_spectrum(spectrum, 2) == pytest.approx(math.log(2.0), rel=1e-14)


def test_bad_field_name(small_lattice):
	"""Test field validation."""
	with pytest.raises(LatticeError, match="field"):
		symplectic_spectrum(small_lattice, "psi")


def test_perturbative_check_structure():
	"""Test the g^2 exponent, the alpha ratio and volume-law convergence."""
	base = LatticeSpec(dims=1, sites_per_dim=32, mass_phi=1.0, mass_chi=1.0, bilinear_g=0.3)
	report = perturbative_check(base, couplings=[1e-3, 2e-3, 4e-3], sizes=[16, 4, 8])
	assert report.exponent == pytest.approx(2.0, abs=0.05)
	assert report.ratio_alpha == 3
	assert report.expected_ratio == pytest.approx(0.75)
	assert report.ratio == pytest.approx(0.75, abs=0.02)
	assert report.sizes == (4, 8, 16)
	assert report.converging
	assert report.as_dict()["converging"] is True


def test_perturbative_check_rejects_short_inputs():
	"""Test the minimum coupling and size counts."""
	base = LatticeSpec(dims=1, sites_per_dim=8, mass_phi=1.0, mass_chi=1.0, bilinear_g=0.3)
	with pytest.raises(LatticeError, match="couplings"):
		perturbative_check(base, couplings=[0.01], sizes=[4, 8])
	with pytest.raises(LatticeError, match="sizes"):
		perturbative_check(base, couplings=[0.01, 0.02], sizes=[8])
	with pytest.raises(LatticeError, match="> 0"):
		perturbative_check(base, couplings=[0.0, 0.02], sizes=[4, 8])
