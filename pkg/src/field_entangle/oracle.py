"""
Exact Rényi entropy between two bilinearly coupled Gaussian lattice fields.

The Hamiltonian on a periodic hypercubic lattice (spacing 1) is

	H = sum_x [ pi_phi^2/2 + pi_chi^2/2 + (grad phi)^2/2 + (grad chi)^2/2
	            + m_phi^2 phi^2/2 + m_chi^2 chi^2/2 + g phi chi ]

Each lattice momentum decouples into a 2x2 oscillator problem, so the ground
state and the reduced state of either field are Gaussian and their Rényi
entropies follow from one symplectic eigenvalue per mode. A dense
full-covariance path is kept as a brute-force cross-check for small lattices.
"""

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass, replace
from typing import Any, Literal, Union

import numpy as np
from scipy import linalg

from field_entangle.model import RenyiIndex, as_renyi_index
from field_entangle.scaling import fit_loglog

logger = logging.getLogger(__name__)

# Symplectic eigenvalues below 1/2 by more than this are an error, not roundoff
NU_FLOOR_TOLERANCE = 1e-10

Field = Literal["phi", "chi"]


class LatticeError(Exception):
	"""Raised for unstable or malformed lattice specifications."""

	pass


@dataclass(frozen=True)
class LatticeSpec:
	"""Periodic lattice with two scalar fields coupled by g * phi * chi per site."""

	dims: int
	sites_per_dim: int
	mass_phi: float
	mass_chi: float
	bilinear_g: float

	def __post_init__(self) -> None:
		if self.dims not in (1, 2, 3):
			raise LatticeError(f"dims must be 1, 2 or 3, got {self.dims}")
		if self.sites_per_dim < 2:
			raise LatticeError(f"sites_per_dim must be >= 2, got {self.sites_per_dim}")
		if self.mass_phi <= 0 or self.mass_chi <= 0:
			raise LatticeError(
				f"lattice masses must be > 0, got m_phi={self.mass_phi}, m_chi={self.mass_chi}"
			)
		if self.bilinear_g**2 >= (self.mass_phi * self.mass_chi) ** 2:
			raise LatticeError(
				f"unstable: g^2 = {self.bilinear_g**2:.6g} must be below "
				f"m_phi^2 m_chi^2 = {(self.mass_phi * self.mass_chi) ** 2:.6g}"
			)

	@property
	def n_sites(self) -> int:
		return self.sites_per_dim**self.dims

	def with_coupling(self, g: float) -> "LatticeSpec":
		return replace(self, bilinear_g=g)

	def with_size(self, sites_per_dim: int) -> "LatticeSpec":
		return replace(self, sites_per_dim=sites_per_dim)

	def swapped(self) -> "LatticeSpec":
		"""Same lattice with the roles of phi and chi exchanged."""
		return replace(self, mass_phi=self.mass_chi, mass_chi=self.mass_phi)


@dataclass(frozen=True, eq=False)
class CovarianceData:
	"""Ground-state second moments per lattice momentum mode."""

	momenta: np.ndarray
	k_hat_squared: np.ndarray
	mixing_angle: np.ndarray
	omega_plus: np.ndarray
	omega_minus: np.ndarray
	phi_phi: np.ndarray
	pi_phi_pi_phi: np.ndarray
	chi_chi: np.ndarray
	pi_chi_pi_chi: np.ndarray
	phi_chi: np.ndarray
	pi_phi_pi_chi: np.ndarray

	def correlator(self, moment: str, separation: Sequence[int]) -> float:
		"""
		Real-space equal-time correlator at a lattice separation.

		Args:
			moment: Name of a per-mode moment field, e.g. "phi_phi"
			separation: Integer lattice vector, one entry per dimension
		"""
		values = getattr(self, moment)
		r = np.asarray(separation, dtype=float)
		if r.shape != (self.momenta.shape[1],):
			raise LatticeError(f"separation must have {self.momenta.shape[1]} components")
		return float(np.mean(values * np.cos(self.momenta @ r)))


@dataclass(frozen=True, eq=False)
class SymplecticSpectrum:
	"""Symplectic eigenvalues nu >= 1/2 of a reduced Gaussian state, one per mode."""

	values: np.ndarray
	excess: np.ndarray

	@classmethod
	def from_squares(cls, nu_squared: np.ndarray) -> "SymplecticSpectrum":
		"""Build from nu^2, clipping roundoff below 1/2."""
		excess_sq = np.asarray(nu_squared, dtype=float) - 0.25
		return cls.from_excess_squared(excess_sq)

	@classmethod
	def from_excess_squared(cls, excess_sq: np.ndarray) -> "SymplecticSpectrum":
		"""Build from nu^2 - 1/4."""
		excess_sq = np.asarray(excess_sq, dtype=float)
		if np.any(excess_sq < -NU_FLOOR_TOLERANCE):
			raise LatticeError(
				f"symplectic eigenvalue below 1/2: nu^2 - 1/4 = {excess_sq.min():.3g}"
			)
		excess_sq = np.maximum(excess_sq, 0.0)
		values = np.sqrt(0.25 + excess_sq)
		return cls(values=values, excess=excess_sq / (values + 0.5))


def lattice_momenta(spec: LatticeSpec) -> np.ndarray:
	"""All L^d lattice momenta 2 pi n / L, shape (L^d, d)."""
	one_dim = 2.0 * math.pi * np.arange(spec.sites_per_dim) / spec.sites_per_dim
	grids = np.meshgrid(*([one_dim] * spec.dims), indexing="ij")
	return np.stack([g.ravel() for g in grids], axis=1)


def ground_state_covariance(spec: LatticeSpec) -> CovarianceData:
	"""
	Per-mode ground-state moments of the coupled pair.

	Each mode diagonalizes [[k^2 + m_phi^2, g], [g, k^2 + m_chi^2]] with
	k^2 = sum_j 4 sin^2(k_j / 2); the vacuum has <q q> = M^(-1/2)/2 and
	<p p> = M^(1/2)/2.

	Raises:
		LatticeError: If any normal-mode frequency squared is <= 0
	"""
	momenta = lattice_momenta(spec)
	k_hat_sq = np.sum(4.0 * np.sin(momenta / 2.0) ** 2, axis=1)
	a = k_hat_sq + spec.mass_phi**2
	b = k_hat_sq + spec.mass_chi**2
	g = spec.bilinear_g

	theta = 0.5 * np.arctan2(2.0 * g, a - b)
	c = np.cos(theta)
	s = np.sin(theta)
	omega_plus_sq = a * c * c + 2.0 * g * s * c + b * s * s
	omega_minus_sq = a * s * s - 2.0 * g * s * c + b * c * c
	if np.min(omega_plus_sq) <= 0 or np.min(omega_minus_sq) <= 0:
		raise LatticeError("a normal mode has omega^2 <= 0; the coupled system is unstable")

	w1 = np.sqrt(omega_plus_sq)
	w2 = np.sqrt(omega_minus_sq)
	return CovarianceData(
		momenta=momenta,
		k_hat_squared=k_hat_sq,
		mixing_angle=theta,
		omega_plus=w1,
		omega_minus=w2,
		phi_phi=0.5 * (c * c / w1 + s * s / w2),
		pi_phi_pi_phi=0.5 * (c * c * w1 + s * s * w2),
		chi_chi=0.5 * (s * s / w1 + c * c / w2),
		pi_chi_pi_chi=0.5 * (s * s * w1 + c * c * w2),
		phi_chi=0.5 * c * s * (1.0 / w1 - 1.0 / w2),
		pi_phi_pi_chi=0.5 * c * s * (w1 - w2),
	)


def _check_field(field: str) -> None:
	if field not in ("phi", "chi"):
		raise LatticeError(f"field must be 'phi' or 'chi', got {field!r}")


def symplectic_spectrum(spec: LatticeSpec, field: Field = "phi") -> SymplecticSpectrum:
	"""
	Per-mode symplectic eigenvalues of the reduced state of one field.

	For a pure two-field mode, nu^2 - 1/4 = -<phi chi><pi_phi pi_chi>, which is
	evaluated directly to keep nu - 1/2 accurate at small coupling. The product is
	symmetric in phi and chi, so both reductions share this spectrum by
	construction; ``field`` is validated and names which reduction is meant.
	"""
	_check_field(field)
	cov = ground_state_covariance(spec)
	return SymplecticSpectrum.from_excess_squared(-cov.phi_chi * cov.pi_phi_pi_chi)


def renyi_from_spectrum(spectrum: SymplecticSpectrum, alpha: Union[int, RenyiIndex]) -> float:
	"""S_alpha = 1/(alpha-1) sum ln[(nu + 1/2)^alpha - (nu - 1/2)^alpha]."""
	index = as_renyi_index(alpha)
	delta = spectrum.excess
	# (1 + delta)^alpha - delta^alpha, kept accurate for delta << 1
	terms = np.log1p(np.expm1(index.alpha * np.log1p(delta)) - delta**index.alpha)
	return float(np.sum(terms)) / (index.alpha - 1) + 0.0


def renyi_field_entropy(
	spec: LatticeSpec,
	alpha: Union[int, RenyiIndex],
	field: Field = "phi",
) -> float:
	"""
	Exact Rényi entropy of one field's reduced ground state.

	Returns 0 exactly when g = 0.
	"""
	if spec.bilinear_g == 0:
		as_renyi_index(alpha)
		return 0.0
	return renyi_from_spectrum(symplectic_spectrum(spec, field), alpha)


def renyi_spectrum(spec: LatticeSpec, alphas: Sequence[int]) -> dict[int, float]:
	"""Rényi entropies for several indices from a single spectrum."""
	spectrum = symplectic_spectrum(spec)
	return {int(a): renyi_from_spectrum(spectrum, a) for a in alphas}


def lattice_laplacian(spec: LatticeSpec) -> np.ndarray:
	"""Dense periodic -Laplacian on the L^d sites."""
	n = spec.n_sites
	index = np.arange(n).reshape((spec.sites_per_dim,) * spec.dims)
	laplacian = 2.0 * spec.dims * np.eye(n)
	for axis in range(spec.dims):
		neighbor = np.roll(index, -1, axis=axis).ravel()
		hop = np.zeros((n, n))
		hop[np.arange(n), neighbor] = 1.0
		laplacian -= hop + hop.T
	return laplacian


def dense_covariance(spec: LatticeSpec) -> tuple[np.ndarray, np.ndarray]:
	"""
	Full ground-state covariances (<q q>, <p p>) over (phi_x..., chi_x...).

	Raises:
		LatticeError: If the quadratic form is not positive definite
	"""
	n = spec.n_sites
	laplacian = lattice_laplacian(spec)
	eye = np.eye(n)
	potential = np.block(
		[
			[laplacian + spec.mass_phi**2 * eye, spec.bilinear_g * eye],
			[spec.bilinear_g * eye, laplacian + spec.mass_chi**2 * eye],
		]
	)
	w, u = linalg.eigh(potential)
	if w.min() <= 0:
		raise LatticeError("dense quadratic form is not positive definite")
	q_cov = 0.5 * (u * w**-0.5) @ u.T
	p_cov = 0.5 * (u * w**0.5) @ u.T
	return q_cov, p_cov


def _reduced_blocks(spec: LatticeSpec, field: Field) -> tuple[np.ndarray, np.ndarray]:
	_check_field(field)
	q_cov, p_cov = dense_covariance(spec)
	n = spec.n_sites
	block = slice(0, n) if field == "phi" else slice(n, 2 * n)
	return q_cov[block, block], p_cov[block, block]


def dense_symplectic_spectrum(spec: LatticeSpec, field: Field = "phi") -> SymplecticSpectrum:
	"""Symplectic eigenvalues from the dense reduced covariance: nu^2 = eig(X^1/2 P X^1/2)."""
	x_block, p_block = _reduced_blocks(spec, field)
	x_w, x_u = linalg.eigh(x_block)
	x_half = (x_u * np.sqrt(x_w)) @ x_u.T
	nu_squared = linalg.eigvalsh(x_half @ p_block @ x_half)
	return SymplecticSpectrum.from_squares(nu_squared)


def dense_renyi_entropy(
	spec: LatticeSpec,
	alpha: Union[int, RenyiIndex],
	field: Field = "phi",
) -> float:
	"""Brute-force Rényi entropy from the dense reduced covariance."""
	return renyi_from_spectrum(dense_symplectic_spectrum(spec, field), alpha)


def dense_purity_entropy(spec: LatticeSpec, field: Field = "phi") -> float:
	"""S_2 = -ln Tr rho^2 = (1/2) ln det(4 X P), without symplectic eigenvalues."""
	x_block, p_block = _reduced_blocks(spec, field)
	sign_x, logdet_x = np.linalg.slogdet(2.0 * x_block)
	sign_p, logdet_p = np.linalg.slogdet(2.0 * p_block)
	if sign_x <= 0 or sign_p <= 0:
		raise LatticeError("reduced covariance is not positive definite")
	return 0.5 * (logdet_x + logdet_p)


@dataclass(frozen=True)
class OracleReport:
	"""Structural checks of the perturbative predictions on the exact lattice."""

	alpha: int
	couplings: tuple[float, ...]
	entropies: tuple[float, ...]
	exponent: float
	exponent_residual: float
	ratio_alpha: int
	ratio: float
	expected_ratio: float
	sizes: tuple[int, ...]
	per_site: tuple[float, ...]
	differences: tuple[float, ...]
	converging: bool

	def as_dict(self) -> dict[str, Any]:
		return {
			"alpha": self.alpha,
			"couplings": list(self.couplings),
			"entropies": list(self.entropies),
			"exponent": self.exponent,
			"exponent_residual": self.exponent_residual,
			"ratio_alpha": self.ratio_alpha,
			"ratio": self.ratio,
			"expected_ratio": self.expected_ratio,
			"sizes": list(self.sizes),
			"per_site": list(self.per_site),
			"differences": list(self.differences),
			"converging": self.converging,
		}


def perturbative_check(
	base: LatticeSpec,
	couplings: Sequence[float],
	sizes: Sequence[int],
	alpha: Union[int, RenyiIndex] = 2,
	volume_coupling: float = 0.3,
) -> OracleReport:
	"""
	Compare the exact lattice entropy with the structure of the O(g^2) result.

	(a) exponent of S_alpha(g) as g -> 0 (expected 2), fitted over ``couplings``
	on ``base``; (b) S_(alpha+1)/S_alpha at the smallest coupling against
	[(alpha+1)/alpha] / [alpha/(alpha-1)]; (c) per-site entropy S/L^d at
	``volume_coupling`` for each lattice size, which should settle to a constant.

	Raises:
		LatticeError: On fewer than two couplings or sizes, or unstable specs
	"""
	index = as_renyi_index(alpha)
	if len(couplings) < 2:
		raise LatticeError(f"need at least 2 couplings, got {len(couplings)}")
	if len(sizes) < 2:
		raise LatticeError(f"need at least 2 lattice sizes, got {len(sizes)}")
	if any(g <= 0 for g in couplings):
		raise LatticeError("couplings must be > 0 for the exponent fit")

	entropies = [renyi_field_entropy(base.with_coupling(g), index) for g in couplings]
	fit = fit_loglog(couplings, entropies)

	smallest = base.with_coupling(min(couplings))
	next_alpha = index.alpha + 1
	pair = renyi_spectrum(smallest, [index.alpha, next_alpha])
	ratio = pair[next_alpha] / pair[index.alpha]
	expected = (next_alpha / (next_alpha - 1)) / index.prefactor

	ordered = sorted(int(L) for L in sizes)
	per_site = [
		renyi_field_entropy(base.with_size(L).with_coupling(volume_coupling), index) / L**base.dims
		for L in ordered
	]
	differences = [abs(b - a) for a, b in zip(per_site[:-1], per_site[1:])]
	converging = all(later <= earlier for earlier, later in zip(differences[:-1], differences[1:]))
	logger.debug("oracle exponent %.4f, ratio %.4f, per-site %s", fit.exponent, ratio, per_site)

	return OracleReport(
		alpha=index.alpha,
		couplings=tuple(float(g) for g in couplings),
		entropies=tuple(entropies),
		exponent=fit.exponent,
		exponent_residual=fit.residual,
		ratio_alpha=next_alpha,
		ratio=ratio,
		expected_ratio=expected,
		sizes=tuple(ordered),
		per_site=tuple(per_site),
		differences=tuple(differences),
		converging=converging,
	)
