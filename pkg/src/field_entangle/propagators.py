"""
Euclidean scalar propagators in four dimensions.

Momentum-space and position-space free propagators, and their Pauli-Villars
regulated versions (one heavy regulator subtracted per line).
"""

import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
from scipy import special

ArrayLike = Union[float, np.ndarray]

FOUR_PI_SQUARED = 4.0 * math.pi**2

# Below this argument 1 - z K1(z) is evaluated from its power series
SERIES_THRESHOLD = 0.1
_SERIES_TERMS = 7

# (psi(k+1) + psi(k+2)) / (k! (k+1)!) from the small-argument expansion of K1
_SERIES_COEFFICIENTS = tuple(
	float(special.psi(k + 1) + special.psi(k + 2)) / (math.factorial(k) * math.factorial(k + 1))
	for k in range(_SERIES_TERMS)
)


class PropagatorError(Exception):
	"""Raised for singular or out-of-domain propagator arguments."""

	pass


def _output(values: np.ndarray, scalar: bool) -> ArrayLike:
	return float(values) if scalar else values


def _one_minus_zk1(z: np.ndarray) -> np.ndarray:
	"""1 - z K1(z) for z >= 0, without cancellation at small z."""
	out = np.empty_like(z)
	small = z < SERIES_THRESHOLD

	zs = z[small]
	quarter_sq = zs * zs / 4.0
	series = np.zeros_like(zs)
	power = np.ones_like(zs)
	for coefficient in _SERIES_COEFFICIENTS:
		series += coefficient * power
		power *= quarter_sq
	with np.errstate(divide="ignore", invalid="ignore"):
		log_term = np.where(zs > 0, zs * np.log(zs / 2.0) * special.i1(zs), 0.0)
	out[small] = -log_term + quarter_sq * series

	zl = z[~small]
	out[~small] = 1.0 - zl * special.k1(zl)
	return out


def _zk1(z: np.ndarray) -> np.ndarray:
	"""z K1(z) with the limit value 1 at z = 0."""
	with np.errstate(invalid="ignore"):
		return np.where(z > 0, z * special.k1(np.where(z > 0, z, 1.0)), 1.0)


def _check_separation(s: np.ndarray) -> None:
	if np.any(~np.isfinite(s)) or np.any(s <= 0):
		raise PropagatorError(f"separation must be finite and > 0, got min {np.min(s)}")


def _check_mass(mass: float, name: str = "mass") -> None:
	if not math.isfinite(mass) or mass < 0:
		raise PropagatorError(f"{name} must be finite and >= 0, got {mass}")


def momentum_propagator(k_squared: ArrayLike, mass: float) -> ArrayLike:
	"""
	Free Euclidean propagator 1/(k^2 + m^2).

	Raises:
		PropagatorError: At the massless pole k^2 = m = 0 or for k^2 < 0
	"""
	_check_mass(mass)
	scalar = np.ndim(k_squared) == 0
	k2 = np.asarray(k_squared, dtype=float)
	if np.any(k2 < 0):
		raise PropagatorError("Euclidean k^2 must be >= 0")

	denominator = k2 + mass * mass
	if np.any(denominator == 0):
		raise PropagatorError("propagator is singular at k^2 + m^2 = 0")
	return _output(1.0 / denominator, scalar)


def position_propagator(separation: ArrayLike, mass: float) -> ArrayLike:
	"""
	Free Euclidean propagator at distance s in four dimensions.

	m K1(m s) / (4 pi^2 s) for m > 0 and 1/(4 pi^2 s^2) for m = 0.

	Args:
		separation: Euclidean distance s > 0 (scalar or array)
		mass: Field mass m >= 0

	Returns:
		Propagator value(s), same shape as ``separation``

	Raises:
		PropagatorError: If s <= 0 or m < 0
	"""
	_check_mass(mass)
	scalar = np.ndim(separation) == 0
	s = np.asarray(separation, dtype=float)
	_check_separation(s)

	if mass == 0:
		return _output(1.0 / (FOUR_PI_SQUARED * s * s), scalar)
	return _output(_zk1(mass * s) / (FOUR_PI_SQUARED * s * s), scalar)


def pv_position_propagator(
	separation: ArrayLike,
	physical_mass: float,
	regulator_mass: float,
) -> ArrayLike:
	"""
	Pauli-Villars regulated propagator G(s; m) - G(s; Lambda).

	The 1/s^2 singularities cancel, leaving a logarithmic behavior at s -> 0.

	Raises:
		PropagatorError: If s <= 0 or regulator_mass <= physical_mass
	"""
	_check_mass(physical_mass, "physical_mass")
	if not math.isfinite(regulator_mass) or regulator_mass <= physical_mass:
		raise PropagatorError(
			f"regulator_mass must exceed physical_mass, got {regulator_mass} <= {physical_mass}"
		)

	scalar = np.ndim(separation) == 0
	s = np.asarray(separation, dtype=float)
	_check_separation(s)

	z_phys = physical_mass * s
	z_reg = regulator_mass * s
	near = z_reg < SERIES_THRESHOLD
	difference = np.empty_like(s)
	difference[near] = _one_minus_zk1(z_reg[near]) - _one_minus_zk1(z_phys[near])
	difference[~near] = _zk1(z_phys[~near]) - _zk1(z_reg[~near])
	return _output(difference / (FOUR_PI_SQUARED * s * s), scalar)


@dataclass(frozen=True)
class RegulatedPropagator:
	"""
	One propagator line: a physical mass and its Pauli-Villars regulator.

	``regulator_mass=None`` leaves the line unregulated.
	"""

	physical_mass: float
	regulator_mass: Optional[float]

	def __post_init__(self) -> None:
		_check_mass(self.physical_mass, "physical_mass")
		if self.regulator_mass is not None and not self.regulator_mass > self.physical_mass:
			raise PropagatorError(
				f"regulator_mass must exceed physical_mass, "
				f"got {self.regulator_mass} <= {self.physical_mass}"
			)

	@property
	def is_regulated(self) -> bool:
		return self.regulator_mass is not None

	def __call__(self, separation: ArrayLike) -> ArrayLike:
		if self.regulator_mass is None:
			return position_propagator(separation, self.physical_mass)
		return pv_position_propagator(separation, self.physical_mass, self.regulator_mass)

	def momentum(self, k_squared: ArrayLike) -> ArrayLike:
		"""Regulated momentum-space propagator 1/(k^2+m^2) - 1/(k^2+Lambda^2)."""
		value = momentum_propagator(k_squared, self.physical_mass)
		if self.regulator_mass is None:
			return value
		# (L^2 - m^2) / ((k^2 + m^2)(k^2 + L^2)), free of cancellation at large k
		gap = self.regulator_mass**2 - self.physical_mass**2
		return gap * value * momentum_propagator(k_squared, self.regulator_mass)

	def scaled(self, factor: float) -> "RegulatedPropagator":
		"""Same line with every mass multiplied by ``factor``."""
		regulator = None if self.regulator_mass is None else self.regulator_mass * factor
		return RegulatedPropagator(self.physical_mass * factor, regulator)
