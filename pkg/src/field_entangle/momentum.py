"""
Momentum-space evaluation of the discordant half-space integral.

All but one propagator line are kept in momentum space and sampled; the last
line carries the Fourier transform of the |tau| weight that the discordant
half-space pair produces:

	h(Q) = (|Q_vec|^2 - Q_0^2 + m^2) / (sqrt(|Q_vec|^2 + m^2) * (Q^2 + m^2)^2)

with Q the total momentum flowing through the other lines.
"""

import math
from collections.abc import Sequence
from typing import Optional

import numpy as np

from field_entangle.propagators import RegulatedPropagator
from field_entangle.quad import DEFAULT_CHUNK_SIZE, QuadratureError, QuadratureResult, mc_integrate

TWO_PI_TO_FOURTH = (2.0 * math.pi) ** 4


def halfspace_kernel(q: np.ndarray, mass: float) -> np.ndarray:
	"""
	Fourier transform of |tau| G(x; m) at four-momentum q (shape (n, 4)).

	Raises:
		QuadratureError: If mass < 0
	"""
	if mass < 0:
		raise QuadratureError(f"kernel mass must be >= 0, got {mass}")
	q0_sq = q[:, 0] ** 2
	spatial_sq = np.sum(q[:, 1:] ** 2, axis=1)
	m2 = mass * mass
	energy_sq = spatial_sq + m2
	with np.errstate(divide="ignore", invalid="ignore"):
		return (energy_sq - q0_sq) / (np.sqrt(energy_sq) * (energy_sq + q0_sq) ** 2)


def regulated_kernel(q: np.ndarray, line: RegulatedPropagator) -> np.ndarray:
	"""Kernel of a Pauli-Villars regulated line (physical minus regulator)."""
	value = halfspace_kernel(q, line.physical_mass)
	if line.regulator_mass is None:
		return value
	return value - halfspace_kernel(q, line.regulator_mass)


def _unit_vectors(rng: np.random.Generator, n: int, dims: int) -> np.ndarray:
	direction = rng.standard_normal((n, dims))
	return direction / np.linalg.norm(direction, axis=1, keepdims=True)


class LineMomentumDensity:
	"""
	Isotropic four-momentum density with radial law 2 a k / (k + a)^3.

	Against it a regulated line 1/(k^2+m^2) - 1/(k^2+a^2) has a weight that is
	flat between m and a and grows only linearly above a. The radial CDF is
	(k / (k + a))^2, inverted in closed form.
	"""

	def __init__(self, scale: float):
		if scale <= 0:
			raise QuadratureError(f"momentum scale must be > 0, got {scale}")
		self.scale = scale

	def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
		root = np.sqrt(rng.random(n))
		radius = self.scale * root / (1.0 - root)
		return radius[:, None] * _unit_vectors(rng, n, 4)

	def pdf(self, k: np.ndarray) -> np.ndarray:
		radius = np.linalg.norm(k, axis=1)
		return self.scale / (math.pi**2 * radius**2 * (radius + self.scale) ** 3)


class KernelMomentumDensity:
	"""
	Density of the total momentum Q matched to the regulated half-space kernel.

	|Q_vec| = q follows q^2 (1/(q^2+m^2) - 1/(q^2+M^2)) and, given q, Q_0 is
	Cauchy with width sqrt(q^2+m^2). The product stays within a bounded factor
	of |h_m(Q) - h_M(Q)|, including the 1/Q_0^2 ridge along the time axis.
	"""

	BISECTION_STEPS = 60

	def __init__(self, light: float, heavy: float):
		if light < 0 or not heavy > light:
			raise QuadratureError(
				f"kernel density needs 0 <= light < heavy, got light={light}, heavy={heavy}"
			)
		self.light = light
		self.heavy = heavy
		self._norm = 0.5 * math.pi * (heavy - light)

	def spatial_cdf(self, q: np.ndarray) -> np.ndarray:
		"""P(|Q_vec| <= q) = (M atan(q/M) - m atan(q/m)) / (pi (M - m) / 2)."""
		cdf = self.heavy * np.arctan(q / self.heavy)
		if self.light > 0:
			cdf = cdf - self.light * np.arctan(q / self.light)
		return cdf / self._norm

	def _spatial_radius(self, u: np.ndarray) -> np.ndarray:
		# Bisection in y = q / (q + M), which maps [0, inf) onto [0, 1)
		lo = np.zeros_like(u)
		hi = np.ones_like(u)
		for _ in range(self.BISECTION_STEPS):
			mid = 0.5 * (lo + hi)
			below = self.spatial_cdf(self.heavy * mid / (1.0 - mid)) < u
			lo = np.where(below, mid, lo)
			hi = np.where(below, hi, mid)
		y = 0.5 * (lo + hi)
		return self.heavy * y / (1.0 - y)

	def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
		q = self._spatial_radius(rng.random(n))
		width = np.sqrt(q * q + self.light**2)
		out = np.empty((n, 4))
		out[:, 0] = width * np.tan(math.pi * (rng.random(n) - 0.5))
		out[:, 1:] = q[:, None] * _unit_vectors(rng, n, 3)
		return out

	def pdf(self, total: np.ndarray) -> np.ndarray:
		q_squared = np.sum(total[:, 1:] ** 2, axis=1)
		light_sq = self.light**2
		heavy_sq = self.heavy**2
		spatial = (heavy_sq - light_sq) / (
			4.0 * math.pi * self._norm * (q_squared + light_sq) * (q_squared + heavy_sq)
		)
		width_sq = q_squared + light_sq
		cauchy = np.sqrt(width_sq) / (math.pi * (total[:, 0] ** 2 + width_sq))
		return spatial * cauchy


def momentum_integral(
	lines: Sequence[RegulatedPropagator],
	samples: int,
	seed: int,
	scale: Optional[float] = None,
	workers: int = 1,
	tolerance: Optional[float] = None,
	chunk_size: int = DEFAULT_CHUNK_SIZE,
) -> QuadratureResult:
	"""
	Monte Carlo estimate of int d^4r |r_0| prod_i P_i(r) in momentum space.

	Equals the position-space discordant integral of the same lines. All
	sampled momenta but the last are drawn from ``LineMomentumDensity``. The
	last one closes the sum Q that enters the kernel: half of the draws take it
	from the same line density, the other half draw Q from
	``KernelMomentumDensity``, and every weight uses the two-channel mixture
	density.

	Args:
		lines: At least two propagator lines; the last one carries the kernel
		samples: Sample budget
		seed: Base seed
		scale: Momentum scale of the line density (default: largest regulator)
		workers: Worker threads
		tolerance: Optional relative error to enforce

	Returns:
		QuadratureResult
	"""
	if len(lines) < 2:
		raise QuadratureError(f"need at least 2 lines, got {len(lines)}")

	*sampled, kernel_line = lines
	*free, closing = sampled
	if scale is None:
		masses = [ln.regulator_mass or ln.physical_mass for ln in lines]
		scale = max(masses) or 1.0
	line_density = LineMomentumDensity(scale)
	light = kernel_line.physical_mass
	heavy = kernel_line.regulator_mass or max(scale, 2.0 * light)
	total_density = KernelMomentumDensity(light, heavy)
	normalization = TWO_PI_TO_FOURTH ** len(sampled)

	def sampler(rng: np.random.Generator, n: int) -> np.ndarray:
		weight = np.full(n, 1.0 / normalization)
		partial = np.zeros((n, 4))
		for line in free:
			k = line_density.sample(rng, n)
			weight *= np.asarray(line.momentum(np.sum(k**2, axis=1))) / line_density.pdf(k)
			partial += k

		from_kernel = rng.random(n) < 0.5
		direct = partial + line_density.sample(rng, n)
		total = np.where(from_kernel[:, None], total_density.sample(rng, n), direct)
		k = total - partial
		mixture = 0.5 * (total_density.pdf(total) + line_density.pdf(k))
		weight *= np.asarray(closing.momentum(np.sum(k**2, axis=1))) / mixture
		return weight * regulated_kernel(total, kernel_line)

	return mc_integrate(sampler, samples, seed, workers, tolerance, chunk_size)
