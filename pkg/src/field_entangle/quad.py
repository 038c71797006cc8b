"""
Numerical integration engines.

Adaptive radial quadrature for the reduced one-dimensional integrals, and a
seeded, chunked Monte Carlo engine for the half-space pair and for momentum
space. Monte Carlo results depend only on (seed, samples, chunk_size): the
worker count changes wall time, never bits.
"""

import logging
import math
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import integrate

logger = logging.getLogger(__name__)

DEFAULT_RADIAL_TOLERANCE = 1e-8
DEFAULT_MC_TOLERANCE = 1e-3
DEFAULT_CHUNK_SIZE = 50_000
MIN_TOLERANCE = 1e-12
MAX_TOLERANCE = 1e-2

# Segments where the integrand stays below this fraction of its peak are dropped
TAIL_RATIO = 1e-16

_GRID_DECADES = 12
_GRID_POINTS_PER_DECADE = 8
_QUAD_LIMIT = 200

HalfspaceIntegrand = Callable[[np.ndarray, np.ndarray], np.ndarray]
WeightSampler = Callable[[np.random.Generator, int], np.ndarray]


class QuadratureError(Exception):
	"""Raised when an integration cannot reach its requested accuracy."""

	pass


class PrecisionError(QuadratureError):
	"""Monte Carlo relative error above the requested tolerance."""

	pass


@dataclass(frozen=True)
class QuadratureResult:
	"""Value and error estimate of one integration."""

	value: float
	error: float
	evaluations: int
	converged: bool

	@property
	def relative_error(self) -> float:
		if self.value == 0:
			return 0.0 if self.error == 0 else math.inf
		return self.error / abs(self.value)


def _log_grid(scale: float, lower: float) -> np.ndarray:
	half = _GRID_DECADES // 2
	exponents = np.arange(-half * _GRID_POINTS_PER_DECADE, half * _GRID_POINTS_PER_DECADE + 1)
	grid = scale * 10.0 ** (exponents / _GRID_POINTS_PER_DECADE)
	return grid[grid > lower]


def _inverted_tail(integrand: Callable[[float], float], start: float) -> Callable[[float], float]:
	"""Map (start, inf) onto (0, 1] through s = start / t."""

	def mapped(t: float) -> float:
		return integrand(start / t) * start / (t * t) if t > 0 else 0.0

	return mapped


def adaptive_radial(
	integrand: Callable[[float], float],
	lower: float = 0.0,
	tolerance: float = DEFAULT_RADIAL_TOLERANCE,
	scale: float = 1.0,
	breakpoints: Sequence[float] = (),
	max_evaluations: int = 500_000,
	raise_on_failure: bool = True,
) -> QuadratureResult:
	"""
	Integrate a radial integrand over (lower, infinity).

	The half-line is split at every decade of ``scale`` so each piece is handled
	by an adaptive Gauss-Kronrod rule (scipy ``quad``). The integrand is scanned
	on a logarithmic grid first; beyond the last point where it exceeds
	TAIL_RATIO times its peak the remainder is dropped, and if it never falls
	that far the remaining tail is integrated over (0, 1] in t = s_end / s.

	Args:
		integrand: Scalar function of s, integrable with a decaying tail
		lower: Lower limit, >= 0
		tolerance: Relative tolerance in [1e-12, 1e-2]
		scale: Characteristic length where the integrand peaks
		breakpoints: Extra segment boundaries (e.g. known discontinuities)
		max_evaluations: Total integrand evaluation budget
		raise_on_failure: Raise instead of returning converged=False

	Returns:
		QuadratureResult

	Raises:
		QuadratureError: On invalid arguments, or on non-convergence when
			``raise_on_failure`` is set
	"""
	if not MIN_TOLERANCE <= tolerance <= MAX_TOLERANCE:
		raise QuadratureError(
			f"tolerance must lie in [{MIN_TOLERANCE}, {MAX_TOLERANCE}], got {tolerance}"
		)
	if lower < 0 or not math.isfinite(lower):
		raise QuadratureError(f"lower limit must be finite and >= 0, got {lower}")
	if scale <= 0:
		raise QuadratureError(f"scale must be > 0, got {scale}")

	grid = _log_grid(scale, lower)
	samples = np.array([abs(integrand(float(s))) for s in grid])
	evaluations = len(grid)
	if not np.all(np.isfinite(samples)):
		raise QuadratureError("integrand is not finite on the scan grid")

	peak = float(samples.max()) if len(samples) else 0.0
	if peak == 0.0:
		return QuadratureResult(0.0, 0.0, evaluations, True)

	# Rough magnitude from a log-trapezoid rule, used for the absolute floor
	log_step = math.log(10.0) / _GRID_POINTS_PER_DECADE
	rough = float(np.sum(samples * grid)) * log_step

	significant = np.nonzero(samples >= TAIL_RATIO * peak)[0]
	last = int(significant[-1])
	upper = math.inf if last >= len(grid) - 1 else float(grid[last + 1])

	decades = [float(s) for s in grid[:: _GRID_POINTS_PER_DECADE] if s < upper]
	edges = sorted({lower, *decades, *(b for b in breakpoints if lower < b < upper)})
	edges.append(upper)

	n_segments = len(edges) - 1
	absolute_floor = 0.1 * tolerance * rough
	epsabs = absolute_floor / n_segments

	value = 0.0
	error = 0.0
	all_ok = True
	for a, b in zip(edges[:-1], edges[1:]):
		if math.isinf(b):
			segment, lo, hi = _inverted_tail(integrand, a), 0.0, 1.0
		else:
			segment, lo, hi = integrand, a, b
		out = integrate.quad(
			segment, lo, hi, epsabs=epsabs, epsrel=tolerance, limit=_QUAD_LIMIT, full_output=1
		)
		value += out[0]
		error += out[1]
		evaluations += int(out[2]["neval"])
		if len(out) > 3:
			all_ok = False
			logger.debug("quad segment [%g, %g] reported: %s", a, b, out[3])

	converged = (
		all_ok
		and evaluations <= max_evaluations
		and error <= tolerance * abs(value) + absolute_floor
	)
	logger.debug(
		"radial quadrature: %d segments, value=%.12g, error=%.3g, evaluations=%d",
		n_segments,
		value,
		error,
		evaluations,
	)

	if not converged and raise_on_failure:
		raise QuadratureError(
			f"radial quadrature did not converge: value={value:.6g}, error={error:.3g}, "
			f"tolerance={tolerance}, evaluations={evaluations}"
		)
	return QuadratureResult(value, error, evaluations, converged)


def _chunk_moments(sampler: WeightSampler, seed_seq: np.random.SeedSequence, size: int):
	rng = np.random.default_rng(seed_seq)
	weights = np.asarray(sampler(rng, size), dtype=float)
	if weights.shape != (size,):
		raise QuadratureError(f"sampler returned shape {weights.shape}, expected ({size},)")
	if not np.all(np.isfinite(weights)):
		raise QuadratureError("Monte Carlo weights contain non-finite values")
	mean = float(weights.mean())
	m2 = float(np.sum((weights - mean) ** 2))
	return size, mean, m2


def mc_integrate(
	sampler: WeightSampler,
	samples: int,
	seed: int,
	workers: int = 1,
	tolerance: Optional[float] = None,
	chunk_size: int = DEFAULT_CHUNK_SIZE,
) -> QuadratureResult:
	"""
	Average importance weights drawn in fixed-size, independently seeded chunks.

	Chunk i always uses the i-th child of ``SeedSequence(seed)`` and chunks are
	combined in order, so the estimate is bitwise reproducible for any
	``workers``.

	Args:
		sampler: ``sampler(rng, n)`` returns n importance weights
		samples: Total number of samples (>= 2)
		seed: Base seed
		workers: Worker threads
		tolerance: Relative error to enforce; None only logs a warning when the
			default target is missed

	Raises:
		QuadratureError: On invalid arguments or non-finite weights
		PrecisionError: If ``tolerance`` is given and not reached
	"""
	if samples < 2:
		raise QuadratureError(f"need at least 2 samples, got {samples}")
	if chunk_size < 1:
		raise QuadratureError(f"chunk_size must be >= 1, got {chunk_size}")
	if workers < 1:
		raise QuadratureError(f"workers must be >= 1, got {workers}")

	n_chunks = -(-samples // chunk_size)
	sizes = [chunk_size] * (n_chunks - 1) + [samples - chunk_size * (n_chunks - 1)]
	seeds = np.random.SeedSequence(seed).spawn(n_chunks)

	def run(index: int):
		return _chunk_moments(sampler, seeds[index], sizes[index])

	if workers == 1:
		moments = [run(i) for i in range(n_chunks)]
	else:
		with ThreadPoolExecutor(max_workers=workers) as pool:
			moments = list(pool.map(run, range(n_chunks)))

	count, mean, m2 = moments[0]
	for n_b, mean_b, m2_b in moments[1:]:
		total = count + n_b
		delta = mean_b - mean
		mean += delta * n_b / total
		m2 += m2_b + delta * delta * count * n_b / total
		count = total

	error = math.sqrt(m2 / (count - 1) / count)
	target = DEFAULT_MC_TOLERANCE if tolerance is None else tolerance
	converged = error <= target * abs(mean) or (mean == 0 and error == 0)
	logger.debug(
		"Monte Carlo: %d samples in %d chunks, value=%.8g ± %.3g", count, n_chunks, mean, error
	)

	if not converged:
		if tolerance is not None:
			raise PrecisionError(
				f"Monte Carlo relative error {error / abs(mean) if mean else math.inf:.3g} "
				f"exceeds tolerance {tolerance} after {count} samples"
			)
		logger.warning(
			"Monte Carlo relative error %.3g above the %.0e target after %d samples",
			error / abs(mean) if mean else math.inf,
			target,
			count,
		)
	return QuadratureResult(mean, error, count, converged)


class HalfspaceDensity:
	"""
	Importance density for the relative separation of a discordant vertex pair.

	Radial mixture: a Gamma(5) core at ``scale`` (integrands rise like s^4 up
	to s ~ 1/Lambda), a log-uniform middle out to 1/``tail_rate``, and a tail
	beyond it (exponential at ``tail_rate``, or a heavy s^-2 floor when the
	lightest line is massless). Directions are uniform on the half 3-sphere
	with positive time component.
	"""

	CORE_WEIGHT = 0.5
	MIDDLE_WEIGHT = 0.3
	TAIL_WEIGHT = 0.2
	FAR_FACTOR = 1e3

	def __init__(self, scale: float, tail_rate: float = 0.0):
		if scale <= 0:
			raise QuadratureError(f"sampler scale must be > 0, got {scale}")
		if tail_rate < 0:
			raise QuadratureError(f"tail rate must be >= 0, got {tail_rate}")
		self.scale = scale
		self.tail_rate = tail_rate
		far = 1.0 / tail_rate if tail_rate > 0 else self.FAR_FACTOR * scale
		self.far = max(far, 10.0 * scale)
		self._log_span = math.log(self.far / scale)

	def radial_density(self, s: np.ndarray) -> np.ndarray:
		ell = self.scale
		core = s**4 * np.exp(-s / ell) / (24.0 * ell**5)
		middle = np.where((s >= ell) & (s <= self.far), 1.0 / (s * self._log_span), 0.0)
		beyond = s >= self.far
		if self.tail_rate > 0:
			tail = np.where(beyond, self.tail_rate * np.exp(-self.tail_rate * (s - self.far)), 0.0)
		else:
			tail = np.where(beyond, self.far / np.maximum(s, self.far) ** 2, 0.0)
		return self.CORE_WEIGHT * core + self.MIDDLE_WEIGHT * middle + self.TAIL_WEIGHT * tail

	def sample_radius(self, rng: np.random.Generator, n: int) -> np.ndarray:
		weights = [self.CORE_WEIGHT, self.MIDDLE_WEIGHT, self.TAIL_WEIGHT]
		component = rng.choice(3, size=n, p=weights)
		s = np.empty(n)

		core = component == 0
		s[core] = rng.gamma(5.0, self.scale, size=int(core.sum()))

		middle = component == 1
		s[middle] = self.scale * np.exp(self._log_span * rng.random(int(middle.sum())))

		tail = component == 2
		n_tail = int(tail.sum())
		if self.tail_rate > 0:
			s[tail] = self.far + rng.exponential(1.0 / self.tail_rate, size=n_tail)
		else:
			s[tail] = self.far / (1.0 - rng.random(n_tail))
		return s

	def sample_pairs(self, rng: np.random.Generator, n: int):
		"""
		Draw vertex pairs (x, y) with tau_x > 0 > tau_y.

		Returns:
			(x, y, weight_factor) where the estimate of the discordant integral
			per unit volume is weight_factor * integrand(x, y)
		"""
		s = self.sample_radius(rng, n)
		direction = rng.standard_normal((n, 4))
		direction /= np.linalg.norm(direction, axis=1, keepdims=True)
		cos_theta = np.abs(direction[:, 0])
		t = s * cos_theta
		tau_x = t * rng.random(n)

		x = np.zeros((n, 4))
		y = np.zeros((n, 4))
		x[:, 0] = tau_x
		y[:, 0] = tau_x - t
		y[:, 1:] = -s[:, None] * direction[:, 1:]

		# 2 orderings * T (uniform tau_x) / [q(s) / (pi^2 s^3)]
		weight_factor = 2.0 * t * math.pi**2 * s**3 / self.radial_density(s)
		return x, y, weight_factor


def mc_halfspaces(
	integrand: HalfspaceIntegrand,
	sampler_scale: float,
	samples: int,
	seed: int,
	tail_rate: float = 0.0,
	workers: int = 1,
	tolerance: Optional[float] = None,
	chunk_size: int = DEFAULT_CHUNK_SIZE,
) -> QuadratureResult:
	"""
	Monte Carlo estimate of 2 * int_{tau_x>0} d^4x int_{tau_y<0} d^4y f(x, y) per unit 3-volume.

	The integrand must depend on x - y only; it receives arrays of shape (n, 4)
	and returns n values.

	Args:
		integrand: Vectorized f(x, y)
		sampler_scale: Length where the integrand peaks (about 1/cutoff)
		samples: Sample budget
		seed: Base seed
		tail_rate: Decay rate of the integrand at large separation (lightest mass)
		workers: Worker threads
		tolerance: Optional relative error to enforce

	Returns:
		QuadratureResult
	"""
	density = HalfspaceDensity(sampler_scale, tail_rate)

	def sampler(rng: np.random.Generator, n: int) -> np.ndarray:
		x, y, factor = density.sample_pairs(rng, n)
		return factor * np.asarray(integrand(x, y), dtype=float)

	return mc_integrate(sampler, samples, seed, workers, tolerance, chunk_size)
