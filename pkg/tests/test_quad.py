"""
Tests for the integration engines.

Tests adaptive radial quadrature, the chunked Monte Carlo engine and the
half-space importance sampler.
"""

import logging
import math

import numpy as np
import pytest

from field_entangle.propagators import RegulatedPropagator
from field_entangle.quad import (
	HalfspaceDensity,
	PrecisionError,
	QuadratureError,
	QuadratureResult,
	adaptive_radial,
	mc_halfspaces,
	mc_integrate,
)
from field_entangle.replica import REDUCTION_CONSTANT, radial_integrand


def log_gauss_legendre(integrand, lower: float, upper: float, panels: int = 96, nodes: int = 24):
	"""Composite Gauss-Legendre rule in t = ln s."""
	x, w = np.polynomial.legendre.leggauss(nodes)
	edges = np.linspace(math.log(lower), math.log(upper), panels + 1)
	total = 0.0
	for a, b in zip(edges[:-1], edges[1:]):
		t = 0.5 * (b - a) * x + 0.5 * (b + a)
		s = np.exp(t)
		values = np.array([integrand(float(si)) for si in s])
		total += 0.5 * (b - a) * float(np.sum(w * values * s))
	return total


def exponential_halfspace(rate: float):
	"""f(x, y) = exp(-rate |x - y|); its discordant integral is (8 pi/3) 24/rate^5."""

	def integrand(x: np.ndarray, y: np.ndarray) -> np.ndarray:
		return np.exp(-rate * np.linalg.norm(x - y, axis=1))

	return integrand


def test_gamma_moment():
	"""Test int s^4 e^-s = 24."""
	result = adaptive_radial(lambda s: s**4 * math.exp(-s), tolerance=1e-11)
	assert result.value == pytest.approx(24.0, rel=1e-10)
	assert result.converged
	assert result.error < 1e-8


def test_windowed_constant_integrand():
	"""Test a constant integrand on a window, with breakpoints at the edges."""
	height = 1.0 / (16.0 * math.pi**4)

	def integrand(s: float) -> float:
		return s**4 * (1.0 / (4.0 * math.pi**2 * s * s)) ** 2 if 1.0 <= s <= 3.0 else 0.0

	result = adaptive_radial(integrand, scale=1.0, breakpoints=(1.0, 3.0))
	assert result.value == pytest.approx(2.0 * height, rel=1e-10)


def test_lower_limit():
	"""Test int_1^inf e^-s = e^-1."""
	result = adaptive_radial(lambda s: math.exp(-s), lower=1.0)
	assert result.value == pytest.approx(math.exp(-1.0), rel=1e-9)


def test_power_law_tail():
	"""Test an integrand that never drops below the tail ratio on the scan grid."""
	result = adaptive_radial(lambda s: 1.0 / (1.0 + s) ** 2)
	assert result.value == pytest.approx(1.0, rel=1e-8)
	assert result.converged


def test_slow_tail_beyond_scan_grid():
	"""Test (1 + s)^-1.5, which keeps 2e-3 of its mass beyond the last grid point."""
	result = adaptive_radial(lambda s: (1.0 + s) ** -1.5)
	assert result.value == pytest.approx(2.0, rel=1e-6)


def test_zero_integrand():
	"""Test that an identically zero integrand returns exactly zero."""
	result = adaptive_radial(lambda s: 0.0)
	assert result.value == 0.0
	assert result.error == 0.0
	assert result.converged


def test_ddkk_integrand_matches_reference_rule():
	"""Test the DDKK radial integrand at m = 1, cutoff = 20 against a fixed rule."""
	lines = [RegulatedPropagator(1.0, 20.0)] * 4
	integrand = radial_integrand(lines)
	reference = log_gauss_legendre(integrand, 1e-9, 40.0)
	result = adaptive_radial(integrand, scale=1.0 / 20.0)
	assert result.value == pytest.approx(reference, rel=1e-8)


@pytest.mark.parametrize("tolerance", [0.0, 1e-13, 0.1])
def test_tolerance_bounds(tolerance):
	"""Test that tolerances outside [1e-12, 1e-2] are rejected."""
	with pytest.raises(QuadratureError, match="tolerance"):
		adaptive_radial(lambda s: math.exp(-s), tolerance=tolerance)


def test_rejects_negative_lower_limit():
	"""Test the lower limit precondition."""
	with pytest.raises(QuadratureError, match="lower"):
		adaptive_radial(lambda s: math.exp(-s), lower=-1.0)


def test_non_finite_integrand():
	"""Test that NaN on the scan grid is an integration error."""
	with pytest.raises(QuadratureError, match="not finite"):
		adaptive_radial(lambda s: math.nan)


def test_non_convergence_reported_without_raising():
	"""Test raise_on_failure=False on an integrand quad cannot resolve."""

	def integrand(s: float) -> float:
		return math.sin(1.0 / s) / s if s < 1.0 else 0.0

	result = adaptive_radial(integrand, tolerance=1e-12, raise_on_failure=False)
	assert isinstance(result, QuadratureResult)
	assert not result.converged


def test_relative_error_property():
	"""Test relative_error, including the zero-value case."""
	assert QuadratureResult(2.0, 0.1, 10, True).relative_error == pytest.approx(0.05)
	assert QuadratureResult(0.0, 0.0, 10, True).relative_error == 0.0
	assert QuadratureResult(0.0, 1.0, 10, False).relative_error == math.inf


def test_mc_integrate_uniform_mean():
	"""Test the mean of U(0, 1) weights."""
	result = mc_integrate(lambda rng, n: rng.random(n), samples=200_000, seed=1)
	assert abs(result.value - 0.5) < 4 * result.error
	assert result.error == pytest.approx(math.sqrt(1.0 / 12.0 / 200_000), rel=0.05)
	assert result.evaluations == 200_000


def test_mc_integrate_bitwise_deterministic():
	"""Test that a fixed seed reproduces the same bits, for any worker count."""

	def sampler(rng, n):
		return rng.exponential(2.0, n)

	first = mc_integrate(sampler, samples=123_457, seed=42, chunk_size=10_000)
	second = mc_integrate(sampler, samples=123_457, seed=42, chunk_size=10_000)
	threaded = mc_integrate(sampler, samples=123_457, seed=42, workers=4, chunk_size=10_000)
	assert first == second
	assert threaded.value == first.value
	assert threaded.error == first.error


def test_mc_integrate_seed_changes_result():
	"""Test that a different seed gives a different estimate."""
	a = mc_integrate(lambda rng, n: rng.random(n), samples=10_000, seed=1)
	b = mc_integrate(lambda rng, n: rng.random(n), samples=10_000, seed=2)
	assert a.value != b.value


def test_mc_integrate_precision_error_when_requested():
	"""Test that an explicit tolerance is enforced."""
	with pytest.raises(PrecisionError, match="exceeds tolerance"):
		mc_integrate(lambda rng, n: rng.random(n), samples=1_000, seed=0, tolerance=1e-6)


def test_mc_integrate_warns_without_tolerance(caplog):
	"""Test that a missed default target only logs a warning."""
	with caplog.at_level(logging.WARNING, logger="field_entangle.quad"):
		result = mc_integrate(lambda rng, n: rng.random(n), samples=1_000, seed=0)
	assert not result.converged
	assert "relative error" in caplog.text


@pytest.mark.parametrize(
	"kwargs, message",
	[
		({"samples": 1}, "samples"),
		({"samples": 100, "chunk_size": 0}, "chunk_size"),
		({"samples": 100, "workers": 0}, "workers"),
	],
)
def test_mc_integrate_rejects_bad_arguments(kwargs, message):
	"""Test argument validation."""
	params = {"seed": 0}
	params.update(kwargs)
	with pytest.raises(QuadratureError, match=message):
		mc_integrate(lambda rng, n: rng.random(n), **params)


def test_mc_integrate_rejects_non_finite_weights():
	"""Test that NaN weights are an error."""
	with pytest.raises(QuadratureError, match="non-finite"):
		mc_integrate(lambda rng, n: np.full(n, np.nan), samples=100, seed=0)


def test_halfspace_density_normalized():
	"""Test that the radial density integrates to 1, with and without a tail rate."""
	for tail_rate in (0.0, 0.5):
		density = HalfspaceDensity(0.05, tail_rate)
		result = adaptive_radial(
			lambda s: float(density.radial_density(np.array([s]))[0]),
			scale=0.05,
			breakpoints=(0.05, density.far),
			tolerance=1e-8,
		)
		assert result.value == pytest.approx(1.0, rel=1e-6)


def test_halfspace_pairs_are_discordant():
	"""Test tau_x > 0 > tau_y for every sampled pair."""
	density = HalfspaceDensity(0.1, 1.0)
	rng = np.random.default_rng(3)
	x, y, factor = density.sample_pairs(rng, 10_000)
	assert np.all(x[:, 0] >= 0)
	assert np.all(y[:, 0] <= 0)
	assert np.all(factor >= 0)
	assert np.all(x[:, 1:] == 0)


def test_mc_halfspaces_zero_integrand():
	"""Test that f = 0 gives (0, 0)."""

	def integrand(x, y):
		return np.zeros(len(x))

	result = mc_halfspaces(integrand, sampler_scale=0.1, samples=10_000, seed=0)
	assert result.value == 0.0
	assert result.error == 0.0


def test_mc_halfspaces_exponential():
	"""Test an exponential integrand against its closed form."""
	rate = 1.5
	exact = REDUCTION_CONSTANT * 24.0 / rate**5
	result = mc_halfspaces(
		exponential_halfspace(rate), sampler_scale=1.0 / rate, samples=200_000, seed=11
	)
	assert abs(result.value - exact) < 3 * result.error
	assert result.relative_error < 0.01


def test_mc_halfspaces_matches_radial_for_two_lines():
	"""Test two m = 1 lines against (8 pi/3) int s^4 P^2."""
	lines = [RegulatedPropagator(1.0, 20.0)] * 2
	reference = REDUCTION_CONSTANT * adaptive_radial(radial_integrand(lines), scale=0.05).value

	def integrand(x, y):
		s = np.linalg.norm(x - y, axis=1)
		return lines[0](s) * lines[1](s)

	result = mc_halfspaces(integrand, 0.05, samples=400_000, seed=5, tail_rate=1.0)
	assert abs(result.value - reference) < 3 * result.error


def test_mc_coverage_over_synthetic_integrands():
	"""Test that 3-sigma intervals cover the exact value in at least 99% of runs."""
	rates = np.linspace(0.5, 2.0, 300)
	covered = 0
	for i, rate in enumerate(rates):
		exact = REDUCTION_CONSTANT * 24.0 / rate**5
		result = mc_halfspaces(
			exponential_halfspace(rate),
			sampler_scale=1.0 / rate,
			samples=20_000,
			seed=1000 + i,
			tail_rate=rate,
		)
		if abs(result.value - exact) <= 3 * result.error:
			covered += 1
	assert covered / len(rates) >= 0.99


def test_mc_error_shrinks_with_samples():
	"""Test that doubling the samples shrinks the error by about 1/sqrt(2)."""
	integrand = exponential_halfspace(1.0)
	small = mc_halfspaces(integrand, sampler_scale=1.0, samples=100_000, seed=21, tail_rate=1.0)
	large = mc_halfspaces(integrand, sampler_scale=1.0, samples=200_000, seed=21, tail_rate=1.0)
	assert large.error / small.error == pytest.approx(1.0 / math.sqrt(2.0), rel=0.1)
