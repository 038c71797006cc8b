"""
Power-law fits in log-log space.

Used to extract the cutoff exponent of the perturbative entropy and the
small-coupling exponent of the lattice oracle.
"""

import math
from collections.abc import Iterable, Sequence
from typing import NamedTuple

import numpy as np

MIN_FIT_POINTS = 4
MIN_FIT_SPAN = 3.0


class FitError(Exception):
	"""Raised for degenerate fit inputs."""

	pass


class PowerLawFit(NamedTuple):
	"""y = prefactor * x**exponent, with the rms residual of ln y."""

	prefactor: float
	exponent: float
	residual: float


def fit_loglog(xs: Sequence[float], ys: Sequence[float]) -> PowerLawFit:
	"""
	Least-squares fit of ln y = ln C + p ln x.

	Raises:
		FitError: On fewer than two points, non-positive data, or zero spread in x
	"""
	x = np.asarray(xs, dtype=float)
	y = np.asarray(ys, dtype=float)
	if x.shape != y.shape or x.ndim != 1:
		raise FitError("x and y must be one-dimensional sequences of equal length")
	if len(x) < 2:
		raise FitError(f"need at least 2 points, got {len(x)}")
	if np.any(x <= 0) or np.any(y <= 0):
		raise FitError("power-law fit needs strictly positive x and y")

	log_x = np.log(x)
	log_y = np.log(y)
	if np.ptp(log_x) == 0:
		raise FitError("all x values are equal; the exponent is undetermined")

	slope, intercept = np.polyfit(log_x, log_y, 1)
	residuals = log_y - (intercept + slope * log_x)
	rms = float(np.sqrt(np.mean(residuals**2)))
	return PowerLawFit(math.exp(intercept), float(slope), rms)


def fit_power_law(
	points: Iterable[tuple[float, float]],
	min_points: int = MIN_FIT_POINTS,
	min_span: float = MIN_FIT_SPAN,
) -> PowerLawFit:
	"""
	Fit S/V = C' * Lambda**p to (cutoff, value) pairs.

	Args:
		points: (cutoff, value per volume) pairs
		min_points: Minimum number of points
		min_span: Minimum ratio between the largest and smallest cutoff

	Returns:
		PowerLawFit(prefactor, exponent, residual)

	Raises:
		FitError: On too few points or too narrow a cutoff range
	"""
	pairs = list(points)
	if len(pairs) < min_points:
		raise FitError(f"need at least {min_points} points, got {len(pairs)}")

	cutoffs = [float(c) for c, _ in pairs]
	values = [float(v) for _, v in pairs]
	if min(cutoffs) <= 0:
		raise FitError("cutoffs must be > 0")
	span = max(cutoffs) / min(cutoffs)
	if span < min_span:
		raise FitError(f"cutoffs span a factor {span:.3g}; need at least {min_span}")

	return fit_loglog(cutoffs, values)
