"""
Tests for power-law fitting.
"""

import numpy as np
import pytest

from field_entangle.scaling import FitError, fit_loglog, fit_power_law


def test_exact_cubic_law():
	"""Test S/V = 7 cutoff^3 is recovered exactly."""
	cutoffs = [10.0, 15.0, 20.0, 30.0, 50.0]
	fit = fit_power_law((c, 7.0 * c**3) for c in cutoffs)
	assert fit.prefactor == pytest.approx(7.0, rel=1e-10)
	assert fit.exponent == pytest.approx(3.0, abs=1e-10)
	assert fit.residual == pytest.approx(0.0, abs=1e-10)


def test_subleading_term_lowers_exponent():
	"""Test 2 cutoff^3 + 5 cutoff on [10, 100]."""
	cutoffs = np.geomspace(10.0, 100.0, 8)
	fit = fit_power_law((c, 2.0 * c**3 + 5.0 * c) for c in cutoffs)
	assert 2.9 < fit.exponent < 3.0
	assert fit.residual > 0


def test_fit_loglog_two_points():
	"""Test that the unconstrained fit works with two points."""
	fit = fit_loglog([0.02, 0.04], [1e-4, 4e-4])
	assert fit.exponent == pytest.approx(2.0)
	assert fit.prefactor == pytest.approx(0.25)


def test_too_few_points():
	"""Test that fewer than four cutoffs are rejected."""
	with pytest.raises(FitError, match="at least 4 points"):
		fit_power_law([(10.0, 1.0), (20.0, 8.0), (40.0, 64.0)])


def test_too_narrow_span():
	"""Test that cutoffs spanning less than a factor 3 are rejected."""
	points = [(10.0, 1.0), (12.0, 2.0), (14.0, 3.0), (16.0, 4.0)]
	with pytest.raises(FitError, match="span"):
		fit_power_law(points)


def test_non_positive_values():
	"""Test that log-log fits need positive data."""
	with pytest.raises(FitError, match="positive"):
		fit_loglog([1.0, 2.0, 3.0], [1.0, -1.0, 2.0])


def test_identical_x_values():
	"""Test that zero spread in x is rejected."""
	with pytest.raises(FitError, match="equal"):
		fit_loglog([2.0, 2.0], [1.0, 3.0])


def test_mismatched_lengths():
	"""Test shape validation."""
	with pytest.raises(FitError, match="equal length"):
		fit_loglog([1.0, 2.0, 3.0], [1.0, 2.0])
