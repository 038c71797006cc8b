"""
Replica-manifold diagrams and the O(lambda^2) Rényi entropy.

At second order only two-vertex vacuum diagrams in which both the focused
field (sigma, on the sheets) and a traced field (pi, on the planes) propagate
between the vertices survive in alpha*W_1 - W_alpha. Their contribution reduces
to an integral over the discordant half-space pair, which the isotropy of the
integrand collapses to a single radial integral:

	2 int_{tau_x>0} d^4x int_{tau_y<0} d^4y F(|x-y|)  =  V * (8 pi / 3) int_0^inf ds s^4 F(s)

(relative time T contributes a factor T from the free vertex position, and the
half 3-sphere average of cos(theta) gives 4 pi / 3 per ordering).
"""

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Any, Literal, Optional, Union

import numpy as np

from field_entangle.model import (
	DEFAULT_C_T,
	FieldTheory,
	ModelError,
	Phase,
	RenyiIndex,
	as_renyi_index,
	ssb_parameters,
)
from field_entangle.momentum import momentum_integral
from field_entangle.propagators import RegulatedPropagator
from field_entangle.quad import (
	DEFAULT_RADIAL_TOLERANCE,
	QuadratureResult,
	adaptive_radial,
	mc_halfspaces,
)
from field_entangle.scaling import PowerLawFit, fit_power_law

logger = logging.getLogger(__name__)

REDUCTION_CONSTANT = 8.0 * math.pi / 3.0

MIN_XCHECK_SAMPLES = 100_000

# Unregulated lines allowed before the s -> 0 integrand s^(4 - 2u) stops being integrable
MAX_UNREGULATED_LINES = 2

# Key of the m -> 0 leading term in cutoff-sweep results
LEADING_KEY = "leading_value"

LineLike = Union[RegulatedPropagator, tuple[float, Optional[float]]]
Focus = Literal["sigma", "pi"]


class ReplicaError(Exception):
	"""Raised for invalid diagrams or models passed to the entropy assemblers."""

	pass


class DivergenceError(ReplicaError):
	"""The requested line list leaves a non-integrable singularity."""

	pass


@dataclass(frozen=True)
class IntegrationSettings:
	"""How discordant integrals are evaluated: radial quadrature or half-space Monte Carlo."""

	method: Literal["radial", "mc"] = "radial"
	tolerance: float = DEFAULT_RADIAL_TOLERANCE
	samples: int = 1_000_000
	seed: int = 0
	workers: int = 1
	mc_tolerance: Optional[float] = None

	def __post_init__(self) -> None:
		if self.method not in ("radial", "mc"):
			raise ReplicaError(f"unknown integration method {self.method!r}")


RADIAL = IntegrationSettings()


@dataclass(frozen=True)
class DiagramSpec:
	"""
	Two-vertex vacuum diagram: σ lines (D) and π lines (K) between the vertices.
	"""

	focused_lines: int
	traced_lines: int
	coefficient: float
	focused_mass: float
	traced_mass: float
	regulator: Optional[float]
	label: str = ""

	def __post_init__(self) -> None:
		if self.focused_lines < 0 or self.traced_lines < 0:
			raise ReplicaError("line counts must be >= 0")
		if self.focused_lines + self.traced_lines < 2:
			raise ReplicaError(
				f"a connected two-vertex diagram needs >= 2 lines, "
				f"got {self.focused_lines + self.traced_lines}"
			)
		if not math.isfinite(self.coefficient):
			raise ReplicaError(f"coefficient must be finite, got {self.coefficient}")
		if not self.label:
			object.__setattr__(self, "label", "D" * self.focused_lines + "K" * self.traced_lines)

	def lines(self) -> tuple[RegulatedPropagator, ...]:
		focused = RegulatedPropagator(self.focused_mass, self.regulator)
		traced = RegulatedPropagator(self.traced_mass, self.regulator)
		return (focused,) * self.focused_lines + (traced,) * self.traced_lines


@dataclass(frozen=True)
class EntropyResult:
	"""O(lambda^2) Rényi entropy per unit 3-volume, with its diagram decomposition."""

	value_per_volume: float
	error: float
	alpha: RenyiIndex
	contributions: tuple[tuple[str, float], ...]
	cutoff: float
	method: str = "radial"
	samples: Optional[int] = None
	seed: Optional[int] = None
	workers: Optional[int] = None
	extras: dict[str, float] = field(default_factory=dict, compare=False)

	def contribution(self, label: str) -> float:
		for name, value in self.contributions:
			if name == label:
				return value
		raise KeyError(label)

	@property
	def labels(self) -> list[str]:
		return [name for name, _ in self.contributions]

	@property
	def per_cutoff_cell(self) -> float:
		"""Entropy per cutoff cell, S / (V Lambda^3)."""
		return self.value_per_volume / self.cutoff**3

	def as_dict(self) -> dict[str, Any]:
		return {
			"alpha": self.alpha.alpha,
			"value": self.value_per_volume,
			"error": self.error,
			"contributions": dict(self.contributions),
			"cutoff": self.cutoff,
			"method": self.method,
			"samples": self.samples,
			"seed": self.seed,
			"workers": self.workers,
			**self.extras,
		}


def diagram_survives(d: DiagramSpec) -> bool:
	"""
	True iff both the focused and a traced field propagate between the vertices.

	Diagrams with lines of one species only contribute alpha times their
	single-sheet value to W_alpha and cancel against alpha * W_1.
	"""
	return d.focused_lines >= 1 and d.traced_lines >= 1


def _as_lines(lines: Sequence[LineLike]) -> tuple[RegulatedPropagator, ...]:
	out = []
	for line in lines:
		if isinstance(line, RegulatedPropagator):
			out.append(line)
		else:
			mass, regulator = line
			out.append(RegulatedPropagator(float(mass), regulator))
	return tuple(out)


def _check_integrable(lines: tuple[RegulatedPropagator, ...]) -> None:
	if len(lines) < 2:
		raise ReplicaError(f"need at least 2 lines, got {len(lines)}")
	unregulated = sum(1 for line in lines if not line.is_regulated)
	if unregulated > MAX_UNREGULATED_LINES:
		raise DivergenceError(
			f"{unregulated} unregulated lines: the integrand behaves as s^{4 - 2 * unregulated} "
			"at short distance"
		)
	if len(lines) <= 2 and all(line.physical_mass == 0 for line in lines):
		raise DivergenceError(
			"two massless lines: the integrand does not decay at large separation"
		)


def _default_scale(lines: tuple[RegulatedPropagator, ...], cutoff_hint: Optional[float]) -> float:
	if cutoff_hint is not None:
		if cutoff_hint <= 0:
			raise ReplicaError(f"cutoff_hint must be > 0, got {cutoff_hint}")
		return 1.0 / cutoff_hint
	heaviest = max(line.regulator_mass or line.physical_mass for line in lines)
	return 1.0 / heaviest if heaviest > 0 else 1.0


def radial_integrand(lines: Sequence[LineLike]):
	"""s -> s^4 prod_i P_i(s) for a line list."""
	props = _as_lines(lines)

	def integrand(s: float) -> float:
		value = s**4
		for line in props:
			value *= line(s)
		return float(value)

	return integrand


def halfspace_integrand(lines: Sequence[LineLike]):
	"""Vectorized (x, y) -> prod_i P_i(|x - y|) for the half-space Monte Carlo."""
	props = _as_lines(lines)

	def integrand(x: np.ndarray, y: np.ndarray) -> np.ndarray:
		s = np.linalg.norm(x - y, axis=1)
		value = np.ones_like(s)
		for line in props:
			value = value * line(s)
		return value

	return integrand


@lru_cache(maxsize=512)
def _radial_moment(
	lines: tuple[RegulatedPropagator, ...], scale: float, tolerance: float
) -> QuadratureResult:
	return adaptive_radial(radial_integrand(lines), 0.0, tolerance, scale)


def discordant_integral(
	lines: Sequence[LineLike],
	cutoff_hint: Optional[float] = None,
	tolerance: float = DEFAULT_RADIAL_TOLERANCE,
) -> QuadratureResult:
	"""
	Discordant half-space integral of a product of propagator lines, per unit volume.

	Evaluates (8 pi/3) int_0^inf s^4 prod_i P_i(s) ds, which has energy
	dimension 2L - 5 for L lines.

	Args:
		lines: RegulatedPropagator objects or (mass, regulator_mass) pairs
		cutoff_hint: Scale where the integrand peaks (default: heaviest regulator)
		tolerance: Relative tolerance of the radial quadrature

	Returns:
		QuadratureResult with value and error already multiplied by 8 pi/3

	Raises:
		DivergenceError: For non-integrable line lists
		QuadratureError: If the quadrature does not converge
	"""
	props = _as_lines(lines)
	_check_integrable(props)
	scale = _default_scale(props, cutoff_hint)
	moment = _radial_moment(props, scale, tolerance)
	return QuadratureResult(
		REDUCTION_CONSTANT * moment.value,
		REDUCTION_CONSTANT * moment.error,
		moment.evaluations,
		moment.converged,
	)


def discordant_integral_mc(
	lines: Sequence[LineLike],
	samples: int,
	seed: int,
	cutoff_hint: Optional[float] = None,
	workers: int = 1,
	tolerance: Optional[float] = None,
) -> QuadratureResult:
	"""Same integral as ``discordant_integral``, sampled directly over the two half-spaces."""
	props = _as_lines(lines)
	_check_integrable(props)
	scale = _default_scale(props, cutoff_hint)
	lightest = min(line.physical_mass for line in props)
	return mc_halfspaces(
		halfspace_integrand(props),
		sampler_scale=scale,
		samples=samples,
		seed=seed,
		tail_rate=lightest,
		workers=workers,
		tolerance=tolerance,
	)


def _evaluate(d: DiagramSpec, settings: IntegrationSettings) -> QuadratureResult:
	if settings.method == "mc":
		return discordant_integral_mc(
			d.lines(),
			samples=settings.samples,
			seed=settings.seed,
			workers=settings.workers,
			tolerance=settings.mc_tolerance,
		)
	return discordant_integral(d.lines(), tolerance=settings.tolerance)


def diagram_contribution(
	d: DiagramSpec,
	alpha: Union[int, RenyiIndex],
	settings: IntegrationSettings = RADIAL,
) -> tuple[float, float]:
	"""
	Contribution of one diagram to S_alpha / V, with its error.

	Exactly (0, 0) for diagrams that cancel between W_alpha and alpha * W_1.
	"""
	index = as_renyi_index(alpha)
	if not diagram_survives(d) or d.coefficient == 0:
		return 0.0, 0.0
	integral = _evaluate(d, settings)
	factor = index.prefactor
	return factor * (d.coefficient * integral.value), factor * abs(d.coefficient) * integral.error


def _assemble(
	diagrams: Sequence[DiagramSpec],
	alpha: RenyiIndex,
	cutoff: float,
	settings: IntegrationSettings,
) -> EntropyResult:
	base = 0.0
	base_error = 0.0
	contributions = []
	for d in diagrams:
		if not diagram_survives(d) or d.coefficient == 0:
			contributions.append((d.label, 0.0))
			continue
		integral = _evaluate(d, settings)
		term = d.coefficient * integral.value
		logger.debug("%s: integral=%.10g coefficient=%.6g", d.label, integral.value, d.coefficient)
		base += term
		base_error += abs(d.coefficient) * integral.error
		contributions.append((d.label, alpha.prefactor * term))

	mc = settings.method == "mc"
	return EntropyResult(
		value_per_volume=alpha.prefactor * base,
		error=alpha.prefactor * base_error,
		alpha=alpha,
		contributions=tuple(contributions),
		cutoff=cutoff,
		method=settings.method,
		samples=settings.samples if mc else None,
		seed=settings.seed if mc else None,
		workers=settings.workers if mc else None,
	)


def renyi_cubic(
	alpha: Union[int, RenyiIndex],
	coupling: float,
	vev: float,
	mass: float,
	cutoff: float,
	settings: IntegrationSettings = RADIAL,
) -> EntropyResult:
	"""
	S_alpha / V of the two-field model with sigma^3 and sigma pi^2 vertices.

	S = lambda^2 v^2 alpha/(alpha-1) * I[D K K], both fields of mass m.

	Raises:
		ModelError: For negative coupling, vev or mass, or cutoff/mass < 2
	"""
	index = as_renyi_index(alpha)
	FieldTheory(n_fields=2, coupling=coupling, mass=mass, cutoff=cutoff)
	if vev < 0 or not math.isfinite(vev):
		raise ModelError(f"vev must be finite and >= 0, got {vev}")

	diagram = DiagramSpec(
		focused_lines=1,
		traced_lines=2,
		coefficient=coupling**2 * vev**2,
		focused_mass=mass,
		traced_mass=mass,
		regulator=cutoff,
		label="DKK",
	)
	return _assemble([diagram], index, cutoff, settings)


def unbroken_diagram(model: FieldTheory, focus: Focus = "sigma") -> DiagramSpec:
	"""
	The DDKK diagram of the unbroken phase, coefficient (N-1) lambda^2 / 2.

	With sigma focused the traced species are the N-1 pions. With one pion
	focused they are sigma and the other N-2 pions. Each traced species adds
	lambda^2/2 at the common mass m, so both foci give the same diagram.

	Raises:
		ReplicaError: For a focus other than "sigma" or "pi"
	"""
	if focus == "sigma":
		traced_species = model.n_fields - 1
	elif focus == "pi":
		traced_species = 1 + (model.n_fields - 2)
	else:
		raise ReplicaError(f"focus must be 'sigma' or 'pi', got {focus!r}")
	return DiagramSpec(
		focused_lines=2,
		traced_lines=2,
		coefficient=traced_species * model.coupling**2 / 2.0,
		focused_mass=model.mass,
		traced_mass=model.mass,
		regulator=model.cutoff,
		label="DDKK",
	)


def renyi_unbroken(
	alpha: Union[int, RenyiIndex],
	model: FieldTheory,
	settings: IntegrationSettings = RADIAL,
	focus: Focus = "sigma",
) -> EntropyResult:
	"""
	S_alpha / V in the unbroken phase, focusing on sigma or on one pion.

	By O(N) symmetry the result is the same whichever field is focused.

	Raises:
		ReplicaError: If the model is not in the unbroken phase, or for an unknown focus
	"""
	index = as_renyi_index(alpha)
	if model.phase is not Phase.UNBROKEN:
		raise ReplicaError(f"renyi_unbroken needs an unbroken-phase model, got {model.phase.value}")
	return _assemble([unbroken_diagram(model, focus)], index, model.cutoff, settings)


def leading_cutoff_term(
	alpha: Union[int, RenyiIndex],
	model: FieldTheory,
	settings: IntegrationSettings = RADIAL,
) -> float:
	"""
	Dominant cutoff-divergent part of the unbroken-phase S_alpha / V.

	The m -> 0 limit of the DDKK diagram at the model's cutoff, always by radial
	quadrature. Four massless regulated lines stay integrable and the value is
	exactly proportional to Lambda^3. The full value differs from it by mass
	corrections of order (m/Lambda)^2 ln(Lambda/m).

	Raises:
		ReplicaError: If the model is not in the unbroken phase
	"""
	index = as_renyi_index(alpha)
	if model.phase is not Phase.UNBROKEN:
		raise ReplicaError(
			f"the leading term needs an unbroken-phase model, got {model.phase.value}"
		)
	diagram = replace(unbroken_diagram(model), focused_mass=0.0, traced_mass=0.0)
	if diagram.coefficient == 0:
		return 0.0
	integral = discordant_integral(diagram.lines(), tolerance=settings.tolerance)
	return index.prefactor * diagram.coefficient * integral.value


def cutoff_sweep(
	alpha: Union[int, RenyiIndex],
	model: FieldTheory,
	cutoffs: Sequence[float],
	settings: IntegrationSettings = RADIAL,
) -> list[EntropyResult]:
	"""
	Unbroken-phase entropies for each cutoff, all other parameters fixed.

	Each result carries its leading m -> 0 term in ``extras[LEADING_KEY]``.
	"""
	results = []
	for cutoff in cutoffs:
		swept = FieldTheory(
			n_fields=model.n_fields,
			coupling=model.coupling,
			mass=model.mass,
			cutoff=float(cutoff),
			phase=model.phase,
		)
		result = renyi_unbroken(alpha, swept, settings)
		leading = leading_cutoff_term(alpha, swept, settings)
		logger.debug(
			"cutoff %g: full=%.10g leading=%.10g", cutoff, result.value_per_volume, leading
		)
		results.append(replace(result, extras={**result.extras, LEADING_KEY: leading}))
	return results


def fit_cutoff_scaling(results: Sequence[EntropyResult], leading: bool = True) -> PowerLawFit:
	"""
	Fit S/V = C' Lambda^p over a cutoff sweep.

	By default the fit runs on the leading terms recorded by ``cutoff_sweep``,
	which carry the Lambda^3 volume law on their own. ``leading=False`` fits the
	full values instead; below Lambda/m ~ 100 their mass corrections lift this
	effective exponent above 3.

	Raises:
		ReplicaError: If a result has no leading term recorded
		FitError: On too few points or too narrow a cutoff range
	"""
	if not leading:
		return fit_power_law((r.cutoff, r.value_per_volume) for r in results)
	missing = [r.cutoff for r in results if LEADING_KEY not in r.extras]
	if missing:
		raise ReplicaError(f"no leading term recorded at cutoffs {missing}; use cutoff_sweep")
	return fit_power_law((r.cutoff, r.extras[LEADING_KEY]) for r in results)


def xcheck_momentum(
	alpha: Union[int, RenyiIndex],
	model: FieldTheory,
	samples: int,
	seed: int,
	workers: int = 1,
	tolerance: Optional[float] = None,
) -> EntropyResult:
	"""
	Unbroken-phase entropy from the momentum-space representation.

	Three of the four DDKK lines are sampled in momentum space; the fourth
	carries the discordant half-space kernel.

	Raises:
		ReplicaError: For a broken-phase model or fewer than 1e5 samples
		PrecisionError: If ``tolerance`` is given and not reached
	"""
	index = as_renyi_index(alpha)
	if model.phase is not Phase.UNBROKEN:
		raise ReplicaError(
			f"xcheck_momentum needs an unbroken-phase model, got {model.phase.value}"
		)
	if samples < MIN_XCHECK_SAMPLES:
		raise ReplicaError(f"need at least {MIN_XCHECK_SAMPLES} samples, got {samples}")

	diagram = unbroken_diagram(model)
	common = dict(
		alpha=index,
		cutoff=model.cutoff,
		method="momentum-mc",
		samples=samples,
		seed=seed,
		workers=workers,
	)
	if diagram.coefficient == 0:
		return EntropyResult(0.0, 0.0, contributions=(("DDKK", 0.0),), **common)

	integral = momentum_integral(
		diagram.lines(),
		samples=samples,
		seed=seed,
		scale=model.cutoff,
		workers=workers,
		tolerance=tolerance,
	)
	value = index.prefactor * (diagram.coefficient * integral.value)
	error = index.prefactor * diagram.coefficient * integral.error
	return EntropyResult(value, error, contributions=(("DDKK", value),), **common)


def _ssb_diagrams(
	model: FieldTheory, lambda_u: float, c_t: float, pi_focus: bool
) -> tuple[list[DiagramSpec], dict[str, float]]:
	if model.phase is not Phase.BROKEN:
		raise ReplicaError(f"SSB entropy needs a broken-phase model, got {model.phase.value}")

	params = ssb_parameters(model, lambda_u, c_t)
	n_traced = model.traced_fields
	group_factor = 1 if pi_focus else n_traced

	quartic = DiagramSpec(
		focused_lines=2,
		traced_lines=2,
		coefficient=n_traced * lambda_u**2 / 2.0,
		focused_mass=params.m_sigma_eff,
		traced_mass=params.m_pi_eff,
		regulator=model.cutoff,
		label="DDKK",
	)
	cubic = DiagramSpec(
		focused_lines=1,
		traced_lines=2,
		coefficient=group_factor * (lambda_u**2 * params.shift_scale**2),
		focused_mass=params.m_sigma_eff,
		traced_mass=params.m_pi_eff,
		regulator=model.cutoff,
		label="DKK",
	)
	extras = {
		"shift_scale": params.shift_scale,
		"m_sigma_eff": params.m_sigma_eff,
		"m_pi_eff": params.m_pi_eff,
		"vev": params.vev,
	}
	return [quartic, cubic], extras


def renyi_ssb(
	alpha: Union[int, RenyiIndex],
	model: FieldTheory,
	lambda_u: float,
	c_t: float = DEFAULT_C_T,
	settings: IntegrationSettings = RADIAL,
) -> EntropyResult:
	"""
	S_alpha / V of sigma in the broken phase, expanded around the shift scale u.

	S = alpha/(alpha-1) [ (N-1) lambda_u^2/2 I[DDKK] + (N-1) lambda_u^2 u^2 I[DKK] ]
	with D at the sigma effective mass and K at the pi effective mass.

	Raises:
		ReplicaError: If the model is not in the broken phase
		ModelError: If lambda_u or c_t are inadmissible
	"""
	index = as_renyi_index(alpha)
	diagrams, extras = _ssb_diagrams(model, lambda_u, c_t, pi_focus=False)
	return replace(_assemble(diagrams, index, model.cutoff, settings), extras=extras)


def renyi_ssb_pi(
	alpha: Union[int, RenyiIndex],
	model: FieldTheory,
	lambda_u: float,
	c_t: float = DEFAULT_C_T,
	settings: IntegrationSettings = RADIAL,
) -> EntropyResult:
	"""
	Broken-phase entropy of a single pi field (sigma and the other pis traced out).

	Identical to ``renyi_ssb`` except that the u-dependent term loses one factor N-1.
	"""
	index = as_renyi_index(alpha)
	diagrams, extras = _ssb_diagrams(model, lambda_u, c_t, pi_focus=True)
	return replace(_assemble(diagrams, index, model.cutoff, settings), extras=extras)


def short_range_fraction(
	lines: Sequence[LineLike],
	cutoff: float,
	range_r: float,
	tolerance: float = DEFAULT_RADIAL_TOLERANCE,
) -> float:
	"""
	Share of the discordant integral coming from separations s > range_r.

	Raises:
		ReplicaError: If range_r <= 0
	"""
	if range_r <= 0:
		raise ReplicaError(f"range must be > 0, got {range_r}")
	props = _as_lines(lines)
	_check_integrable(props)

	total = _radial_moment(props, 1.0 / cutoff, tolerance).value
	if total == 0:
		return 0.0
	outer = adaptive_radial(radial_integrand(props), range_r, tolerance, 1.0 / cutoff).value
	return min(1.0, max(0.0, outer / total))


def trace_rho_power(result: EntropyResult, volume: float) -> float:
	"""
	Tr rho_sigma^alpha for a finite 3-volume, exp(-(alpha - 1) S_alpha).

	Raises:
		ReplicaError: If volume <= 0
	"""
	if volume <= 0:
		raise ReplicaError(f"volume must be > 0, got {volume}")
	return math.exp(-(result.alpha.alpha - 1) * result.value_per_volume * volume)
