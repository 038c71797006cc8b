"""
Model parameters for the linear sigma model.

Validates the field theory inputs and derives the shift scale and effective
masses used when the O(N) symmetry is spontaneously broken.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Any

logger = logging.getLogger(__name__)

# Smallest admissible ratio between cutoff and mass scale
MIN_CUTOFF_RATIO = 2.0

# Broken-phase couplings at or above this are not "small"
MAX_BROKEN_COUPLING = 0.5

# The resummed shift needs ln(1/lambda_u) > 1
LAMBDA_U_BOUND = math.exp(-1.0)

DEFAULT_C_T = 1.0


class ModelError(Exception):
	"""Raised when model parameters are outside the admissible domain."""

	pass


class Phase(str, Enum):
	"""Symmetry phase of the linear sigma model."""

	UNBROKEN = "unbroken"
	BROKEN = "broken"


@dataclass(frozen=True)
class RenyiIndex:
	"""Integer Rényi index alpha >= 2."""

	alpha: int

	def __post_init__(self) -> None:
		if isinstance(self.alpha, bool) or not isinstance(self.alpha, int):
			raise ModelError(f"Rényi index must be an integer, got {self.alpha!r}")
		if self.alpha < 2:
			raise ModelError(
				f"Rényi index must be >= 2, got {self.alpha} "
				"(the alpha -> 1 limit is not reachable by the replica construction)"
			)

	@property
	def prefactor(self) -> float:
		"""Replica prefactor alpha/(alpha - 1)."""
		return self.alpha / (self.alpha - 1)


def as_renyi_index(alpha: "int | RenyiIndex") -> RenyiIndex:
	"""Accept either a bare integer or an already validated RenyiIndex."""
	if isinstance(alpha, RenyiIndex):
		return alpha
	return RenyiIndex(alpha)


@dataclass(frozen=True)
class FieldTheory:
	"""
	Parameters of the N-component linear sigma model.

	In the unbroken phase ``mass`` is the common physical mass m >= 0; in the
	broken phase it is mu > 0 with m^2 = -mu^2.
	"""

	n_fields: int
	coupling: float
	mass: float
	cutoff: float
	phase: Phase = Phase.UNBROKEN

	def __post_init__(self) -> None:
		object.__setattr__(self, "phase", Phase(self.phase))

		if isinstance(self.n_fields, bool) or not isinstance(self.n_fields, int):
			raise ModelError(f"n_fields must be an integer, got {self.n_fields!r}")
		if self.n_fields < 2:
			raise ModelError(f"n_fields must be >= 2, got {self.n_fields}")
		if not math.isfinite(self.coupling) or self.coupling < 0:
			raise ModelError(f"coupling must be a finite number >= 0, got {self.coupling}")
		if not math.isfinite(self.cutoff) or self.cutoff <= 0:
			raise ModelError(f"cutoff must be > 0, got {self.cutoff}")
		if not math.isfinite(self.mass) or self.mass < 0:
			raise ModelError(f"mass must be >= 0, got {self.mass}")
		if self.mass > 0 and self.cutoff / self.mass < MIN_CUTOFF_RATIO:
			raise ModelError(
				f"cutoff/mass = {self.cutoff / self.mass:.4g} is below {MIN_CUTOFF_RATIO}; "
				"results would be dominated by the regulator"
			)

		if self.phase is Phase.BROKEN:
			if self.mass <= 0:
				raise ModelError(f"broken phase needs mu > 0, got {self.mass}")
			if not 0 < self.coupling < MAX_BROKEN_COUPLING:
				raise ModelError(
					f"broken phase needs 0 < coupling < {MAX_BROKEN_COUPLING}, got {self.coupling}"
				)

	@property
	def traced_fields(self) -> int:
		"""Number of pi fields traced out when sigma is focused."""
		return self.n_fields - 1

	@property
	def vev(self) -> float:
		"""Classical vacuum expectation value v = mu/sqrt(lambda) (broken phase only)."""
		if self.phase is not Phase.BROKEN:
			raise ModelError("the unbroken phase has no vacuum expectation value")
		return self.mass / math.sqrt(self.coupling)

	@classmethod
	def from_dict(cls, data: dict[str, Any]) -> "FieldTheory":
		"""Create a FieldTheory from a flat mapping (e.g. a parsed config file)."""
		try:
			return cls(
				n_fields=int(data["n_fields"]),
				coupling=float(data["coupling"]),
				mass=float(data["mass"]),
				cutoff=float(data["cutoff"]),
				phase=Phase(data.get("phase", Phase.UNBROKEN)),
			)
		except KeyError as e:
			raise ModelError(f"Missing model parameter: {e.args[0]}")
		except (TypeError, ValueError) as e:
			raise ModelError(f"Invalid model parameter: {e}")


@dataclass(frozen=True)
class SsbParameters:
	"""Shift scale and effective masses of the broken phase."""

	shift_scale: float
	m_sigma_eff: float
	m_pi_eff: float
	c_t: float
	vev: float

	@property
	def length_scale(self) -> float:
		"""The short length 1/u that replaces 1/v after tadpole resummation."""
		return 1.0 / self.shift_scale


def ssb_shift_scale(
	lambda_u: float,
	n_fields: int,
	cutoff: float,
	c_t: float = DEFAULT_C_T,
) -> float:
	"""
	Shift scale u that resums the tadpole insertions in the broken phase.

	u^2 = C_t (N - 1)/(N + 8) * cutoff^2 / ln(1/lambda_u)

	Args:
		lambda_u: Renormalized coupling at scale u, 0 < lambda_u < 1/e
		n_fields: Number of scalar fields N >= 2
		cutoff: UV cutoff
		c_t: Positive, scheme-dependent constant

	Returns:
		The shift scale u, always in (0, cutoff) for admissible inputs

	Raises:
		ModelError: If any input is outside its admissible range
	"""
	if not 0 < lambda_u < LAMBDA_U_BOUND:
		raise ModelError(
			f"lambda_u must satisfy 0 < lambda_u < 1/e ≈ {LAMBDA_U_BOUND:.6f}, got {lambda_u} "
			"(the resummed shift needs ln(1/lambda_u) > 1)"
		)
	if n_fields < 2:
		raise ModelError(f"n_fields must be >= 2, got {n_fields}")
	if c_t <= 0:
		raise ModelError(f"c_t must be > 0, got {c_t}")
	if cutoff <= 0:
		raise ModelError(f"cutoff must be > 0, got {cutoff}")

	log_inverse = -math.log(lambda_u)
	return cutoff * math.sqrt(c_t * (n_fields - 1) / ((n_fields + 8) * log_inverse))


def effective_masses(coupling: float, shift_scale: float) -> tuple[float, float]:
	"""
	Formal masses acquired by sigma and pi when expanding around u.

	Returns:
		(m_sigma_eff, m_pi_eff) = (sqrt(3 lambda) u, sqrt(lambda) u)
	"""
	if coupling <= 0:
		raise ModelError(f"coupling must be > 0, got {coupling}")
	if shift_scale <= 0:
		raise ModelError(f"shift_scale must be > 0, got {shift_scale}")

	m_pi = math.sqrt(coupling) * shift_scale
	return math.sqrt(3.0) * m_pi, m_pi


def ssb_parameters(
	model: FieldTheory,
	lambda_u: float,
	c_t: float = DEFAULT_C_T,
) -> SsbParameters:
	"""
	Bundle the broken-phase scales for a model.

	Raises:
		ModelError: If the model is not in the broken phase or lambda_u is inadmissible
	"""
	if model.phase is not Phase.BROKEN:
		raise ModelError(f"expected a broken-phase model, got phase={model.phase.value}")

	u = ssb_shift_scale(lambda_u, model.n_fields, model.cutoff, c_t)
	m_sigma, m_pi = effective_masses(lambda_u, u)
	logger.debug("shift scale u=%.6g, m_sigma=%.6g, m_pi=%.6g", u, m_sigma, m_pi)

	return SsbParameters(
		shift_scale=u,
		m_sigma_eff=m_sigma,
		m_pi_eff=m_pi,
		c_t=c_t,
		vev=model.vev,
	)
