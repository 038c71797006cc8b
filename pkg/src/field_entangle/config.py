"""
Run configuration for the command-line front end.

Values are layered: built-in defaults, then FIELD_ENTANGLE_* environment
variables (a local .env is honored), then a flat ``key = value`` config file,
then command-line flags.
"""

import os
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Any, Optional

from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

COMMANDS = ("cubic", "unbroken", "ssb", "ssb-pi", "scaling-fit", "xcheck", "oracle", "short-range")
FORMATS = ("json", "csv")
UNITS = ("mass", "raw")
METHODS = ("radial", "mc")

DEFAULT_SEED = 0

ENV_SEED = "FIELD_ENTANGLE_SEED"
ENV_THREADS = "FIELD_ENTANGLE_THREADS"
ENV_UNITS = "FIELD_ENTANGLE_UNITS"


class ConfigError(Exception):
	"""Raised for unreadable config files and invalid settings."""

	pass


@dataclass(frozen=True)
class RunConfig:
	"""Everything one CLI invocation needs; echoed verbatim into the result file."""

	command: str
	alpha: int = 2
	n_fields: int = 2
	coupling: float = 0.1
	mass: float = 1.0
	cutoff: float = 20.0
	vev: Optional[float] = None
	lambda_u: Optional[float] = None
	c_t: float = 1.0
	focus: str = "sigma"
	method: str = "radial"
	sweep: tuple[float, ...] = ()
	range_r: Optional[float] = None
	dims: int = 1
	sites: int = 32
	mass_phi: float = 1.0
	mass_chi: float = 1.0
	bilinear_g: float = 0.3
	sizes: tuple[int, ...] = ()
	seed: int = DEFAULT_SEED
	threads: int = 1
	samples: int = 1_000_000
	tolerance: float = 1e-8
	mc_tolerance: Optional[float] = None
	output: Optional[str] = None
	format: str = "json"
	units: str = "mass"

	def __post_init__(self) -> None:
		if self.command not in COMMANDS:
			raise ConfigError(
				f"unknown command {self.command!r}; expected one of {', '.join(COMMANDS)}"
			)
		if self.format not in FORMATS:
			raise ConfigError(f"format must be one of {FORMATS}, got {self.format!r}")
		if self.units not in UNITS:
			raise ConfigError(f"units must be one of {UNITS}, got {self.units!r}")
		if self.method not in METHODS:
			raise ConfigError(f"method must be one of {METHODS}, got {self.method!r}")
		if self.focus not in ("sigma", "pi"):
			raise ConfigError(f"focus must be 'sigma' or 'pi', got {self.focus!r}")
		if self.threads < 1:
			raise ConfigError(f"threads must be >= 1, got {self.threads}")
		if self.samples < 2:
			raise ConfigError(f"samples must be >= 2, got {self.samples}")

	@classmethod
	def from_mapping(cls, data: dict[str, Any]) -> "RunConfig":
		"""
		Build a config from string or typed values, e.g. the ``inputs`` of a result file.

		Raises:
			ConfigError: On unknown keys or values of the wrong type
		"""
		return cls(**coerce_values(data))

	def as_dict(self) -> dict[str, Any]:
		data = asdict(self)
		data["sweep"] = list(self.sweep)
		data["sizes"] = list(self.sizes)
		return data


_FIELD_NAMES = frozenset(f.name for f in fields(RunConfig))

_INT_KEYS = frozenset({"alpha", "n_fields", "dims", "sites", "seed", "threads", "samples"})
_FLOAT_KEYS = frozenset(
	{
		"coupling",
		"mass",
		"cutoff",
		"vev",
		"lambda_u",
		"c_t",
		"range_r",
		"mass_phi",
		"mass_chi",
		"bilinear_g",
		"tolerance",
		"mc_tolerance",
	}
)
_OPTIONAL_KEYS = frozenset({"vev", "lambda_u", "range_r", "mc_tolerance", "output"})


def _to_int(raw: Any) -> int:
	if isinstance(raw, str):
		number = float(raw)
		if not number.is_integer():
			raise ValueError(f"{raw!r} is not an integer")
		return int(number)
	return int(raw)


def _parse_list(raw: Any, convert) -> tuple:
	if isinstance(raw, str):
		items = [part.strip() for part in raw.split(",") if part.strip()]
	else:
		items = list(raw)
	return tuple(convert(item) for item in items)


def _coerce(key: str, raw: Any) -> Any:
	if raw is None or (isinstance(raw, str) and raw.strip().lower() in ("", "none")):
		if key in _OPTIONAL_KEYS:
			return None
		raise ConfigError(f"{key} cannot be empty")

	try:
		if key == "sweep":
			return _parse_list(raw, float)
		if key == "sizes":
			return _parse_list(raw, _to_int)
		if key in _INT_KEYS:
			return _to_int(raw)
		if key in _FLOAT_KEYS:
			return float(raw)
		return str(raw).strip()
	except (TypeError, ValueError) as e:
		raise ConfigError(f"invalid value for {key}: {raw!r} ({e})")


def coerce_values(data: dict[str, Any]) -> dict[str, Any]:
	"""Validate keys and convert raw values to the RunConfig field types."""
	unknown = sorted(set(data) - _FIELD_NAMES)
	if unknown:
		raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
	return {key: _coerce(key, value) for key, value in data.items()}


def parse_config_file(path: str) -> dict[str, str]:
	"""
	Read a flat ``key = value`` file.

	Blank lines and ``#`` comments are ignored; keys may use dashes or
	underscores (``lambda-u`` and ``lambda_u`` are the same key).

	Args:
		path: Path to the config file

	Returns:
		Raw string values keyed by RunConfig field name

	Raises:
		ConfigError: If the file is missing or a line is not ``key = value``
	"""
	file_path = Path(path)
	if not file_path.exists():
		raise ConfigError(f"config file not found: {path}")

	values: dict[str, str] = {}
	with open(file_path, "r", encoding="utf-8") as f:
		for number, line in enumerate(f, start=1):
			line = line.split("#", 1)[0].strip()
			if not line:
				continue
			if "=" not in line:
				raise ConfigError(f"{path}:{number}: expected 'key = value', got {line!r}")
			key, value = line.split("=", 1)
			key = key.strip().replace("-", "_")
			if not key:
				raise ConfigError(f"{path}:{number}: missing key")
			values[key] = value.strip()
	return values


def environment_values() -> dict[str, str]:
	"""Settings taken from FIELD_ENTANGLE_* environment variables."""
	values = {}
	for key, name in (("seed", ENV_SEED), ("threads", ENV_THREADS), ("units", ENV_UNITS)):
		raw = os.getenv(name)
		if raw:
			values[key] = raw
	return values


def build_config(
	command: str,
	config_path: Optional[str] = None,
	overrides: Optional[dict[str, Any]] = None,
) -> RunConfig:
	"""
	Layer defaults < environment < config file < flags into one RunConfig.

	Args:
		command: Subcommand name
		config_path: Optional flat config file
		overrides: Flag values; entries that are None were not given

	Raises:
		ConfigError: On any unreadable or invalid setting
	"""
	layered: dict[str, Any] = {}
	layered.update(environment_values())
	if config_path:
		layered.update(parse_config_file(config_path))
	layered.update({k: v for k, v in (overrides or {}).items() if v is not None})
	layered["command"] = command
	return RunConfig.from_mapping(layered)
