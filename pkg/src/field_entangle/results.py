"""
Result records and their encodings.

Each computation becomes one flat record. A run's records are wrapped in a
document that echoes the full RunConfig and the package version, written as
JSON or as CSV with a fixed column set, and summarized as a rich table.
"""

import csv
import io
import json
import logging
from pathlib import Path
from typing import Any, Optional

from rich.table import Table

from field_entangle import __version__
from field_entangle.config import RunConfig
from field_entangle.replica import EntropyResult

logger = logging.getLogger(__name__)

CSV_COLUMNS = (
	"command",
	"alpha",
	"N",
	"lambda",
	"mass",
	"cutoff",
	"value",
	"error",
	"contribution_DKK",
	"contribution_DDKK",
	"seed",
)

# Commands whose values are entropies per unit volume (energy^3)
ENERGY_COMMANDS = frozenset({"cubic", "unbroken", "ssb", "ssb-pi", "scaling-fit", "xcheck"})


def unit_factor(config: RunConfig) -> tuple[float, str]:
	"""
	Factor applied to entropy densities, and the unit label that goes with it.

	``--units mass`` divides by m^3 (mu^3 in the broken phase). A massless
	model has no mass scale, so it falls back to raw units with a warning.
	"""
	if config.units == "raw" or config.command not in ENERGY_COMMANDS:
		return 1.0, "raw"
	if config.mass == 0:
		logger.warning("mass is 0: reporting values in raw cutoff units")
		return 1.0, "raw"
	return 1.0 / config.mass**3, "mass"


def entropy_record(config: RunConfig, result: EntropyResult) -> dict[str, Any]:
	"""Flat record for one EntropyResult, scaled to the configured units."""
	factor, units = unit_factor(config)
	contributions = {label: value * factor for label, value in result.contributions}
	record = {
		"command": config.command,
		"alpha": result.alpha.alpha,
		"N": 2 if config.command == "cubic" else config.n_fields,
		"lambda": config.coupling,
		"mass": config.mass,
		"cutoff": result.cutoff,
		"value": result.value_per_volume * factor,
		"error": result.error * factor,
		"contribution_DKK": contributions.get("DKK", ""),
		"contribution_DDKK": contributions.get("DDKK", ""),
		"seed": result.seed if result.seed is not None else "",
		"method": result.method,
		"samples": result.samples,
		"threads": config.threads,
		"units": units,
		"contributions": contributions,
	}
	for key, value in result.extras.items():
		record[key] = value
	return record


def scalar_record(config: RunConfig, value: float, **fields: Any) -> dict[str, Any]:
	"""Record for a dimensionless result (fractions, lattice entropies, fit exponents)."""
	record: dict[str, Any] = {
		"command": config.command,
		"alpha": config.alpha,
		"N": config.n_fields,
		"lambda": config.coupling,
		"mass": config.mass,
		"cutoff": config.cutoff,
		"value": value,
		"error": 0.0,
		"contribution_DKK": "",
		"contribution_DDKK": "",
		"seed": "",
		"threads": config.threads,
		"units": "raw",
	}
	record.update(fields)
	return record


def build_document(
	config: RunConfig,
	records: list[dict[str, Any]],
	summary: Optional[dict[str, Any]] = None,
) -> dict[str, Any]:
	"""Wrap records with the echoed inputs and the package version."""
	return {
		"version": __version__,
		"command": config.command,
		"inputs": config.as_dict(),
		"records": records,
		"summary": summary or {},
	}


def to_json(document: dict[str, Any]) -> str:
	return json.dumps(document, indent=2)


def to_csv(document: dict[str, Any]) -> str:
	"""CSV with one row per record; floats keep their shortest exact repr."""
	buffer = io.StringIO()
	writer = csv.DictWriter(
		buffer, fieldnames=CSV_COLUMNS, extrasaction="ignore", lineterminator="\n"
	)
	writer.writeheader()
	for record in document["records"]:
		writer.writerow({column: record.get(column, "") for column in CSV_COLUMNS})
	return buffer.getvalue()


def encode(document: dict[str, Any], fmt: str) -> str:
	return to_csv(document) if fmt == "csv" else to_json(document)


def write_document(document: dict[str, Any], path: str, fmt: str) -> Path:
	"""Write the encoded document, creating parent directories as needed."""
	target = Path(path)
	target.parent.mkdir(parents=True, exist_ok=True)
	target.write_text(encode(document, fmt), encoding="utf-8")
	logger.info("wrote %s results to %s", fmt, target)
	return target


def _fmt(value: Any) -> str:
	if isinstance(value, float):
		return f"{value:.6g}"
	return "" if value is None else str(value)


def format_summary_table(document: dict[str, Any]) -> Table:
	"""
	Summarize a result document as a rich table.

	Args:
		document: Output of ``build_document``

	Returns:
		Rich Table object ready for console display
	"""
	table = Table(
		title=f"field-entangle {document['command']}", show_header=True, header_style="bold cyan"
	)
	table.add_column("alpha", style="yellow")
	table.add_column("N", style="yellow")
	table.add_column("lambda", style="yellow")
	table.add_column("cutoff", style="yellow")
	table.add_column("value", style="bold green")
	table.add_column("error", style="magenta")
	table.add_column("method", style="cyan")

	records = document["records"]
	if not records:
		table.add_row("No results", "", "", "", "", "", "")
		return table

	for record in records:
		table.add_row(
			_fmt(record.get("alpha")),
			_fmt(record.get("N")),
			_fmt(record.get("lambda")),
			_fmt(record.get("cutoff")),
			_fmt(record.get("value")),
			_fmt(record.get("error")),
			_fmt(record.get("method", "")),
		)

	scalars = [
		f"{key}={_fmt(value)}"
		for key, value in document.get("summary", {}).items()
		if isinstance(value, (int, float, str, bool))
	]
	if scalars:
		table.caption = ", ".join(scalars)
	return table
