"""
Tests for result records, units and output encodings.
"""

import csv
import io
import json
import logging

import pytest
from rich.table import Table

from field_entangle import __version__
from field_entangle.config import RunConfig
from field_entangle.model import RenyiIndex
from field_entangle.replica import EntropyResult
from field_entangle.results import (
	CSV_COLUMNS,
	build_document,
	encode,
	entropy_record,
	format_summary_table,
	scalar_record,
	to_csv,
	to_json,
	unit_factor,
	write_document,
)


@pytest.fixture
def result():
	"""A two-diagram entropy result with awkward floats."""
	return EntropyResult(
		value_per_volume=0.1 + 0.2,
		error=1.0 / 3.0,
		alpha=RenyiIndex(2),
		contributions=(("DDKK", 0.1), ("DKK", 0.2)),
		cutoff=20.0,
		method="mc",
		samples=1000,
		seed=3,
		workers=1,
		extras={"shift_scale": 2.5},
	)


def test_unit_factor_mass():
	"""Test division by m^3."""
	assert unit_factor(RunConfig(command="unbroken", mass=2.0)) == (0.125, "mass")


def test_unit_factor_raw_and_dimensionless():
	"""Test raw units and commands without an energy dimension."""
	assert unit_factor(RunConfig(command="unbroken", units="raw")) == (1.0, "raw")
	assert unit_factor(RunConfig(command="oracle")) == (1.0, "raw")
	assert unit_factor(RunConfig(command="short-range", mass=2.0)) == (1.0, "raw")


def test_unit_factor_massless_falls_back(caplog):
	"""Test that m = 0 reports raw units with a warning."""
	with caplog.at_level(logging.WARNING, logger="field_entangle.results"):
		factor, units = unit_factor(RunConfig(command="unbroken", mass=0.0))
	assert (factor, units) == (1.0, "raw")
	assert "mass is 0" in caplog.text


def test_entropy_record_scales_values(result):
	"""Test that value, error and contributions share the unit factor."""
	record = entropy_record(RunConfig(command="ssb", mass=2.0), result)
	assert record["value"] == pytest.approx((0.1 + 0.2) / 8)
	assert record["error"] == pytest.approx(1.0 / 24.0)
	assert record["contribution_DDKK"] == pytest.approx(0.1 / 8)
	assert record["contribution_DKK"] == pytest.approx(0.2 / 8)
	assert record["units"] == "mass"
	assert record["seed"] == 3
	assert record["shift_scale"] == 2.5


def test_entropy_record_cubic_has_two_fields(result):
	"""Test N = 2 for the cubic model regardless of n_fields."""
	record = entropy_record(RunConfig(command="cubic", n_fields=5, units="raw"), result)
	assert record["N"] == 2
	assert record["value"] == 0.1 + 0.2


def test_entropy_record_without_seed():
	"""Test blank seed and missing contribution columns for radial results."""
	radial = EntropyResult(1.0, 0.0, RenyiIndex(2), (("DDKK", 1.0),), 20.0)
	record = entropy_record(RunConfig(command="unbroken", units="raw"), radial)
	assert record["seed"] == ""
	assert record["contribution_DKK"] == ""


def test_scalar_record_fields():
	"""Test dimensionless records take extra fields."""
	record = scalar_record(RunConfig(command="short-range"), 0.004, range_r=0.5)
	assert record["value"] == 0.004
	assert record["units"] == "raw"
	assert record["range_r"] == 0.5


def test_document_echoes_inputs(result):
	"""Test the version, command and inputs blocks."""
	config = RunConfig(command="unbroken", sweep=(10.0, 20.0))
	document = build_document(config, [entropy_record(config, result)], {"exponent": 3.0})
	assert document["version"] == __version__
	assert document["command"] == "unbroken"
	assert document["inputs"]["sweep"] == [10.0, 20.0]
	assert document["summary"] == {"exponent": 3.0}


def test_csv_header_and_rows(result):
	"""Test the fixed column set."""
	config = RunConfig(command="unbroken", units="raw")
	document = build_document(config, [entropy_record(config, result)] * 2)
	lines = to_csv(document).splitlines()
	assert lines[0] == ",".join(CSV_COLUMNS)
	assert len(lines) == 3


def test_csv_and_json_numbers_agree(result):
	"""Test that both encodings carry bit-identical values."""
	config = RunConfig(command="unbroken", units="raw")
	document = build_document(config, [entropy_record(config, result)])
	row = next(csv.DictReader(io.StringIO(to_csv(document))))
	record = json.loads(to_json(document))["records"][0]
	assert float(row["value"]) == record["value"] == 0.1 + 0.2
	assert float(row["error"]) == record["error"] == 1.0 / 3.0


def test_encode_selects_format(result):
	"""Test format dispatch."""
	config = RunConfig(command="unbroken")
	document = build_document(config, [entropy_record(config, result)])
	assert encode(document, "csv").startswith("command,")
	assert json.loads(encode(document, "json"))["command"] == "unbroken"


def test_write_document_creates_directories(tmp_path, result):
	"""Test writing into a directory that does not exist yet."""
	config = RunConfig(command="unbroken")
	document = build_document(config, [entropy_record(config, result)])
	target = write_document(document, str(tmp_path / "out" / "run.json"), "json")
	assert json.loads(target.read_text(encoding="utf-8"))["version"] == __version__


def test_format_summary_table(result):
	"""Test the rich table has one row per record and a summary caption."""
	config = RunConfig(command="unbroken")
	document = build_document(config, [entropy_record(config, result)], {"exponent": 3.0})
	table = format_summary_table(document)
	assert isinstance(table, Table)
	assert table.row_count == 1
	assert "exponent=3" in table.caption


def test_format_summary_table_empty():
	"""Test the placeholder row."""
	table = format_summary_table(build_document(RunConfig(command="unbroken"), []))
	assert table.row_count == 1
