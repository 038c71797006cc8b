"""
Command-line interface for Field Entangle.

Provides commands:
- cubic: two-field model with sigma^3 and sigma pi^2 vertices
- unbroken: O(N) model in the unbroken phase
- ssb / ssb-pi: broken phase, focusing on sigma or on one pi field
- scaling-fit: cutoff sweep and power-law fit of the volume law
- xcheck: position-space against momentum-space evaluation
- oracle: exact Gaussian lattice entropy and its perturbative checks
- short-range: share of the entropy integral beyond a separation
"""

import logging
from collections.abc import Callable
from typing import Annotated, Any, Optional

import typer
from rich.console import Console
from rich.logging import RichHandler
from rich.markup import escape

from field_entangle.config import ConfigError, RunConfig, build_config
from field_entangle.model import FieldTheory, ModelError, Phase
from field_entangle.oracle import LatticeError, LatticeSpec, perturbative_check, renyi_field_entropy
from field_entangle.propagators import PropagatorError
from field_entangle.quad import QuadratureError
from field_entangle.replica import (
	LEADING_KEY,
	IntegrationSettings,
	ReplicaError,
	cutoff_sweep,
	fit_cutoff_scaling,
	renyi_cubic,
	renyi_ssb,
	renyi_ssb_pi,
	renyi_unbroken,
	short_range_fraction,
	unbroken_diagram,
	xcheck_momentum,
)
from field_entangle.results import (
	build_document,
	encode,
	entropy_record,
	format_summary_table,
	scalar_record,
	unit_factor,
	write_document,
)
from field_entangle.scaling import FitError

app = typer.Typer(
	name="field-entangle",
	help="Perturbative Rényi entanglement entropy between interacting scalar fields",
)
console = Console(stderr=True)

EXIT_CONFIG = 2
EXIT_DOMAIN = 3
EXIT_NUMERICAL = 4

DOMAIN_ERRORS = (ModelError, PropagatorError, ReplicaError, FitError, LatticeError)

Records = tuple[list[dict[str, Any]], dict[str, Any]]

AlphaOpt = Annotated[Optional[int], typer.Option("--alpha", help="Rényi index alpha >= 2")]
NOpt = Annotated[Optional[int], typer.Option("--n", help="Number of scalar fields N >= 2")]
LambdaOpt = Annotated[Optional[float], typer.Option("--lambda", help="Quartic coupling lambda")]
MassOpt = Annotated[
	Optional[float], typer.Option("--mass", help="Mass m (mu in the broken phase)")
]
CutoffOpt = Annotated[Optional[float], typer.Option("--cutoff", help="Pauli-Villars cutoff")]
MethodOpt = Annotated[Optional[str], typer.Option("--method", help="radial or mc")]
SamplesOpt = Annotated[Optional[int], typer.Option("--samples", help="Monte Carlo samples")]
SweepOpt = Annotated[
	Optional[str], typer.Option("--sweep", help="Comma-separated cutoffs (or couplings for oracle)")
]
ConfigOpt = Annotated[Optional[str], typer.Option("--config", help="Flat key = value config file")]
SeedOpt = Annotated[Optional[int], typer.Option("--seed", help="Monte Carlo base seed")]
ThreadsOpt = Annotated[Optional[int], typer.Option("--threads", help="Worker threads")]
ToleranceOpt = Annotated[
	Optional[float], typer.Option("--tolerance", help="Relative tolerance of the radial quadrature")
]
McToleranceOpt = Annotated[
	Optional[float], typer.Option("--mc-tolerance", help="Enforced Monte Carlo relative error")
]
OutputOpt = Annotated[Optional[str], typer.Option("--output", help="Write results to this file")]
FormatOpt = Annotated[Optional[str], typer.Option("--format", help="json or csv")]
UnitsOpt = Annotated[Optional[str], typer.Option("--units", help="mass or raw")]
VerboseOpt = Annotated[bool, typer.Option("--verbose", help="Log debug information")]


def configure_logging(verbose: bool) -> None:
	"""Route library logging through rich on stderr."""
	logging.basicConfig(
		level=logging.DEBUG if verbose else logging.WARNING,
		format="%(message)s",
		handlers=[RichHandler(console=console, show_time=False, show_path=False)],
		force=True,
	)


def exit_code_for(error: Exception) -> int:
	"""Map an exception to the documented exit code (0 for unknown types)."""
	if isinstance(error, ConfigError):
		return EXIT_CONFIG
	if isinstance(error, DOMAIN_ERRORS):
		return EXIT_DOMAIN
	if isinstance(error, QuadratureError):
		return EXIT_NUMERICAL
	return 0


def settings_for(config: RunConfig) -> IntegrationSettings:
	return IntegrationSettings(
		method=config.method,  # type: ignore[arg-type]
		tolerance=config.tolerance,
		samples=config.samples,
		seed=config.seed,
		workers=config.threads,
		mc_tolerance=config.mc_tolerance,
	)


def _model(config: RunConfig, phase: Phase = Phase.UNBROKEN) -> FieldTheory:
	return FieldTheory(
		n_fields=config.n_fields,
		coupling=config.coupling,
		mass=config.mass,
		cutoff=config.cutoff,
		phase=phase,
	)


def _cubic(config: RunConfig) -> Records:
	if config.vev is None:
		raise ConfigError("cubic needs --vev")
	result = renyi_cubic(
		config.alpha, config.coupling, config.vev, config.mass, config.cutoff, settings_for(config)
	)
	return [entropy_record(config, result)], {}


def _unbroken(config: RunConfig) -> Records:
	result = renyi_unbroken(
		config.alpha,
		_model(config),
		settings_for(config),
		focus=config.focus,  # type: ignore[arg-type]
	)
	return [entropy_record(config, result)], {}


def _ssb(config: RunConfig) -> Records:
	if config.lambda_u is None:
		raise ConfigError(f"{config.command} needs --lambda-u")
	entropy = renyi_ssb_pi if config.command == "ssb-pi" else renyi_ssb
	result = entropy(
		config.alpha,
		_model(config, Phase.BROKEN),
		config.lambda_u,
		config.c_t,
		settings_for(config),
	)
	return [entropy_record(config, result)], {}


def _scaling_fit(config: RunConfig) -> Records:
	if not config.sweep:
		raise ConfigError("scaling-fit needs --sweep with at least four cutoffs")
	results = cutoff_sweep(config.alpha, _model(config), config.sweep, settings_for(config))
	fit = fit_cutoff_scaling(results)
	effective = fit_cutoff_scaling(results, leading=False)
	factor, _ = unit_factor(config)
	records = []
	for r in results:
		record = entropy_record(config, r)
		record[LEADING_KEY] = r.extras[LEADING_KEY] * factor
		records.append(record)
	lowest = min(results, key=lambda r: r.cutoff)
	summary = {
		"exponent": fit.exponent,
		"prefactor": fit.prefactor * factor,
		"residual": fit.residual,
		"effective_exponent": effective.exponent,
		"mass_correction": 1.0 - lowest.value_per_volume / lowest.extras[LEADING_KEY],
	}
	return records, summary


def _xcheck(config: RunConfig) -> Records:
	model = _model(config)
	radial = renyi_unbroken(config.alpha, model, IntegrationSettings(tolerance=config.tolerance))
	momentum = xcheck_momentum(
		config.alpha,
		model,
		samples=config.samples,
		seed=config.seed,
		workers=config.threads,
		tolerance=config.mc_tolerance,
	)
	records = [entropy_record(config, radial), entropy_record(config, momentum)]
	difference = abs(records[0]["value"] - records[1]["value"])
	combined = (records[0]["error"] ** 2 + records[1]["error"] ** 2) ** 0.5
	summary = {
		"difference": difference,
		"combined_error": combined,
		"sigmas": difference / combined if combined > 0 else None,
	}
	return records, summary


def _oracle(config: RunConfig) -> Records:
	spec = LatticeSpec(
		dims=config.dims,
		sites_per_dim=config.sites,
		mass_phi=config.mass_phi,
		mass_chi=config.mass_chi,
		bilinear_g=config.bilinear_g,
	)
	value = renyi_field_entropy(spec, config.alpha)
	record = scalar_record(
		config,
		value,
		method="lattice",
		dims=config.dims,
		sites=config.sites,
		mass_chi=config.mass_chi,
	)
	record.update({"N": 2, "lambda": config.bilinear_g, "mass": config.mass_phi, "cutoff": ""})
	summary: dict[str, Any] = {}
	if config.sweep:
		sizes = config.sizes or (max(2, config.sites // 2), config.sites)
		report = perturbative_check(
			spec, config.sweep, sizes, config.alpha, volume_coupling=config.bilinear_g
		)
		summary = report.as_dict()
	return [record], summary


def _short_range(config: RunConfig) -> Records:
	model = _model(config)
	lines = unbroken_diagram(model).lines()
	range_r = config.range_r if config.range_r is not None else 10.0 / config.cutoff
	fraction = short_range_fraction(lines, config.cutoff, range_r, config.tolerance)
	summary = {"range": range_r, "fraction": fraction}
	if config.mass > 0:
		summary["fraction_beyond_compton"] = short_range_fraction(
			lines, config.cutoff, 1.0 / config.mass, config.tolerance
		)
	record = scalar_record(config, fraction, method="radial", range_r=range_r)
	return [record], summary


COMPUTATIONS: dict[str, Callable[[RunConfig], Records]] = {
	"cubic": _cubic,
	"unbroken": _unbroken,
	"ssb": _ssb,
	"ssb-pi": _ssb,
	"scaling-fit": _scaling_fit,
	"xcheck": _xcheck,
	"oracle": _oracle,
	"short-range": _short_range,
}


def compute(config: RunConfig) -> dict[str, Any]:
	"""Run the configured computation and return its result document."""
	records, summary = COMPUTATIONS[config.command](config)
	return build_document(config, records, summary)


def run(config: RunConfig) -> int:
	"""
	Compute, emit results and report errors.

	Returns:
		Exit status: 0, or 2/3/4 for config, domain and numerical errors
	"""
	try:
		document = compute(config)
	except (ConfigError, QuadratureError, *DOMAIN_ERRORS) as e:
		console.print(f"[red]Error:[/red] {escape(str(e))}", soft_wrap=True)
		return exit_code_for(e)

	console.print(format_summary_table(document))
	if config.output:
		path = write_document(document, config.output, config.format)
		console.print(f"[green]✓[/green] Results written to {path}")
	else:
		typer.echo(encode(document, config.format))
	return 0


def _invoke(command: str, config_path: Optional[str], verbose: bool, **flags: Any) -> None:
	configure_logging(verbose)
	try:
		config = build_config(command, config_path, flags)
	except ConfigError as e:
		console.print(f"[red]Error:[/red] {escape(str(e))}", soft_wrap=True)
		raise typer.Exit(code=EXIT_CONFIG)

	code = run(config)
	if code:
		raise typer.Exit(code=code)


@app.command()
def cubic(
	alpha: AlphaOpt = None,
	coupling: LambdaOpt = None,
	vev: Annotated[Optional[float], typer.Option("--vev", help="Cubic vertex scale v")] = None,
	mass: MassOpt = None,
	cutoff: CutoffOpt = None,
	method: MethodOpt = None,
	samples: SamplesOpt = None,
	config: ConfigOpt = None,
	seed: SeedOpt = None,
	threads: ThreadsOpt = None,
	tolerance: ToleranceOpt = None,
	mc_tolerance: McToleranceOpt = None,
	output: OutputOpt = None,
	fmt: FormatOpt = None,
	units: UnitsOpt = None,
	verbose: VerboseOpt = False,
) -> None:
	"""Entropy of sigma with sigma^3 and sigma pi^2 vertices (both fields of mass m)."""
	_invoke(
		"cubic",
		config,
		verbose,
		alpha=alpha,
		coupling=coupling,
		vev=vev,
		mass=mass,
		cutoff=cutoff,
		method=method,
		samples=samples,
		seed=seed,
		threads=threads,
		tolerance=tolerance,
		mc_tolerance=mc_tolerance,
		output=output,
		format=fmt,
		units=units,
	)


@app.command()
def unbroken(
	alpha: AlphaOpt = None,
	n: NOpt = None,
	coupling: LambdaOpt = None,
	mass: MassOpt = None,
	cutoff: CutoffOpt = None,
	focus: Annotated[Optional[str], typer.Option("--focus", help="sigma or pi")] = None,
	method: MethodOpt = None,
	samples: SamplesOpt = None,
	config: ConfigOpt = None,
	seed: SeedOpt = None,
	threads: ThreadsOpt = None,
	tolerance: ToleranceOpt = None,
	mc_tolerance: McToleranceOpt = None,
	output: OutputOpt = None,
	fmt: FormatOpt = None,
	units: UnitsOpt = None,
	verbose: VerboseOpt = False,
) -> None:
	"""Entropy of one field of the O(N) model in the unbroken phase."""
	_invoke(
		"unbroken",
		config,
		verbose,
		alpha=alpha,
		n_fields=n,
		coupling=coupling,
		mass=mass,
		cutoff=cutoff,
		focus=focus,
		method=method,
		samples=samples,
		seed=seed,
		threads=threads,
		tolerance=tolerance,
		mc_tolerance=mc_tolerance,
		output=output,
		format=fmt,
		units=units,
	)


LambdaUOpt = Annotated[
	Optional[float], typer.Option("--lambda-u", help="Coupling at the shift scale, below 1/e")
]
CtOpt = Annotated[Optional[float], typer.Option("--c-t", help="Scheme constant C_t > 0")]


@app.command()
def ssb(
	alpha: AlphaOpt = None,
	n: NOpt = None,
	coupling: LambdaOpt = None,
	mass: MassOpt = None,
	cutoff: CutoffOpt = None,
	lambda_u: LambdaUOpt = None,
	c_t: CtOpt = None,
	method: MethodOpt = None,
	samples: SamplesOpt = None,
	config: ConfigOpt = None,
	seed: SeedOpt = None,
	threads: ThreadsOpt = None,
	tolerance: ToleranceOpt = None,
	mc_tolerance: McToleranceOpt = None,
	output: OutputOpt = None,
	fmt: FormatOpt = None,
	units: UnitsOpt = None,
	verbose: VerboseOpt = False,
) -> None:
	"""Entropy of sigma in the spontaneously broken phase."""
	_invoke(
		"ssb",
		config,
		verbose,
		alpha=alpha,
		n_fields=n,
		coupling=coupling,
		mass=mass,
		cutoff=cutoff,
		lambda_u=lambda_u,
		c_t=c_t,
		method=method,
		samples=samples,
		seed=seed,
		threads=threads,
		tolerance=tolerance,
		mc_tolerance=mc_tolerance,
		output=output,
		format=fmt,
		units=units,
	)


@app.command(name="ssb-pi")
def ssb_pi(
	alpha: AlphaOpt = None,
	n: NOpt = None,
	coupling: LambdaOpt = None,
	mass: MassOpt = None,
	cutoff: CutoffOpt = None,
	lambda_u: LambdaUOpt = None,
	c_t: CtOpt = None,
	method: MethodOpt = None,
	samples: SamplesOpt = None,
	config: ConfigOpt = None,
	seed: SeedOpt = None,
	threads: ThreadsOpt = None,
	tolerance: ToleranceOpt = None,
	mc_tolerance: McToleranceOpt = None,
	output: OutputOpt = None,
	fmt: FormatOpt = None,
	units: UnitsOpt = None,
	verbose: VerboseOpt = False,
) -> None:
	"""Entropy of a single pi field in the spontaneously broken phase."""
	_invoke(
		"ssb-pi",
		config,
		verbose,
		alpha=alpha,
		n_fields=n,
		coupling=coupling,
		mass=mass,
		cutoff=cutoff,
		lambda_u=lambda_u,
		c_t=c_t,
		method=method,
		samples=samples,
		seed=seed,
		threads=threads,
		tolerance=tolerance,
		mc_tolerance=mc_tolerance,
		output=output,
		format=fmt,
		units=units,
	)


@app.command(name="scaling-fit")
def scaling_fit(
	sweep: SweepOpt = None,
	alpha: AlphaOpt = None,
	n: NOpt = None,
	coupling: LambdaOpt = None,
	mass: MassOpt = None,
	cutoff: CutoffOpt = None,
	config: ConfigOpt = None,
	threads: ThreadsOpt = None,
	tolerance: ToleranceOpt = None,
	output: OutputOpt = None,
	fmt: FormatOpt = None,
	units: UnitsOpt = None,
	verbose: VerboseOpt = False,
) -> None:
	"""Sweep the cutoff in the unbroken phase and fit S/V = C' cutoff^p."""
	_invoke(
		"scaling-fit",
		config,
		verbose,
		sweep=sweep,
		alpha=alpha,
		n_fields=n,
		coupling=coupling,
		mass=mass,
		cutoff=cutoff,
		threads=threads,
		tolerance=tolerance,
		output=output,
		format=fmt,
		units=units,
	)


@app.command()
def xcheck(
	alpha: AlphaOpt = None,
	n: NOpt = None,
	coupling: LambdaOpt = None,
	mass: MassOpt = None,
	cutoff: CutoffOpt = None,
	samples: SamplesOpt = None,
	config: ConfigOpt = None,
	seed: SeedOpt = None,
	threads: ThreadsOpt = None,
	tolerance: ToleranceOpt = None,
	mc_tolerance: McToleranceOpt = None,
	output: OutputOpt = None,
	fmt: FormatOpt = None,
	units: UnitsOpt = None,
	verbose: VerboseOpt = False,
) -> None:
	"""Compare the radial result with the momentum-space Monte Carlo evaluation."""
	_invoke(
		"xcheck",
		config,
		verbose,
		alpha=alpha,
		n_fields=n,
		coupling=coupling,
		mass=mass,
		cutoff=cutoff,
		samples=samples,
		seed=seed,
		threads=threads,
		tolerance=tolerance,
		mc_tolerance=mc_tolerance,
		output=output,
		format=fmt,
		units=units,
	)


@app.command()
def oracle(
	alpha: AlphaOpt = None,
	dims: Annotated[Optional[int], typer.Option("--dims", help="Lattice dimension 1-3")] = None,
	sites: Annotated[Optional[int], typer.Option("--sites", help="Sites per dimension")] = None,
	mass_phi: Annotated[Optional[float], typer.Option("--mass-phi", help="Mass of phi")] = None,
	mass_chi: Annotated[Optional[float], typer.Option("--mass-chi", help="Mass of chi")] = None,
	g: Annotated[Optional[float], typer.Option("--g", help="Bilinear coupling g")] = None,
	sweep: SweepOpt = None,
	sizes: Annotated[
		Optional[str], typer.Option("--sizes", help="Comma-separated lattice sizes")
	] = None,
	config: ConfigOpt = None,
	output: OutputOpt = None,
	fmt: FormatOpt = None,
	verbose: VerboseOpt = False,
) -> None:
	"""Exact lattice entropy of phi; with --sweep, the small-coupling and volume checks."""
	_invoke(
		"oracle",
		config,
		verbose,
		alpha=alpha,
		dims=dims,
		sites=sites,
		mass_phi=mass_phi,
		mass_chi=mass_chi,
		bilinear_g=g,
		sweep=sweep,
		sizes=sizes,
		output=output,
		format=fmt,
	)


@app.command(name="short-range")
def short_range(
	n: NOpt = None,
	coupling: LambdaOpt = None,
	mass: MassOpt = None,
	cutoff: CutoffOpt = None,
	range_r: Annotated[
		Optional[float], typer.Option("--range", help="Separation R (default 10/cutoff)")
	] = None,
	config: ConfigOpt = None,
	tolerance: ToleranceOpt = None,
	output: OutputOpt = None,
	fmt: FormatOpt = None,
	verbose: VerboseOpt = False,
) -> None:
	"""Share of the unbroken-phase integral coming from separations beyond --range."""
	_invoke(
		"short-range",
		config,
		verbose,
		n_fields=n,
		coupling=coupling,
		mass=mass,
		cutoff=cutoff,
		range_r=range_r,
		tolerance=tolerance,
		output=output,
		format=fmt,
	)


if __name__ == "__main__":
	app()
