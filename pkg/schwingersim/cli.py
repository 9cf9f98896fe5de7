"""Command line entry point: python -m schwingersim <kind> [--config FILE] [--set key.path=value] [--seed N] [--threads N] [--out DIR] [-v]

Each run writes one CSV per observable (or per curve) and a manifest.json describing exactly what was run"""

import argparse
import logging
import math
import time
from collections.abc import Sequence
from pathlib import Path
from typing import Any

from pydantic import ValidationError
from pydantic_core import from_json, to_json

from .continuum import RampSchedule, continuum_sweep, spacing_for_ratio
from .engine import StateVector, evolve_grid
from .exceptions import ConfigError, NumericalError, ParameterError, ProtocolError
from .model import ModelParams, bare_vacuum, build_hamiltonian
from .models.run_config import RunConfig
from .noise import ensemble_average, hiding_failure_monte_carlo
from .observables import TimeSeries, half_chain_entropy, observable_series, write_joint_csv
from .selftest import run_selftest
from .settings import SchwingerSimSettings
from .trotter import CompiledSchedule, TrotterSchedule, compile_cycle, preparation_gate_counts, run_schedule, wall_clock_seconds
from .typedefs import JSONDict
from .utils import parse_data, parse_jsonc
from .version import describe_build

logger = logging.getLogger(__name__)
_settings = SchwingerSimSettings()

EXIT_OK = 0
EXIT_SELFTEST_FAILED = 1
EXIT_CONFIG_ERROR = 2
EXIT_NUMERICAL_ERROR = 3
EXIT_PROTOCOL_ERROR = 4

run_kinds = ('evolve', 'trotter', 'noise', 'entropy', 'continuum', 'compare')


def apply_override(data: JSONDict, override: str) -> None:
	"""Sets a dotted key path from key.path=value, value parsed as JSON if it can be, as a plain string otherwise"""
	key, sep, raw = override.partition('=')
	if not sep or not key:
		raise ConfigError(override, 'overrides look like key.path=value')
	try:
		value = from_json(raw)
	except ValueError:
		value = raw
	*parents, leaf = key.split('.')
	node = data
	for part in parents:
		child = node.setdefault(part, {})
		if not isinstance(child, dict):
			raise ConfigError(key, f'{part} is not a section')
		node = child
	node[leaf] = value


def parse_config(
	path: Path | None,
	overrides: Sequence[str] = (),
	*,
	kind: str | None = None,
	seed: int | None = None,
	threads: int | None = None,
	out: Path | None = None,
) -> RunConfig:
	"""Reads a JSONC config file if given, then applies --set overrides and the common flags, which win over the file

	Raises:
		ConfigError: naming the offending field"""
	data: JSONDict = {}
	if path is not None:
		try:
			text = path.read_text('utf-8')
		except OSError as e:
			raise ConfigError(str(path), f'cannot read config ({e.strerror})') from e
		try:
			parsed = parse_jsonc(text)
		except ValueError as e:
			raise ConfigError(str(path), f'not valid JSON with comments: {e}') from e
		if not isinstance(parsed, dict):
			raise ConfigError(str(path), 'config must be an object')
		data = parsed
	for override in overrides:
		apply_override(data, override)
	if kind is not None:
		if data.get('kind', kind) != kind:
			raise ConfigError('kind', f'config is for {data["kind"]} runs, not {kind}')
		data['kind'] = kind
	if seed is not None:
		data['seed'] = seed
	if threads is not None:
		data['threads'] = threads
	if out is not None:
		data['output_dir'] = str(out)
	try:
		return RunConfig.model_validate(data)
	except ValidationError as e:
		error = e.errors()[0]
		raise ConfigError('.'.join(str(part) for part in error['loc']), error['msg']) from e


def plots_for_kind(kind: str) -> list[str]:
	plots: JSONDict = parse_data('plots')
	return [plot for plot, info in plots.items() if info['kind'] == kind]


class _Run:
	"""Output bookkeeping for one run"""

	def __init__(self, config: RunConfig) -> None:
		self.config = config
		self.directory = config.output_dir or _settings.output_root / config.kind
		self.files: list[Path] = []
		self.extra: JSONDict = {}
		self.threads = config.threads or _settings.threads

	def write_series(self, series: TimeSeries, filename: str) -> None:
		path = self.directory / filename
		series.to_csv(path)
		self.files.append(path)

	def write_joint(self, columns: dict[str, TimeSeries], filename: str) -> None:
		path = self.directory / filename
		write_joint_csv(path, columns)
		self.files.append(path)

	@property
	def params(self) -> ModelParams:
		assert self.config.model is not None, 'model section checked by RunConfig'
		return self.config.model

	@property
	def psi0(self) -> StateVector:
		return StateVector.from_basis_state(bare_vacuum(self.params.n_sites))

	def exact(self) -> tuple[list[float], list[StateVector]]:
		grid = self.config.time_grid.points()
		states = evolve_grid(build_hamiltonian(self.params), self.psi0, [wt / self.params.w for wt in grid])
		return grid, states

	def compiled(self, cycle_wt: float) -> CompiledSchedule:
		"""Enough cycles of length cycle_wt (in units of 1/w) to reach the end of the time grid"""
		n_cycles = math.ceil(self.config.time_grid.stop / cycle_wt - 1e-9)
		schedule = TrotterSchedule.for_params(self.params, cycle_wt / self.params.w, n_cycles)
		compiled = compile_cycle(self.params, schedule)
		self.extra.setdefault('gate_counts', {})[f'T{cycle_wt:g}'] = compiled.counts._asdict()
		self.extra['lab_seconds_at_stop'] = wall_clock_seconds(self.params, self.config.time_grid.stop)
		return compiled

	def trotter_series(self, cycle_wt: float) -> dict[str, TimeSeries]:
		compiled = self.compiled(cycle_wt)
		trajectory = run_schedule(compiled, self.psi0)
		times = [t * self.params.w for t in trajectory.times]
		return observable_series(trajectory.states, times, self.psi0, self.config.observables, unit='wt')

	def noisy_series(self, cycle_wt: float) -> dict[str, TimeSeries]:
		noise = self.config.noise
		assert noise is not None, 'noise section checked by RunConfig'
		compiled = self.compiled(cycle_wt)
		if noise.hide_fail_p > 0:
			stats = hiding_failure_monte_carlo(compiled.gates, noise.hide_fail_p, noise.seed, self.config.hiding_shots)
			self.extra.setdefault('hiding', {})[f'T{cycle_wt:g}'] = stats._asdict()
		return ensemble_average(compiled, noise, self.psi0, self.config.observables, threads=self.threads)


def _run_evolve(run: _Run) -> None:
	grid, states = run.exact()
	for name, series in observable_series(states, grid, run.psi0, run.config.observables).items():
		run.write_series(series, f'{name}.csv')


def _run_entropy(run: _Run) -> None:
	grid, states = run.exact()
	run.write_series(
		TimeSeries(grid, [half_chain_entropy(state) for state in states], name='entropy'), 'entropy.csv'
	)
	cuts = {
		f'cut_{cut}': TimeSeries(grid, [half_chain_entropy(state, cut) for state in states], name=f'cut_{cut}')
		for cut in range(1, run.params.n_sites)
	}
	run.write_joint(cuts, 'entropy_cuts.csv')


def _run_trotter(run: _Run) -> None:
	assert run.config.schedule is not None
	for cycle_wt in run.config.schedule.cycle_times:
		for name, series in run.trotter_series(cycle_wt).items():
			run.write_series(series, f'{name}_T{cycle_wt:g}.csv')


def _run_noise(run: _Run) -> None:
	assert run.config.schedule is not None
	for cycle_wt in run.config.schedule.cycle_times:
		for name, series in run.noisy_series(cycle_wt).items():
			run.write_series(series, f'{name}_T{cycle_wt:g}_noisy.csv')


def _run_compare(run: _Run) -> None:
	"""Exact, Trotterized and (if there is a noise section) noisy curves side by side, one file per observable"""
	assert run.config.schedule is not None
	grid, states = run.exact()
	columns: dict[str, dict[str, TimeSeries]] = {
		name: {'exact': series}
		for name, series in observable_series(states, grid, run.psi0, run.config.observables).items()
	}
	for cycle_wt in run.config.schedule.cycle_times:
		for name, series in run.trotter_series(cycle_wt).items():
			columns[name][f'trotter_T{cycle_wt:g}'] = series
		if run.config.noise is not None:
			for name, series in run.noisy_series(cycle_wt).items():
				columns[name][f'noisy_T{cycle_wt:g}'] = series
	for name, by_column in columns.items():
		run.write_joint(by_column, f'compare_{name}.csv')


def _run_continuum(run: _Run) -> None:
	continuum = run.config.continuum
	assert continuum is not None
	spacings = [spacing_for_ratio(continuum.mass, ratio, continuum.g_over_m) for ratio in continuum.m_over_w]
	ramp = None
	if continuum.ramp_time is not None:
		ramp = RampSchedule(total_time=continuum.ramp_time / continuum.mass, shape=continuum.ramp_shape)
	result = continuum_sweep(
		spacings,
		continuum.sizes,
		run.config.time_grid.points(),
		initial=continuum.initial,
		ramp=ramp,
		threads=run.threads,
	)
	run.files += result.write(run.directory)
	run.extra['unstable_time_points'] = {spacing.label: result.unstable_count(spacing) for spacing in spacings}
	if continuum.initial == 'adiabatic':
		run.extra['preparation_gate_counts'] = {str(n): preparation_gate_counts(n) for n in continuum.sizes}


_runners = {
	'evolve': _run_evolve,
	'entropy': _run_entropy,
	'trotter': _run_trotter,
	'noise': _run_noise,
	'compare': _run_compare,
	'continuum': _run_continuum,
}


def run(config: RunConfig) -> Path:
	"""Runs the experiment and writes its manifest, returning the manifest's path"""
	started = time.perf_counter()
	current = _Run(config)
	logger.info('Running %s into %s', config.kind, current.directory)
	_runners[config.kind](current)
	manifest: dict[str, Any] = {
		'kind': config.kind,
		'config': config.model_dump(mode='json'),
		'seed': config.seed,
		'version': describe_build(),
		'wall_time_seconds': time.perf_counter() - started,
		'files': [str(path.relative_to(current.directory)) for path in current.files],
		'plots': plots_for_kind(config.kind),
		**current.extra,
	}
	path = current.directory / 'manifest.json'
	path.parent.mkdir(parents=True, exist_ok=True)
	path.write_bytes(to_json(manifest, indent=2))
	logger.info('Wrote %d files and %s', len(current.files), path)
	return path


def build_parser() -> argparse.ArgumentParser:
	parser = argparse.ArgumentParser(prog='schwingersim', description='Classical simulation of the encoded lattice Schwinger model')
	subparsers = parser.add_subparsers(dest='command', required=True)
	for kind in run_kinds:
		sub = subparsers.add_parser(kind, help=f'{kind} run')
		sub.add_argument('--config', type=Path, help='JSONC run configuration')
		sub.add_argument('--set', action='append', default=[], metavar='KEY=VALUE', help='override a config value, e.g. model.n_sites=10')
		sub.add_argument('--seed', type=int)
		sub.add_argument('--threads', type=int)
		sub.add_argument('--out', type=Path, help='output directory')
		sub.add_argument('-v', '--verbose', action='store_true')
	selftest = subparsers.add_parser('selftest', help='run the oracle and identity checks')
	selftest.add_argument('-v', '--verbose', action='store_true')
	return parser


def main(argv: Sequence[str] | None = None) -> int:
	args = build_parser().parse_args(argv)
	logging.basicConfig(
		level=logging.DEBUG if args.verbose else _settings.log_level,
		format='%(asctime)s %(levelname)s %(name)s: %(message)s',
	)
	if args.command == 'selftest':
		return EXIT_OK if run_selftest() else EXIT_SELFTEST_FAILED
	try:
		config = parse_config(
			args.config, args.set, kind=args.command, seed=args.seed, threads=args.threads, out=args.out
		)
		run(config)
	except (ConfigError, ParameterError) as e:
		logger.error('Configuration error: %s', e)
		return EXIT_CONFIG_ERROR
	except NumericalError as e:
		logger.error('Numerical failure: %s', e)
		return EXIT_NUMERICAL_ERROR
	except ProtocolError as e:
		logger.error('Gate protocol violated: %s', e)
		return EXIT_PROTOCOL_ERROR
	return EXIT_OK
