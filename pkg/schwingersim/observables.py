"""Physical quantities computed from states: particle density, vacuum persistence and its rate functions, entanglement, fields, and time series of them"""

import logging
import math
from collections.abc import Callable, Iterable, Mapping, Sequence
from pathlib import Path
from typing import TYPE_CHECKING, Any, NamedTuple

import numpy as np
import scipy.linalg

from .engine import StateVector, schmidt_coefficients
from .exceptions import ParameterError, PreconditionError
from .model import BasisState, gauss_field_profile, staggered_sign
from .utils import write_csv

if TYPE_CHECKING:
	from .typedefs import RealArray

logger = logging.getLogger(__name__)

loschmidt_floor = 1e-300
"""Loschmidt echoes below this are clamped before taking the log"""
entropy_cutoff = 1e-14
"""Schmidt weights below this are left out of entropies"""
sector_weight_cutoff = 1e-12


def _staggering(n_sites: int) -> 'RealArray':
	return np.array([staggered_sign(n) for n in range(1, n_sites + 1)], dtype=float)


def particle_density(psi: StateVector) -> float:
	"""ν = (1/2N) Σ ((-1)^n ⟨σᶻ_n⟩ + 1), 0 for the bare vacuum and 1 when every site is flipped from it"""
	z = psi.z_expectations()
	return float(np.sum(_staggering(psi.n_sites) * z + 1) / (2 * psi.n_sites))


class Persistence(NamedTuple):
	amplitude: complex
	"""G = ⟨ψ₀|ψ(t)⟩"""
	loschmidt: float
	"""|G|²"""
	rate: float
	"""λ = -log(|G|²)/N"""
	n_sites: int
	overflow: bool
	"""The echo was below loschmidt_floor and the rate is only a lower bound"""


def _clamped_log(loschmidt: float) -> tuple[float, bool]:
	if loschmidt < loschmidt_floor:
		logger.warning('Loschmidt echo %g underflows, clamping to %g', loschmidt, loschmidt_floor)
		return math.log(loschmidt_floor), True
	return math.log(min(loschmidt, 1.0)), False


def vacuum_persistence(psi0: StateVector, psi_t: StateVector) -> Persistence:
	amplitude = psi0.overlap(psi_t)
	loschmidt = abs(amplitude) ** 2
	log_echo, overflow = _clamped_log(loschmidt)
	return Persistence(amplitude, loschmidt, -log_echo / psi0.n_sites, psi0.n_sites, overflow)


def rate_function_kappa(loschmidt: float, spacing: float, n_sites: int) -> float:
	"""κ = -log(L)/(aN), the rate per unit length of a chain of total length aN

	Raises:
		ParameterError: if spacing is not positive"""
	if spacing <= 0:
		raise ParameterError(f'Lattice spacing must be positive, got {spacing}')
	log_echo, _ = _clamped_log(loschmidt)
	return -log_echo / (spacing * n_sites)


def von_neumann_entropy(weights: 'RealArray') -> float:
	"""-Σ p log p in nats"""
	weights = weights[weights > entropy_cutoff]
	return float(-np.sum(weights * np.log(weights)))


def half_chain_entropy(psi: StateVector, cut: int | None = None) -> float:
	"""Entanglement entropy between sites 1..cut and the rest, cut defaulting to the middle"""
	cut = psi.n_sites // 2 if cut is None else cut
	return von_neumann_entropy(schmidt_coefficients(psi, cut) ** 2)


def total_magnetization(psi: StateVector) -> float:
	return float(psi.z_expectations().sum())


def electric_field_expectation(psi: StateVector, eps0: int = 0) -> 'RealArray':
	"""⟨L_n⟩ on each of the N - 1 links, from the Gauss law applied to ⟨σᶻ⟩"""
	increments = psi.z_expectations() + _staggering(psi.n_sites)
	return eps0 + np.cumsum(increments)[:-1] / 2


def single_sector(psi: StateVector) -> int:
	"""The magnetization sector psi lives in

	Raises:
		PreconditionError: if psi has weight on more than one sector, ie. it does not have definite charge"""
	sectors = [m for m, weight in psi.sector_weights().items() if weight > sector_weight_cutoff]
	if len(sectors) != 1:
		raise PreconditionError(f'State is spread over magnetization sectors {sectors}, charge is not conserved')
	return sectors[0]


def extended_state_entropy(psi: StateVector, cut: int, eps0: int = 0, boundary_link_side: str = 'left') -> float:
	"""Block entropy of the state with the gauge links put back, each link set by the Gauss law, and the link across the cut belonging to the left block, the right block, or copied into both ('doubled')
	Only the configurations psi actually has are enumerated, so the link register size never matters

	Raises:
		PreconditionError: if psi does not have a definite magnetization"""
	if boundary_link_side not in {'left', 'right', 'doubled'}:
		raise ParameterError(f'boundary_link_side must be left, right or doubled, got {boundary_link_side!r}')
	if not 1 <= cut <= psi.n_sites - 1:
		raise ParameterError(f'cut must be between 1 and {psi.n_sites - 1}, got {cut}')
	single_sector(psi)

	left_rows: dict[tuple[Any, ...], int] = {}
	right_cols: dict[tuple[Any, ...], int] = {}
	entries = []
	for index in np.flatnonzero(np.abs(psi.amplitudes) > 0):
		state = BasisState.from_index(psi.n_sites, int(index))
		links = gauss_field_profile(state, eps0).links
		left = (state.spins[:cut], links[: cut - 1])
		right = (state.spins[cut:], links[cut:])
		if boundary_link_side in {'left', 'doubled'}:
			left += (links[cut - 1],)
		if boundary_link_side in {'right', 'doubled'}:
			right += (links[cut - 1],)
		row = left_rows.setdefault(left, len(left_rows))
		col = right_cols.setdefault(right, len(right_cols))
		entries.append((row, col, psi.amplitudes[index]))

	schmidt_matrix = np.zeros((len(left_rows), len(right_cols)), dtype=np.complex128)
	for row, col, amplitude in entries:
		schmidt_matrix[row, col] += amplitude
	return von_neumann_entropy(scipy.linalg.svdvals(schmidt_matrix) ** 2)


Observable = Callable[[StateVector, StateVector], float]
"""Called with the state at time t and the initial state"""

OBSERVABLES: Mapping[str, Observable] = {
	'nu': lambda psi, _: particle_density(psi),
	'lambda': lambda psi, psi0: vacuum_persistence(psi0, psi).rate,
	'loschmidt': lambda psi, psi0: vacuum_persistence(psi0, psi).loschmidt,
	'entropy': lambda psi, _: half_chain_entropy(psi),
	'magnetization': lambda psi, _: total_magnetization(psi),
}


def get_observable(name: str) -> Observable:
	try:
		return OBSERVABLES[name]
	except KeyError as e:
		raise ParameterError(f'Unknown observable {name!r}, expected one of {sorted(OBSERVABLES)}') from e


class TimeSeries:
	"""An observable sampled on a strictly increasing time grid, optionally an ensemble mean with standard errors"""

	def __init__(
		self,
		times: Iterable[float],
		values: Iterable[float],
		*,
		name: str,
		unit: str = 'wt',
		stderr: Iterable[float] | None = None,
		n_traj: int | None = None,
		metadata: Mapping[str, Any] | None = None,
	) -> None:
		self.times = np.array(times, dtype=float)
		self.values = np.array(values, dtype=float)
		self.stderr = None if stderr is None else np.array(stderr, dtype=float)
		if self.times.shape != self.values.shape or (self.stderr is not None and self.stderr.shape != self.times.shape):
			raise ParameterError(f'{name}: times and values have different lengths')
		if np.any(np.diff(self.times) <= 0):
			raise ParameterError(f'{name}: times must be strictly increasing')
		self.name = name
		self.unit = unit
		self.n_traj = n_traj
		self.metadata = dict(metadata or {})

	def __repr__(self) -> str:
		return f'{self.__class__.__qualname__}({self.name!r}, {len(self)} points in {self.unit})'

	def __len__(self) -> int:
		return self.times.size

	@property
	def header(self) -> list[str]:
		if self.stderr is None:
			return [self.unit, self.name]
		return [self.unit, f'{self.name}_mean', f'{self.name}_stderr', 'n_traj']

	def rows(self) -> Iterable[Sequence[float | int | None]]:
		for i, t in enumerate(self.times):
			if self.stderr is None:
				yield (float(t), float(self.values[i]))
			else:
				yield (float(t), float(self.values[i]), float(self.stderr[i]), self.n_traj)

	def to_csv(self, path: Path) -> None:
		write_csv(path, self.header, self.rows())

	def value_at(self, t: float) -> float:
		index = int(np.argmin(np.abs(self.times - t)))
		if not math.isclose(self.times[index], t, rel_tol=1e-9, abs_tol=1e-12):
			raise ParameterError(f'{self.name} has no sample at {self.unit}={t}')
		return float(self.values[index])

	def local_maxima(self) -> list[tuple[float, float]]:
		"""(time, value) of every interior sample strictly above its neighbours"""
		v = self.values
		return [
			(float(self.times[i]), float(v[i]))
			for i in range(1, v.size - 1)
			if v[i] > v[i - 1] and v[i] > v[i + 1]
		]


def observable_series(
	states: Sequence[StateVector],
	times: Sequence[float],
	psi0: StateVector,
	names: Iterable[str],
	*,
	unit: str = 'wt',
	metadata: Mapping[str, Any] | None = None,
) -> dict[str, TimeSeries]:
	"""One TimeSeries per observable name, times already in the given unit"""
	return {
		name: TimeSeries(
			times,
			[get_observable(name)(state, psi0) for state in states],
			name=name,
			unit=unit,
			metadata=metadata,
		)
		for name in names
	}


def _time_key(t: float) -> float:
	return round(t, 9)


def write_joint_csv(path: Path, columns: Mapping[str, TimeSeries], unit: str = 'wt') -> None:
	"""Several series side by side on the union of their time grids, blank where a series has no sample"""
	grid = sorted({_time_key(t) for series in columns.values() for t in series.times})
	header = [unit]
	lookups = []
	for column, series in columns.items():
		by_time = {_time_key(t): i for i, t in enumerate(series.times)}
		lookups.append((series, by_time))
		header.append(column)
		if series.stderr is not None:
			header.append(f'{column}_stderr')
	rows = []
	for t in grid:
		row: list[float | None] = [t]
		for series, by_time in lookups:
			i = by_time.get(t)
			row.append(None if i is None else float(series.values[i]))
			if series.stderr is not None:
				row.append(None if i is None else float(series.stderr[i]))
		rows.append(row)
	write_csv(path, header, rows)
