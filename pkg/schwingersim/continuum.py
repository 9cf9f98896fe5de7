"""Towards the continuum: couplings from a lattice spacing, preparing the g = 0 ground state by ramping the hopping on, quenching to g > 0, and extrapolating rate functions to infinite size at each spacing"""

import logging
import math
from collections.abc import Collection, Iterable, Mapping, Sequence
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Literal, NamedTuple

import numpy as np
from pydantic import BaseModel, Field, TypeAdapter

from .engine import StateVector, apply_sequence, evolve_exact, evolve_grid, ground_state
from .exceptions import FitError, ParameterError
from .model import ModelParams, bare_vacuum, build_hamiltonian
from .observables import TimeSeries, rate_function_kappa
from .settings import SchwingerSimSettings
from .trotter import TrotterSchedule, compile_section2, compile_section3, pair_splitting_warn_threshold

logger = logging.getLogger(__name__)
_settings = SchwingerSimSettings()

ramp_steps_per_unit_time = 10
"""Default piecewise-constant steps per 1/w of ramp"""
instability_threshold = 0.05
"""Relative change of κ∞ when adding the 1/N² term above which an extrapolation is flagged"""


class LatticeSpacing(BaseModel):
	model_config = {'extra': 'forbid', 'frozen': True}

	a: float = Field(gt=0)
	g: float = Field(default=0.0, ge=0)
	mass: float = Field(default=0.0, ge=0)

	@property
	def w(self) -> float:
		return 1 / (2 * self.a)

	@property
	def j(self) -> float:
		return self.g * self.g * self.a / 2

	@property
	def label(self) -> str:
		return f'a_{self.a:g}'

	def to_params(self, n_sites: int, j0: float = 1.0) -> ModelParams:
		return ModelParams(n_sites=n_sites, w=self.w, j=self.j, mass=self.mass, j0=j0)

	def updated_copy(self, **changes: object) -> 'LatticeSpacing':
		return type(self).model_validate(self.model_dump() | changes)


class Couplings(NamedTuple):
	w: float
	j: float
	mass: float


def couplings_from_spacing(spacing: LatticeSpacing) -> Couplings:
	"""w = 1/(2a) and J = g²a/2, the mass does not depend on a"""
	if spacing.a <= 0:
		raise ParameterError(f'Lattice spacing must be positive, got {spacing.a}')
	return Couplings(spacing.w, spacing.j, spacing.mass)


def spacing_for_ratio(mass: float, m_over_w: float, g_over_m: float) -> LatticeSpacing:
	"""The spacing that gives the ratios m/w and g/m for a fixed mass"""
	if mass <= 0 or m_over_w <= 0:
		raise ParameterError(f'mass and m/w must be positive, got {mass} and {m_over_w}')
	return LatticeSpacing(a=m_over_w / (2 * mass), g=g_over_m * mass, mass=mass)


RampShape = Literal['linear', 'sine', 'smoothstep']


class RampSchedule(BaseModel):
	"""f(t) switching the hopping on, f(0) = 0 and f(total_time) = 1"""

	model_config = {'extra': 'forbid', 'frozen': True}

	total_time: float = Field(ge=0)
	n_steps: int | None = Field(default=None, ge=1)
	"""Piecewise-constant steps, ramp_steps_per_unit_time per 1/w if not given"""
	shape: RampShape = 'linear'

	def f(self, t: float) -> float:
		if self.total_time == 0:
			return 1.0
		s = min(max(t / self.total_time, 0.0), 1.0)
		if self.shape == 'sine':
			return math.sin(math.pi * s / 2) ** 2
		if self.shape == 'smoothstep':
			return s * s * (3 - 2 * s)
		return s

	def steps_for(self, w: float) -> int:
		if self.n_steps is not None:
			return self.n_steps
		return max(1, math.ceil(ramp_steps_per_unit_time * self.total_time * w))

	def midpoints(self, w: float) -> list[tuple[float, float]]:
		"""(duration, f at the middle of the step) for each piecewise-constant step"""
		if self.total_time == 0:
			return []
		n_steps = self.steps_for(w)
		dt = self.total_time / n_steps
		return [(dt, self.f((k + 0.5) * dt)) for k in range(n_steps)]


class Preparation(NamedTuple):
	state: StateVector
	fidelity: float | None
	"""With the g = 0 ground state in the zero-charge sector, if the system was small enough to compute it"""


def _prepare_digitally(params: ModelParams, ramp: RampSchedule, psi: StateVector) -> StateVector:
	# J₀·dt_ii·(N - 1) at full hopping
	if params.w * ramp.total_time / ramp.steps_for(params.w) * (params.n_sites - 1) > pair_splitting_warn_threshold:
		logger.warning('Ramp steps are long compared to 1/J₀, sequential pair windows will be a poor approximation')
	for dt, f in ramp.midpoints(params.w):
		step_params = params.updated_copy(w=f * params.w)
		schedule = TrotterSchedule(cycle_time=dt, dt_i=0.0, dt_ii=step_params.w * dt / params.j0)
		schedule.check_fits(params.n_sites, params.j0)
		gates = [*compile_section2(step_params, schedule, warn=False), compile_section3(step_params, schedule)]
		psi = apply_sequence(gates, psi)
	return psi


def adiabatic_prepare(
	params: ModelParams,
	ramp: RampSchedule,
	psi0: StateVector | None = None,
	*,
	digital: bool = False,
	tol: float | None = None,
) -> Preparation:
	"""Evolves under H_m + f(t)H_± from the bare vacuum (or psi0), with the electric term off whatever params.j is
	digital compiles each step into section II pair windows and mass rotations instead of evolving exactly"""
	params = params.updated_copy(j=0.0)
	psi = StateVector.from_basis_state(bare_vacuum(params.n_sites)) if psi0 is None else psi0
	terms = build_hamiltonian(params)
	if digital:
		psi = _prepare_digitally(params, ramp, psi)
	else:
		for dt, f in ramp.midpoints(params.w):
			psi = evolve_exact(terms.scaled(pm=f), psi, dt, tol)

	fidelity = None
	if params.n_sites <= _settings.dense_limit:
		target = ground_state(terms, magnetization=0)
		fidelity = target.state.fidelity(psi)
		logger.info('Prepared %d sites with ground state fidelity %.6f', params.n_sites, fidelity)
	return Preparation(psi, fidelity)


def quench_run(
	initial: StateVector, spacing: LatticeSpacing, mt_grid: Sequence[float], tol: float | None = None
) -> TimeSeries:
	"""κ(t) after switching the electric term on, sampled at times t = mt/m

	Raises:
		ParameterError: if the mass is zero, as times are in units of 1/m"""
	if spacing.mass <= 0:
		raise ParameterError('Quench times are in units of 1/m, which needs a positive mass')
	params = spacing.to_params(initial.n_sites)
	states = evolve_grid(build_hamiltonian(params), initial, [mt / spacing.mass for mt in mt_grid], tol)
	kappa = [rate_function_kappa(initial.fidelity(state), spacing.a, initial.n_sites) for state in states]
	return TimeSeries(
		mt_grid,
		kappa,
		name='kappa',
		unit='mt',
		metadata={'spacing': spacing.model_dump(), 'n_sites': initial.n_sites},
	)


class Extrapolation(BaseModel):
	"""Least squares fit of κ_N = κ∞ + Σ c_k / N^k"""

	model_config = {'extra': 'forbid', 'frozen': True}

	kappa_inf: float
	coefficients: tuple[float, ...]
	"""c_k for each of orders, in the same order"""
	orders: tuple[int, ...]
	residual: float
	"""2-norm of the fit residuals"""
	sizes: tuple[int, ...]
	"""Distinct N included in the fit"""


def extrapolate_thermodynamic(points: Iterable[tuple[int, float]], orders: Collection[int] = (1,)) -> Extrapolation:
	"""Ordinary least squares in 1/N, needing at least one more distinct size than there are parameters

	Raises:
		ParameterError: if orders is not a nonempty subset of {1, 2}
		FitError: if there are too few sizes or the design matrix is rank deficient"""
	orders = tuple(sorted(set(orders)))
	if not orders or not set(orders) <= {1, 2}:
		raise ParameterError(f'orders must be a nonempty subset of {{1, 2}}, got {orders}')
	points = sorted(points)
	sizes = tuple(sorted({n for n, _ in points}))
	n_params = len(orders) + 1
	if len(sizes) < n_params + 1:
		raise FitError(
			f'Fit with orders {orders} needs at least {n_params + 1} distinct sizes', {'sizes': sizes}
		)
	inverse_n = np.array([1 / n for n, _ in points])
	values = np.array([kappa for _, kappa in points])
	design = np.column_stack([np.ones_like(inverse_n)] + [inverse_n**k for k in orders])
	solution, _, rank, _ = np.linalg.lstsq(design, values, rcond=None)
	if rank < n_params:
		raise FitError('Rank deficient design matrix', {'rank': int(rank), 'parameters': n_params})
	residual = float(np.linalg.norm(design @ solution - values))
	return Extrapolation(
		kappa_inf=float(solution[0]),
		coefficients=tuple(float(c) for c in solution[1:]),
		orders=orders,
		residual=residual,
		sizes=sizes,
	)


class ExtrapolationPoint(BaseModel):
	model_config = {'extra': 'forbid', 'frozen': True}

	mt: float
	first_order: Extrapolation | None
	"""1/N fit, None with fewer than 3 sizes"""
	second_order: Extrapolation | None
	"""1/N + 1/N² fit, None with fewer than 4 sizes"""
	unstable: bool | None
	"""Adding the 1/N² term moved κ∞ by more than instability_threshold, None if either fit is missing"""

	@property
	def kappa_inf(self) -> float | None:
		best = self.second_order or self.first_order
		return None if best is None else best.kappa_inf


def _try_fit(points: list[tuple[int, float]], orders: tuple[int, ...]) -> Extrapolation | None:
	if len({n for n, _ in points}) < len(orders) + 2:
		return None
	return extrapolate_thermodynamic(points, orders)


def extrapolate_curves(curves: Mapping[int, TimeSeries]) -> list[ExtrapolationPoint]:
	"""Fits at every time point of a set of κ_N(t) curves on a common grid"""
	sizes = sorted(curves)
	grid = curves[sizes[0]].times
	extrapolations = []
	for i, mt in enumerate(grid):
		points = [(n, float(curves[n].values[i])) for n in sizes]
		first = _try_fit(points, (1,))
		second = _try_fit(points, (1, 2))
		unstable = None
		if first is not None and second is not None:
			unstable = abs(first.kappa_inf - second.kappa_inf) > instability_threshold * abs(second.kappa_inf)
		extrapolations.append(ExtrapolationPoint(mt=float(mt), first_order=first, second_order=second, unstable=unstable))
	return extrapolations


_extrapolation_list = TypeAdapter(list[ExtrapolationPoint])


class SweepResult:
	"""κ_N(t) for every spacing and size, with the N → ∞ extrapolations done separately at each spacing"""

	def __init__(
		self,
		curves: Mapping[LatticeSpacing, Mapping[int, TimeSeries]],
		extrapolations: Mapping[LatticeSpacing, Sequence[ExtrapolationPoint]],
	) -> None:
		self.curves = curves
		self.extrapolations = extrapolations

	def __repr__(self) -> str:
		return f'{self.__class__.__qualname__}({len(self.curves)} spacings)'

	def kappa_inf(self, spacing: LatticeSpacing) -> TimeSeries:
		"""Extrapolated κ∞(t), or the raw curve when there is only one size"""
		curves = self.curves[spacing]
		if len(curves) == 1:
			return next(iter(curves.values()))
		points = [p for p in self.extrapolations[spacing] if p.kappa_inf is not None]
		return TimeSeries(
			[p.mt for p in points],
			[p.kappa_inf for p in points],
			name='kappa_inf',
			unit='mt',
			metadata={'spacing': spacing.model_dump()},
		)

	def curve_spread(self, spacing: LatticeSpacing, mt: float) -> float:
		"""Largest difference between κ_N(mt) of different sizes"""
		values = [curve.value_at(mt) for curve in self.curves[spacing].values()]
		return max(values) - min(values)

	def unstable_count(self, spacing: LatticeSpacing, mt_from: float = 0.0) -> int:
		return sum(1 for p in self.extrapolations[spacing] if p.mt >= mt_from and p.unstable)

	def write(self, directory: Path) -> list[Path]:
		"""One CSV per (spacing, N) curve, plus the extrapolated curve and a JSON of every fit, under a directory per spacing"""
		written = []
		for spacing, curves in self.curves.items():
			subdir = directory / spacing.label
			for n_sites, curve in sorted(curves.items()):
				path = subdir / f'kappa_N{n_sites}.csv'
				curve.to_csv(path)
				written.append(path)
			kappa_inf = self.kappa_inf(spacing)
			if len(kappa_inf):
				path = subdir / 'kappa_inf.csv'
				kappa_inf.to_csv(path)
				written.append(path)
			path = subdir / 'extrapolation.json'
			path.parent.mkdir(parents=True, exist_ok=True)
			path.write_bytes(_extrapolation_list.dump_json(list(self.extrapolations[spacing]), indent=2))
			written.append(path)
		return written


InitialState = Literal['ground', 'adiabatic']


def _prepare_initial(spacing: LatticeSpacing, n_sites: int, initial: InitialState, ramp: RampSchedule | None) -> StateVector:
	params = spacing.to_params(n_sites).updated_copy(j=0.0)
	if initial == 'adiabatic':
		ramp = ramp or RampSchedule(total_time=50 / params.w)
		return adiabatic_prepare(params, ramp).state
	return ground_state(build_hamiltonian(params), magnetization=0).state


def _sweep_job(job: tuple[LatticeSpacing, int], mt_grid: Sequence[float], initial: InitialState, ramp: RampSchedule | None) -> TimeSeries:
	spacing, n_sites = job
	logger.debug('Sweep job a=%g N=%d', spacing.a, n_sites)
	return quench_run(_prepare_initial(spacing, n_sites, initial, ramp), spacing, mt_grid)


def continuum_sweep(
	spacings: Sequence[LatticeSpacing],
	sizes: Sequence[int],
	mt_grid: Sequence[float],
	*,
	initial: InitialState = 'ground',
	ramp: RampSchedule | None = None,
	threads: int | None = None,
) -> SweepResult:
	"""Quench runs for every (spacing, N), run in parallel, then N → ∞ at each spacing before anything is compared across spacings
	Each spacing carries its own g, so a sweep at fixed g/m is built with spacing_for_ratio"""
	if not spacings or not sizes:
		raise ParameterError('Sweep needs at least one spacing and one size')
	sizes = sorted(set(sizes))
	if len(sizes) == 1:
		logger.warning('Only one system size (N=%d), κ curves are passed through without extrapolation', sizes[0])
	elif len(sizes) < 3:
		logger.warning('Sizes %s are too few for a 1/N fit, no extrapolation is done', sizes)
	jobs = [(spacing, n_sites) for spacing in spacings for n_sites in sizes]
	with ThreadPoolExecutor(max_workers=threads or _settings.threads) as pool:
		results = list(pool.map(lambda job: _sweep_job(job, mt_grid, initial, ramp), jobs))

	curves: dict[LatticeSpacing, dict[int, TimeSeries]] = {}
	for (spacing, n_sites), curve in zip(jobs, results, strict=True):
		curves.setdefault(spacing, {})[n_sites] = curve
	extrapolations = {spacing: extrapolate_curves(by_size) for spacing, by_size in curves.items()}
	for spacing, points in extrapolations.items():
		flagged = sum(1 for p in points if p.unstable)
		if flagged:
			logger.warning('%d of %d time points at a=%g have unstable N → ∞ fits', flagged, len(points), spacing.a)
	return SweepResult(curves, extrapolations)
