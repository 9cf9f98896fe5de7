"""Pydantic models for run configuration files (JSONC), which are validated strictly so typos don't silently fall back to defaults"""

import math
from pathlib import Path
from typing import Literal

from pydantic import BaseModel, Field, field_validator, model_validator

from schwingersim.continuum import InitialState, RampShape
from schwingersim.model import ModelParams
from schwingersim.noise import NoiseParams
from schwingersim.observables import OBSERVABLES

ExperimentKind = Literal['evolve', 'trotter', 'noise', 'entropy', 'continuum', 'compare']

_required_sections: dict[str, tuple[str, ...]] = {
	'evolve': ('model',),
	'entropy': ('model',),
	'trotter': ('model', 'schedule'),
	'noise': ('model', 'schedule', 'noise'),
	'compare': ('model', 'schedule'),
	'continuum': ('continuum',),
}


class TimeGrid(BaseModel):
	"""Evenly spaced dimensionless times, wt for lattice runs and mt for continuum runs"""

	model_config = {'extra': 'forbid'}

	start: float = Field(default=0.0, ge=0)
	stop: float
	step: float = Field(gt=0)

	@model_validator(mode='after')
	def _increasing(self) -> 'TimeGrid':
		if self.stop < self.start:
			raise ValueError(f'stop ({self.stop}) is before start ({self.start})')
		return self

	def points(self) -> list[float]:
		"""start, start + step, ... up to stop, with stop included when the step divides the range"""
		count = math.floor((self.stop - self.start) / self.step + 1e-9) + 1
		return [self.start + i * self.step for i in range(count)]


class ScheduleConfig(BaseModel):
	model_config = {'extra': 'forbid'}

	cycle_times: list[float] = Field(min_length=1)
	"""Trotter cycle lengths T, in units of 1/w, each giving its own curve"""

	@field_validator('cycle_times')
	@classmethod
	def _positive(cls, cycle_times: list[float]) -> list[float]:
		if any(t <= 0 for t in cycle_times):
			raise ValueError(f'cycle times must be positive, got {cycle_times}')
		return cycle_times


class ContinuumConfig(BaseModel):
	model_config = {'extra': 'forbid'}

	g_over_m: float = Field(default=1.0, ge=0)
	m_over_w: list[float] = Field(default_factory=lambda: [1.0], min_length=1)
	"""One lattice spacing per m/w value"""
	sizes: list[int] = Field(min_length=1)
	mass: float = Field(default=1.0, gt=0)
	initial: InitialState = 'ground'
	ramp_time: float | None = Field(default=None, ge=0)
	"""Adiabatic ramp length in units of 1/m, so the same for every spacing; 50/w of each spacing if not given"""
	ramp_shape: RampShape = 'linear'

	@field_validator('sizes')
	@classmethod
	def _even_sizes(cls, sizes: list[int]) -> list[int]:
		odd = [n for n in sizes if n < 2 or n % 2]
		if odd:
			raise ValueError(f'sizes must be even and at least 2, got {odd}')
		return sizes


class RunConfig(BaseModel):
	"""Everything one run of the command line tool does, with every default made explicit when dumped into the run manifest"""

	model_config = {'extra': 'forbid'}

	kind: ExperimentKind
	model: ModelParams | None = None
	schedule: ScheduleConfig | None = None
	noise: NoiseParams | None = None
	"""The seed inside here is replaced by the top level seed"""
	time_grid: TimeGrid
	continuum: ContinuumConfig | None = None
	output_dir: Path | None = None
	"""Defaults to <output_root>/<kind>"""
	seed: int = Field(default=0, ge=0, lt=2**64)
	threads: int | None = Field(default=None, ge=1)
	observables: list[str] = Field(default_factory=lambda: ['nu', 'lambda', 'entropy'])
	hiding_shots: int = Field(default=100_000, ge=1)
	"""Shots for the hiding failure Monte Carlo, run when noise.hide_fail_p > 0"""

	@field_validator('observables')
	@classmethod
	def _known_observables(cls, observables: list[str]) -> list[str]:
		unknown = [name for name in observables if name not in OBSERVABLES]
		if unknown:
			raise ValueError(f'unknown observables {unknown}, expected some of {sorted(OBSERVABLES)}')
		return observables

	@model_validator(mode='after')
	def _sections_for_kind(self) -> 'RunConfig':
		missing = [section for section in _required_sections[self.kind] if getattr(self, section) is None]
		if missing:
			raise ValueError(f'{", ".join(missing)} required for {self.kind} runs')
		if self.noise is not None and self.noise.seed != self.seed:
			self.noise = self.noise.updated_copy(seed=self.seed)
		return self
