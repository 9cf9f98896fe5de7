"""Experimental imperfections: quasi-static fluctuations of the MS coupling and collective dephasing applied to gate sequences, averaged over trajectory ensembles, and hiding pulse failures counted at the level of individual shots"""

import logging
import math
from collections.abc import Iterable, Sequence
from concurrent.futures import ThreadPoolExecutor
from functools import partial
from typing import NamedTuple

import numpy as np
from pydantic import BaseModel, Field

from .engine import StateVector
from .exceptions import ParameterError, ProtocolError
from .gates import GateKind, GateOp, GateSequence
from .model import BasisState
from .observables import TimeSeries, get_observable
from .settings import SchwingerSimSettings
from .trotter import CompiledSchedule, run_schedule

logger = logging.getLogger(__name__)
_settings = SchwingerSimSettings()

_shot_chunk = 10_000


class NoiseParams(BaseModel):
	"""Imperfections of the trapped-ion simulator, widths relative to J₀"""

	model_config = {'extra': 'forbid', 'frozen': True}

	delta_j_rel: float = Field(default=0.0, ge=0)
	"""Half-width of the uniform distribution of δJ, as a fraction of J₀"""
	delta_w_rel: float = Field(default=0.0, ge=0)
	"""Half-width of the uniform distribution of the collective dephasing δω, as a fraction of J₀"""
	hidden_factor: float = Field(default=1.5, ge=0)
	"""δω′/δω, how much more strongly ions in the hiding levels dephase"""
	hide_fail_p: float = Field(default=0.0, ge=0, lt=1)
	"""Probability that a single hide or unhide pulse fails"""
	n_traj: int = Field(default=200, ge=1)
	seed: int = Field(default=0, ge=0, lt=2**64)

	def updated_copy(self, **changes: object) -> 'NoiseParams':
		return type(self).model_validate(self.model_dump() | changes)

	@property
	def is_ideal(self) -> bool:
		return self.delta_j_rel == 0 and self.delta_w_rel == 0


class NoiseSample(NamedTuple):
	"""One trajectory's worth of quasi-static noise, constant over the whole run"""
	dj: float
	dw: float


def trajectory_rng(seed: int, index: int) -> np.random.Generator:
	"""Independent stream for trajectory index, the same whichever order trajectories are run in"""
	return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


def sample_noise(noise: NoiseParams, index: int, j0: float) -> NoiseSample:
	"""δJ then δω, each uniform on ±width·J₀"""
	rng = trajectory_rng(noise.seed, index)
	dj = rng.uniform(-1.0, 1.0) * noise.delta_j_rel * j0
	dw = rng.uniform(-1.0, 1.0) * noise.delta_w_rel * j0
	return NoiseSample(float(dj), float(dw))


def perturb_sequence(
	gates: GateSequence, sample: NoiseSample, noise: NoiseParams, j0: float, n_sites: int
) -> list[GateOp]:
	"""MS angles scaled by (J₀ + δJ)/J₀, and after every timed gate of length Δ a dephasing by δω·Δ on active ions and δω′·Δ on hidden ones"""
	if sample.dj == 0 and sample.dw == 0:
		return list(gates)
	scale = (j0 + sample.dj) / j0
	everything = range(1, n_sites + 1)
	hidden: set[int] = set()
	perturbed = []
	for gate in gates:
		if gate.kind == GateKind.HIDE:
			hidden.update(gate.sites)
		elif gate.kind == GateKind.UNHIDE:
			hidden.difference_update(gate.sites)
		if gate.is_entangling and sample.dj:
			gate = gate.updated_copy(angles=(gate.angle * scale,))
		perturbed.append(gate)
		if gate.duration and sample.dw:
			active_angle = sample.dw * gate.duration
			perturbed.append(
				GateOp.dephase(
					everything,
					(active_angle * noise.hidden_factor if site in hidden else active_angle for site in everything),
				)
			)
	return perturbed


def _trajectory_values(
	compiled: CompiledSchedule, noise: NoiseParams, psi0: StateVector, names: Sequence[str], index: int
) -> np.ndarray:
	sample = sample_noise(noise, index, compiled.params.j0)
	gates = perturb_sequence(compiled.gates, sample, noise, compiled.params.j0, compiled.params.n_sites)
	trajectory = run_schedule(compiled.with_gates(gates), psi0)
	logger.debug('Trajectory %d done with δJ=%g δω=%g', index, sample.dj, sample.dw)
	return np.array([[get_observable(name)(state, psi0) for state in trajectory.states] for name in names])


def ensemble_average(
	compiled: CompiledSchedule,
	noise: NoiseParams,
	psi0: StateVector,
	names: Iterable[str],
	*,
	threads: int | None = None,
) -> dict[str, TimeSeries]:
	"""Mean and standard error of each observable over noise.n_traj perturbed runs, at every cycle boundary, times in units of 1/w
	Results are collected in trajectory order before averaging, so they do not depend on the number of threads"""
	names = list(names)
	threads = threads or _settings.threads
	run = partial(_trajectory_values, compiled, noise, psi0, names)
	with ThreadPoolExecutor(max_workers=threads) as pool:
		values = np.stack(list(pool.map(run, range(noise.n_traj))))
	mean = values.mean(axis=0)
	if noise.n_traj > 1:
		stderr = values.std(axis=0, ddof=1) / math.sqrt(noise.n_traj)
	else:
		stderr = np.zeros_like(mean)
	times = [t * compiled.params.w for t in compiled.times]
	metadata = {'params': compiled.params.model_dump(), 'noise': noise.model_dump()}
	return {
		name: TimeSeries(
			times, mean[i], name=name, unit='wt', stderr=stderr[i], n_traj=noise.n_traj, metadata=metadata
		)
		for i, name in enumerate(names)
	}


class HidingStats(NamedTuple):
	detected_rate: float
	"""Shots where some ion was left in (or wrongly put into) a hiding level, which a population measurement would catch"""
	undetected_rate: float
	"""Shots where both the hide and unhide pulse failed on the same ion in the same step"""
	residual_rate: float
	"""Shots with an undetected failure that pass hiding-level postselection, ie. have no detected failure either"""
	survival_rate: float
	"""Shots with no failures at all"""
	n_shots: int
	n_steps: int
	"""Number of hide/unhide steps in the sequence"""

	def stderr(self, rate: float) -> float:
		"""Binomial standard error of one of the rates"""
		return math.sqrt(rate * (1 - rate) / self.n_shots)


def hiding_failure_monte_carlo(gates: GateSequence, p: float, seed: int, n_shots: int) -> HidingStats:
	"""Each hide and unhide pulse on each ion fails independently with probability p
	A single failure within a hide/unhide step leaves population where a measurement finds it, two failures on the same ion undo each other's effect on the hiding level and go unnoticed

	Raises:
		ParameterError: if p is not in [0, 1) or n_shots < 1
		ProtocolError: if the sequence does not hide and unhide the same number of ions"""
	if not 0 <= p < 1:
		raise ParameterError(f'Failure probability must be in [0, 1), got {p}')
	if n_shots < 1:
		raise ParameterError(f'n_shots must be at least 1, got {n_shots}')
	hidden_counts = [len(gate.sites) for gate in gates if gate.kind == GateKind.HIDE]
	unhidden = sum(len(gate.sites) for gate in gates if gate.kind == GateKind.UNHIDE)
	if sum(hidden_counts) != unhidden:
		raise ProtocolError(f'Sequence hides {sum(hidden_counts)} ions but unhides {unhidden}')
	ion_steps = sum(hidden_counts)

	rng = np.random.default_rng(np.random.SeedSequence(seed))
	detected = undetected = residual = survived = 0
	for start in range(0, n_shots, _shot_chunk):
		shots = min(_shot_chunk, n_shots - start)
		failures = rng.random((shots, ion_steps, 2)) < p
		single = (failures.sum(axis=2) == 1).any(axis=1)
		paired = failures.all(axis=2).any(axis=1)
		detected += int(single.sum())
		undetected += int(paired.sum())
		residual += int((paired & ~single).sum())
		survived += int((~failures.any(axis=(1, 2))).sum())
	return HidingStats(
		detected_rate=detected / n_shots,
		undetected_rate=undetected / n_shots,
		residual_rate=residual / n_shots,
		survival_rate=survived / n_shots,
		n_shots=n_shots,
		n_steps=len(hidden_counts),
	)


class Postselection(NamedTuple):
	kept: list[BasisState]
	acceptance: float


def postselect_magnetization(samples: Sequence[BasisState], target_m: int = 0) -> Postselection:
	"""Keeps measurement outcomes with total magnetization target_m, as charge conservation says every ideal outcome should have"""
	kept = [sample for sample in samples if sample.magnetization == target_m]
	return Postselection(kept, len(kept) / len(samples) if samples else 0.0)
