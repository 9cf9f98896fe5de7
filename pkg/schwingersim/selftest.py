"""Quick oracle checks of the whole stack against dense linear algebra, run with python -m schwingersim selftest"""

import logging
from collections.abc import Callable

import numpy as np
import scipy.linalg

from .engine import StateVector, dense_hamiltonian, evolve_exact, ground_state, sequence_unitary
from .model import BasisState, ModelParams, build_hamiltonian, gauss_field_profile, gauss_field_profile_from_right
from .observables import extended_state_entropy, half_chain_entropy, particle_density
from .trotter import TrotterSchedule, compile_section1, compile_section2, minimal_j0

logger = logging.getLogger(__name__)


def _section_one_error() -> float:
	params = ModelParams(n_sites=4, w=1.0, j=1.0, mass=1.0)
	params = params.updated_copy(j0=minimal_j0(params))
	schedule = TrotterSchedule.for_params(params, 1.0)
	unitary = sequence_unitary(compile_section1(params, schedule), params.n_sites)
	target = scipy.linalg.expm(-1j * schedule.cycle_time * dense_hamiltonian(build_hamiltonian(params).part(zz=True)))
	return float(np.linalg.norm(unitary - target, 2))


def _pair_window_error() -> float:
	params = ModelParams(n_sites=2, w=1.0, j0=1.0)
	schedule = TrotterSchedule.for_params(params, 0.4)
	unitary = sequence_unitary(compile_section2(params, schedule, warn=False), 2)
	target = scipy.linalg.expm(-0.4j * dense_hamiltonian(build_hamiltonian(params).part(pm=True)))
	return float(np.linalg.norm(unitary - target, 2))


def _evolution_error() -> float:
	terms = build_hamiltonian(ModelParams(n_sites=4, w=1.0, j=1.0, mass=1.0))
	psi = StateVector.random(4, np.random.default_rng(0))
	expected = scipy.linalg.expm(-1j * dense_hamiltonian(terms)) @ psi.amplitudes
	return float(np.linalg.norm(evolve_exact(terms, psi, 1.0).amplitudes - expected))


def _two_site_ground_error() -> float:
	ground = ground_state(build_hamiltonian(ModelParams(n_sites=2, w=1.0)))
	singlet = np.array([0, 1, -1, 0]) / np.sqrt(2)
	return abs(ground.energy + 1) + float(np.linalg.norm(ground.state.amplitudes - singlet))


def _entropy_equivalence_error() -> float:
	psi = StateVector.random(6, np.random.default_rng(1), magnetization=0)
	spin_entropy = half_chain_entropy(psi, 3)
	return max(abs(extended_state_entropy(psi, 3, boundary_link_side=side) - spin_entropy) for side in ('left', 'right'))


def _gauss_direction_error() -> float:
	mismatches = 0
	for index in range(1 << 6):
		state = BasisState.from_index(6, index)
		if state.magnetization == 0 and gauss_field_profile(state) != gauss_field_profile_from_right(state):
			mismatches += 1
	return float(mismatches)


def _vacuum_density() -> float:
	return particle_density(StateVector.from_basis_state(BasisState(spins=(1, -1, 1, -1, 1, -1))))


checks: dict[str, tuple[Callable[[], float], float]] = {
	'section I equals exp(-i H_ZZ T)': (_section_one_error, 1e-10),
	'section II pair window equals exp(-i H_± dt)': (_pair_window_error, 1e-12),
	'Krylov evolution matches dense expm': (_evolution_error, 1e-8),
	'two-site ground state is the singlet': (_two_site_ground_error, 1e-9),
	'extended-space entropy equals spin entropy': (_entropy_equivalence_error, 1e-10),
	'Gauss law agrees from both ends at zero charge': (_gauss_direction_error, 0.0),
	'bare vacuum has no particles': (_vacuum_density, 1e-15),
}


def run_selftest() -> bool:
	"""Runs every check, logging each, True if all of them passed"""
	failures = 0
	for name, (check, tolerance) in checks.items():
		error = check()
		if error <= tolerance:
			logger.info('PASS %s (error %.3g)', name, error)
		else:
			failures += 1
			logger.error('FAIL %s (error %.3g > %.3g)', name, error, tolerance)
	logger.info('%d of %d checks passed', len(checks) - failures, len(checks))
	return failures == 0
