"""Physics checks on the system sizes the simulator is meant for"""

import numpy as np
import pytest

from schwingersim.continuum import continuum_sweep, extrapolate_thermodynamic, spacing_for_ratio
from schwingersim.engine import StateVector, evolve_exact, evolve_grid, expectation
from schwingersim.model import ModelParams, bare_vacuum, build_hamiltonian
from schwingersim.noise import NoiseParams, ensemble_average
from schwingersim.observables import TimeSeries, half_chain_entropy, particle_density, total_magnetization, vacuum_persistence
from schwingersim.trotter import TrotterSchedule, compile_cycle, minimal_j0, run_schedule

pytestmark = pytest.mark.slow


def _quench(params: ModelParams, grid: list[float]) -> list[StateVector]:
	psi0 = StateVector.from_basis_state(bare_vacuum(params.n_sites))
	return evolve_grid(build_hamiltonian(params), psi0, [wt / params.w for wt in grid])


def _series(grid: list[float], values: list[float], name: str) -> TimeSeries:
	return TimeSeries(grid, values, name=name)


def _grid(stop: float, step: float) -> list[float]:
	return [i * step for i in range(round(stop / step) + 1)]


def test_trotter_curves_converge():
	params = ModelParams(n_sites=10, w=1.0, j=1.0, mass=1.0, j0=13.0)
	psi0 = StateVector.from_basis_state(bare_vacuum(10))
	terms = build_hamiltonian(params)
	# every curve samples these, so the deviations are compared at the same times
	common = [0.75 * k for k in range(1, 7)]
	deviations = {}
	for cycle_time in (0.75, 0.375, 0.1875):
		trajectory = run_schedule(compile_cycle(params, TrotterSchedule.for_params(params, cycle_time, round(4.5 / cycle_time))), psi0)
		exact = evolve_grid(terms, psi0, trajectory.times)
		deviations[cycle_time] = max(
			abs(particle_density(trotter) - particle_density(ideal))
			for t, trotter, ideal in zip(trajectory.times, trajectory.states, exact, strict=True)
			if any(abs(t - c) < 1e-9 for c in common)
		)
	assert deviations[0.1875] < deviations[0.375] < deviations[0.75], deviations
	assert deviations[0.1875] <= 0.1, deviations


@pytest.fixture(scope='module')
def density_by_mass():
	grid = _grid(10.0, 0.05)
	return {
		mass: _series(grid, [particle_density(psi) for psi in _quench(ModelParams(n_sites=12, w=1.0, j=1.0, mass=mass), grid)], 'nu')
		for mass in (0.0, 0.5, 1.0)
	}


def test_pair_creation_oscillates(density_by_mass: dict[float, TimeSeries]):
	for mass, nu in density_by_mass.items():
		assert nu.value_at(0.5) > 0, f'm = {mass}: pairs are created straight away'
		maxima = nu.local_maxima()
		assert len(maxima) >= 2, f'm = {mass}: ν should oscillate'
		assert maxima[1][1] < maxima[0][1], f'm = {mass}: the second peak should be lower than the first'


def test_mass_suppresses_pair_creation(density_by_mass: dict[float, TimeSeries]):
	early = [density_by_mass[mass].value_at(1.0) for mass in (0.0, 0.5, 1.0)]
	assert early == sorted(early, reverse=True), early


@pytest.mark.parametrize('j', [0.0, 1.0])
def test_rate_function_tracks_density(j: float):
	grid = _grid(10.0, 0.05)
	params = ModelParams(n_sites=12, w=1.0, j=j, mass=1.0)
	states = _quench(params, grid)
	nu = _series(grid, [particle_density(psi) for psi in states], 'nu')
	rate = _series(grid, [vacuum_persistence(states[0], psi).rate for psi in states], 'lambda')
	nu_maxima = [t for t, _ in nu.local_maxima()]
	rate_maxima = [t for t, _ in rate.local_maxima()]
	period = nu_maxima[1] - nu_maxima[0]
	assert abs(nu_maxima[0] - rate_maxima[0]) < period / 4, f'J/w = {j}'


@pytest.fixture(scope='module')
def free_entropy():
	grid = _grid(12.0, 0.1)
	return {
		n_sites: _series(grid, [half_chain_entropy(psi) for psi in _quench(ModelParams(n_sites=n_sites, w=1.0, mass=0.5), grid)], 'entropy')
		for n_sites in (8, 10, 12)
	}


def test_entropy_grows_linearly(free_entropy: dict[int, TimeSeries]):
	for n_sites, entropy in free_entropy.items():
		window = (entropy.times >= 0.5) & (entropy.times <= n_sites / 4 + 1e-9)
		t, s = entropy.times[window], entropy.values[window]
		slope, intercept = np.polyfit(t, s, 1)
		r_squared = 1 - np.sum((s - (slope * t + intercept)) ** 2) / np.sum((s - s.mean()) ** 2)
		assert slope > 0
		assert r_squared >= 0.98, f'N = {n_sites}: R² = {r_squared}'


def test_entropy_saturates_higher_for_longer_chains(free_entropy: dict[int, TimeSeries]):
	saturation = [free_entropy[n].values.max() for n in (8, 10, 12)]
	assert saturation == sorted(saturation), saturation


@pytest.mark.parametrize('mass', [0.5, 1.0])
def test_electric_field_slows_entanglement(mass: float):
	grid = [0.0, 6.0]
	free = _quench(ModelParams(n_sites=12, w=1.0, mass=mass), grid)
	coupled = _quench(ModelParams(n_sites=12, w=1.0, j=0.2, mass=mass), grid)
	assert half_chain_entropy(coupled[-1]) < half_chain_entropy(free[-1])


def test_mass_suppresses_entanglement():
	grid = [0.0, 1.0, 2.0]
	entropies = [half_chain_entropy(_quench(ModelParams(n_sites=10, w=1.0, mass=m), grid)[-1]) for m in (0.5, 1.0, 2.0)]
	assert entropies == sorted(entropies, reverse=True), entropies


def test_noise_damps_but_keeps_the_curve():
	params = ModelParams(n_sites=10, w=1.0, j=1.0, mass=1.0, j0=13.0)
	compiled = compile_cycle(params, TrotterSchedule.for_params(params, 1.3, n_cycles=8))
	psi0 = StateVector.from_basis_state(bare_vacuum(10))
	ideal = TimeSeries(
		[1.3 * k for k in range(9)], [particle_density(psi) for psi in run_schedule(compiled, psi0).states], name='nu'
	)
	noise = NoiseParams(delta_j_rel=0.05, delta_w_rel=0.025, n_traj=200, seed=1234)
	noisy = ensemble_average(compiled, noise, psi0, ['nu'], threads=4)['nu']
	flat_hidden = ensemble_average(compiled, noise.updated_copy(hidden_factor=1.0), psi0, ['nu'], threads=4)['nu']

	early = ideal.times <= 5.2 + 1e-9
	assert np.abs(noisy.values - flat_hidden.values)[early].max() < 0.02, 'Extra dephasing of hidden ions hardly matters'
	assert np.abs(noisy.values - ideal.values)[early].max() < 0.1

	late = ideal.times >= 3.0
	assert noisy.values[late].std() < ideal.values[late].std(), 'Averaging over noise damps the oscillations'

	ideal_peaks, noisy_peaks = ideal.local_maxima(), noisy.local_maxima()
	assert ideal_peaks and noisy_peaks
	# samples are a cycle apart, wider than a quarter period, so an unshifted peak lands on the same sample
	assert noisy_peaks[0][0] == pytest.approx(ideal_peaks[0][0]), 'Noise keeps the frequency'


def test_continuum_needs_bigger_chains_at_smaller_spacing():
	mt_grid = _grid(5.0, 0.5)
	coarse, fine = spacing_for_ratio(1.0, 1.0, 1.0), spacing_for_ratio(1.0, 0.5, 1.0)
	result = continuum_sweep([coarse, fine], [6, 8, 10, 12], mt_grid, threads=4)

	def spread(spacing, mt: float) -> float:
		values = [result.curves[spacing][n].value_at(mt) for n in (8, 10, 12)]
		return max(values) - min(values)

	assert spread(fine, 3.0) > spread(coarse, 3.0)
	assert result.unstable_count(fine, 3.0) >= result.unstable_count(coarse, 3.0)
	for spacing in (coarse, fine):
		for i, mt in enumerate(mt_grid):
			points = [(n, float(curve.values[i])) for n, curve in result.curves[spacing].items()]
			first = extrapolate_thermodynamic(points, (1,))
			second = extrapolate_thermodynamic(points, (1, 2))
			assert second.residual <= first.residual + 1e-12, f'a = {spacing.a}, mt = {mt}'


def test_conservation_on_random_configurations(rng: np.random.Generator):
	for _ in range(20):
		n_sites = int(rng.choice([4, 6, 8, 10]))
		params = ModelParams(n_sites=n_sites, w=float(rng.uniform(0.2, 2)), j=float(rng.uniform(0, 2)), mass=float(rng.uniform(0, 2)))
		terms = build_hamiltonian(params)
		psi = StateVector.random(n_sites, rng, magnetization=0)
		evolved = evolve_exact(terms, psi, float(rng.uniform(0.5, 5)))
		energy = expectation(terms, psi)
		assert np.linalg.norm(evolved.amplitudes) == pytest.approx(1.0, abs=1e-12)
		assert expectation(terms, evolved) == pytest.approx(energy, abs=1e-8 * max(1.0, abs(energy)))
		assert total_magnetization(evolved) == pytest.approx(0.0, abs=1e-10)


def test_trotter_schedules_fit_at_minimal_j0():
	for n_sites in (4, 6, 8, 10):
		params = ModelParams(n_sites=n_sites, w=1.0, j=1.0, mass=1.0)
		params = params.updated_copy(j0=minimal_j0(params))
		schedule = TrotterSchedule.for_params(params, 1.0)
		assert schedule.busy_time(n_sites) == pytest.approx(1.0)
