import logging

import numpy as np
import pytest
from pydantic import ValidationError

from schwingersim.continuum import (
	LatticeSpacing,
	RampSchedule,
	SweepResult,
	adiabatic_prepare,
	continuum_sweep,
	couplings_from_spacing,
	extrapolate_curves,
	extrapolate_thermodynamic,
	quench_run,
	spacing_for_ratio,
)
from schwingersim.engine import StateVector, dense_hamiltonian, expectation, ground_state
from schwingersim.exceptions import FitError, ParameterError
from schwingersim.model import ModelParams, bare_vacuum, build_hamiltonian
from schwingersim.observables import TimeSeries


@pytest.fixture
def unit_ratio_params():
	return ModelParams(n_sites=8, w=1.0, mass=1.0)


def test_couplings_from_spacing():
	assert couplings_from_spacing(LatticeSpacing(a=0.5, g=1.0)) == (1.0, 0.25, 0.0)
	half = couplings_from_spacing(LatticeSpacing(a=0.25, g=1.0))
	assert half.w == 2.0, 'Halving a doubles w'
	assert half.j == 0.125, 'Halving a halves J'


@pytest.mark.parametrize('mass, m_over_w, g_over_m', [(1.0, 1.0, 1.0), (2.0, 1.0, 1.0), (1.0, 0.5, 2.0), (0.3, 0.7, 0.4)])
def test_spacing_for_ratio(mass: float, m_over_w: float, g_over_m: float):
	spacing = spacing_for_ratio(mass, m_over_w, g_over_m)
	w, j, m = couplings_from_spacing(spacing)
	assert m / w == pytest.approx(m_over_w)
	assert m / w == pytest.approx(2 * spacing.a * m)
	assert j / w == pytest.approx((spacing.g * spacing.a) ** 2)
	assert spacing.g / m == pytest.approx(g_over_m)


def test_spacing_for_unit_ratios():
	assert spacing_for_ratio(2.0, 1.0, 1.0).a == 0.25
	with pytest.raises(ParameterError):
		spacing_for_ratio(0.0, 1.0, 1.0)


def test_bad_spacing():
	with pytest.raises(ValidationError):
		LatticeSpacing(a=0.0)
	with pytest.raises(ParameterError):
		couplings_from_spacing(LatticeSpacing.model_construct(a=0.0, g=1.0, mass=1.0))


@pytest.mark.parametrize('shape', ['linear', 'sine', 'smoothstep'])
def test_ramp_shapes(shape: str):
	ramp = RampSchedule(total_time=10.0, shape=shape)
	assert ramp.f(0.0) == 0.0
	assert ramp.f(10.0) == pytest.approx(1.0)
	values = [ramp.f(t) for t in np.linspace(0, 10, 41)]
	assert values == sorted(values)


def test_ramp_steps():
	ramp = RampSchedule(total_time=5.0)
	steps = ramp.midpoints(2.0)
	assert len(steps) == 100
	assert sum(dt for dt, _ in steps) == pytest.approx(5.0)
	assert steps[0][1] == pytest.approx(0.005)
	assert len(RampSchedule(total_time=5.0, n_steps=7).midpoints(2.0)) == 7
	assert RampSchedule(total_time=0.0).midpoints(1.0) == []


def test_instant_ramp_keeps_the_state():
	params = ModelParams(n_sites=4, w=1.0, mass=1.0)
	prepared = adiabatic_prepare(params, RampSchedule(total_time=0.0))
	assert np.array_equal(prepared.state.amplitudes, StateVector.from_basis_state(bare_vacuum(4)).amplitudes)


def test_adiabatic_preparation(unit_ratio_params: ModelParams):
	prepared = adiabatic_prepare(unit_ratio_params, RampSchedule(total_time=50.0, n_steps=500))
	assert prepared.fidelity >= 0.99
	assert prepared.state.sector_weights().get(0, 0.0) >= 1 - 1e-10


def test_prepared_energy_approaches_the_ground_energy():
	params = ModelParams(n_sites=4, w=1.0, mass=1.0)
	terms = build_hamiltonian(params)
	ground = ground_state(terms, magnetization=0)

	settled = adiabatic_prepare(params, RampSchedule(total_time=0.0), psi0=ground.state)
	assert settled.fidelity == pytest.approx(1.0, abs=1e-10)
	assert expectation(terms, settled.state) == pytest.approx(ground.energy, abs=1e-8)

	prepared = adiabatic_prepare(params, RampSchedule(total_time=50.0, n_steps=500))
	top = float(np.linalg.eigvalsh(dense_hamiltonian(terms)).max())
	excess = expectation(terms, prepared.state) - ground.energy
	assert -1e-9 <= excess <= (1 - prepared.fidelity) * (top - ground.energy) + 1e-9, 'Energy above the ground state is bounded by the missing fidelity'


def test_slower_ramps_do_better(unit_ratio_params: ModelParams):
	infidelities = [
		1 - adiabatic_prepare(unit_ratio_params, RampSchedule(total_time=t, n_steps=10 * round(t))).fidelity
		for t in (25.0, 50.0)
	]
	assert infidelities[1] <= infidelities[0] + 2e-3


def test_digital_preparation():
	params = ModelParams(n_sites=4, w=1.0, mass=1.0, j0=3.0)
	ramp = RampSchedule(total_time=20.0, n_steps=400)
	digital = adiabatic_prepare(params, ramp, digital=True)
	exact = adiabatic_prepare(params, ramp)
	assert digital.fidelity >= 0.95
	assert digital.state.fidelity(exact.state) >= 0.95


def test_quench_without_coupling_does_nothing():
	spacing = spacing_for_ratio(1.0, 1.0, 0.0)
	prepared = adiabatic_prepare(spacing.to_params(4), RampSchedule(total_time=0.0))
	series = quench_run(prepared.state, spacing, [0.0, 1.0, 2.0])
	assert series.values[0] == 0.0
	assert series.unit == 'mt'

	ground = ground_state(build_hamiltonian(spacing.to_params(4)), magnetization=0).state
	assert np.abs(quench_run(ground, spacing, [0.0, 1.0, 2.0]).values).max() <= 1e-8


def test_quench_needs_mass():
	with pytest.raises(ParameterError):
		quench_run(StateVector.from_basis_state(bare_vacuum(4)), LatticeSpacing(a=0.5, g=1.0), [0.0, 1.0])


def test_exact_extrapolation():
	points = [(n, 0.3 + 1.7 / n) for n in (4, 6, 8, 10)]
	fit = extrapolate_thermodynamic(points)
	assert fit.kappa_inf == pytest.approx(0.3, abs=1e-12)
	assert fit.coefficients == pytest.approx((1.7,))
	assert fit.residual <= 1e-12
	assert fit == extrapolate_thermodynamic(reversed(points)), 'Order of points does not matter'


def test_second_order_fits_better():
	points = [(n, 0.3 + 1.7 / n + 5 / n**2) for n in (4, 6, 8, 10)]
	first = extrapolate_thermodynamic(points, (1,))
	second = extrapolate_thermodynamic(points, (1, 2))
	assert second.residual < first.residual
	assert second.kappa_inf == pytest.approx(0.3, abs=1e-10)


def test_constant_data():
	fit = extrapolate_thermodynamic([(n, 0.42) for n in (6, 8, 10)])
	assert fit.kappa_inf == pytest.approx(0.42, abs=1e-12)
	assert fit.coefficients[0] == pytest.approx(0.0, abs=1e-10)


def test_underdetermined_fits():
	with pytest.raises(FitError):
		extrapolate_thermodynamic([(6, 0.1), (8, 0.2)])
	with pytest.raises(FitError):
		extrapolate_thermodynamic([(6, 0.1), (6, 0.2), (8, 0.3)])
	with pytest.raises(FitError):
		extrapolate_thermodynamic([(n, 0.1) for n in (6, 8, 10)], (1, 2))
	with pytest.raises(ParameterError):
		extrapolate_thermodynamic([(n, 0.1) for n in (6, 8, 10, 12)], (3,))


def test_extrapolated_curves():
	grid = [0.0, 0.5, 1.0]
	curves = {n: TimeSeries(grid, [0.0, 0.1 + 1 / n, 0.2 + 2 / n], name='kappa', unit='mt') for n in (6, 8, 10, 12)}
	points = extrapolate_curves(curves)
	assert [p.mt for p in points] == grid
	assert points[0].kappa_inf == pytest.approx(0.0, abs=1e-12)
	assert points[0].unstable is False
	assert points[2].kappa_inf == pytest.approx(0.2, abs=1e-10)
	assert points[1].first_order.kappa_inf == pytest.approx(0.1, abs=1e-10)


def test_single_size_passes_through(tmp_path, caplog: pytest.LogCaptureFixture):
	spacing = spacing_for_ratio(1.0, 1.0, 1.0)
	with caplog.at_level(logging.WARNING, logger='schwingersim.continuum'):
		result = continuum_sweep([spacing], [4], [0.0, 0.5, 1.0])
	assert 'without extrapolation' in caplog.text
	curve = result.curves[spacing][4]
	assert result.kappa_inf(spacing) is curve
	assert result.curve_spread(spacing, 0.5) == 0.0

	written = result.write(tmp_path)
	assert {path.relative_to(tmp_path).as_posix() for path in written} == {
		'a_0.5/kappa_N4.csv',
		'a_0.5/kappa_inf.csv',
		'a_0.5/extrapolation.json',
	}


def test_sweep_extrapolates_each_spacing():
	spacings = [spacing_for_ratio(1.0, ratio, 1.0) for ratio in (1.0, 0.5)]
	result = continuum_sweep(spacings, [4, 6, 8], [0.0, 0.5], threads=2)
	for spacing in spacings:
		assert sorted(result.curves[spacing]) == [4, 6, 8]
		kappa_inf = result.kappa_inf(spacing)
		assert kappa_inf.values[0] == pytest.approx(0.0, abs=1e-9)
		assert result.curve_spread(spacing, 0.5) >= 0


def test_unstable_fits_are_counted():
	grid = [1.0, 2.0, 3.0, 4.0]
	sizes = (6, 8, 10, 12)
	coarse, fine = LatticeSpacing(a=0.5, g=1.0), LatticeSpacing(a=0.25, g=1.0)
	curves = {
		coarse: {n: TimeSeries(grid, [0.1 * t + 1 / n for t in grid], name='kappa', unit='mt') for n in sizes},
		fine: {
			n: TimeSeries(grid, [0.1 * t + 1 / n + (5 / n**2 if t >= 3 else 0.0) for t in grid], name='kappa', unit='mt')
			for n in sizes
		},
	}
	result = SweepResult(curves, {spacing: extrapolate_curves(by_size) for spacing, by_size in curves.items()})
	assert result.unstable_count(coarse) == 0, 'Pure 1/N data needs no 1/N² term'
	assert result.unstable_count(fine, 3.0) == 2, 'A 1/N² term from mt = 3 on moves κ∞ once it is fitted'
	assert result.unstable_count(fine, 4.0) == 1
	assert result.unstable_count(fine) == result.unstable_count(fine, 3.0)
	assert [p.unstable for p in result.extrapolations[fine]] == [False, False, True, True]
