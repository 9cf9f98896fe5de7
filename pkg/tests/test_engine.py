import math
from functools import reduce

import numpy as np
import pytest
import scipy.linalg

from schwingersim import engine
from schwingersim.engine import (
	DensityBlock,
	StateVector,
	apply_gate,
	apply_hamiltonian,
	apply_sequence,
	dense_hamiltonian,
	evolve_exact,
	evolve_grid,
	expectation,
	ground_state,
	reduced_density,
	sample_basis_states,
	sequence_unitary,
)
from schwingersim.exceptions import InvariantViolation, ParameterError, ProtocolError
from schwingersim.gates import GateOp
from schwingersim.model import BasisState, HamiltonianTerms, ModelParams, PMTerm, ZField, bare_vacuum, build_hamiltonian
from schwingersim.observables import total_magnetization

_pauli_x = np.array([[0, 1], [1, 0]], dtype=complex)


def _embed(single: np.ndarray, site: int, n_sites: int) -> np.ndarray:
	factors = [single if n == site else np.eye(2) for n in range(1, n_sites + 1)]
	return reduce(np.kron, factors)


@pytest.fixture
def unit_terms():
	return build_hamiltonian(ModelParams(n_sites=6, w=1.0, j=1.0, mass=1.0))


def test_single_z_field():
	terms = HamiltonianTerms(n_sites=1, z_fields=(ZField(1, 1.0),))
	assert np.allclose(apply_hamiltonian(terms, StateVector.basis(1, 0)), [1, 0])


def test_flip_flop_moves_the_particle():
	terms = HamiltonianTerms(n_sites=2, pm_pairs=(PMTerm(1, 2, 1.0),))
	up_down = StateVector.from_basis_state(BasisState(spins=(1, -1)))
	assert np.allclose(apply_hamiltonian(terms, up_down), [0, 0, 1, 0])


def test_tensor_axes_follow_sites():
	psi = StateVector.from_basis_state(BasisState(spins=(1, -1, -1)))
	assert psi.amplitudes[0b011] == 1
	assert psi.tensor[0, 1, 1] == 1


def test_matches_dense(unit_terms: HamiltonianTerms, rng: np.random.Generator):
	psi = StateVector.random(6, rng)
	dense = dense_hamiltonian(unit_terms)
	assert np.allclose(dense, dense.T), 'Hamiltonian is real symmetric'
	assert np.allclose(apply_hamiltonian(unit_terms, psi), dense @ psi.amplitudes)
	assert expectation(unit_terms, psi) == pytest.approx(np.vdot(psi.amplitudes, dense @ psi.amplitudes).real)


def test_magnetization_sector_is_closed(unit_terms: HamiltonianTerms):
	psi = StateVector.from_basis_state(bare_vacuum(6))
	image = apply_hamiltonian(unit_terms, psi)
	magnetizations = engine.basis_magnetizations(6)
	assert not image[magnetizations != 0].any()


def test_unnormalised_state_rejected():
	with pytest.raises(InvariantViolation):
		StateVector([1, 1])
	assert StateVector([1, 1], normalize=True).amplitudes[0] == pytest.approx(1 / math.sqrt(2))
	with pytest.raises(ParameterError):
		StateVector([1, 0, 0], normalize=True)


def test_zero_time_is_identity(unit_terms: HamiltonianTerms, rng: np.random.Generator):
	psi = StateVector.random(6, rng)
	assert evolve_exact(unit_terms, psi, 0.0) is psi


def test_diagonal_evolution_is_a_phase():
	terms = HamiltonianTerms(n_sites=2, z_fields=(ZField(1, 0.5), ZField(2, -1.0)))
	psi = StateVector.from_basis_state(BasisState(spins=(1, -1)))
	evolved = evolve_exact(terms, psi, 2.0)
	# E = 0.5 + 1.0
	assert psi.overlap(evolved) == pytest.approx(np.exp(-1j * 1.5 * 2.0))


def test_evolution_matches_expm(rng: np.random.Generator):
	terms = build_hamiltonian(ModelParams(n_sites=4, w=1.0, j=1.0, mass=1.0))
	psi = StateVector.random(4, rng)
	expected = scipy.linalg.expm(-1j * dense_hamiltonian(terms)) @ psi.amplitudes
	assert np.linalg.norm(evolve_exact(terms, psi, 1.0, 1e-10).amplitudes - expected) <= 1e-9


def test_long_evolution_matches_expm(unit_terms: HamiltonianTerms, rng: np.random.Generator):
	psi = StateVector.random(6, rng)
	expected = scipy.linalg.expm(-7j * dense_hamiltonian(unit_terms)) @ psi.amplitudes
	assert np.linalg.norm(evolve_exact(unit_terms, psi, 7.0, krylov_dim=8).amplitudes - expected) <= 1e-8


def test_evolution_conserves(rng: np.random.Generator):
	terms = build_hamiltonian(ModelParams(n_sites=8, w=1.0, j=1.0, mass=0.5))
	psi = StateVector.random(8, rng, magnetization=0)
	evolved = evolve_exact(terms, psi, 3.0)
	assert np.linalg.norm(evolved.amplitudes) == pytest.approx(1.0, abs=1e-12)
	assert expectation(terms, evolved) == pytest.approx(expectation(terms, psi), abs=1e-8)
	assert evolved.sector_weights().get(0, 0.0) == pytest.approx(1.0, abs=1e-10)
	assert total_magnetization(evolved) == pytest.approx(0.0, abs=1e-10)


def test_evolution_composes(rng: np.random.Generator):
	terms = build_hamiltonian(ModelParams(n_sites=8, w=1.0, j=1.0, mass=1.0))
	psi = StateVector.random(8, rng)
	tol = 1e-10
	at_once = evolve_exact(terms, psi, 2.5, tol)
	in_steps = evolve_exact(terms, evolve_exact(terms, psi, 1.0, tol), 1.5, tol)
	assert np.linalg.norm(at_once.amplitudes - in_steps.amplitudes) <= 10 * tol


def test_evolve_grid(unit_terms: HamiltonianTerms):
	psi = StateVector.from_basis_state(bare_vacuum(6))
	states = evolve_grid(unit_terms, psi, [0.0, 0.5, 1.0])
	assert states[0] is psi
	assert states[2].fidelity(evolve_exact(unit_terms, psi, 1.0)) == pytest.approx(1.0, abs=1e-9)
	with pytest.raises(ParameterError):
		evolve_grid(unit_terms, psi, [1.0, 0.5])


def test_bad_evolution_arguments(unit_terms: HamiltonianTerms):
	psi = StateVector.from_basis_state(bare_vacuum(6))
	with pytest.raises(ParameterError):
		evolve_exact(unit_terms, psi, math.inf)
	with pytest.raises(ParameterError):
		evolve_exact(unit_terms, psi, 1.0, tol=0.0)
	with pytest.raises(ParameterError):
		evolve_exact(unit_terms, StateVector.from_basis_state(bare_vacuum(4)), 1.0)


def test_mass_ground_state_is_bare_vacuum():
	terms = build_hamiltonian(ModelParams(n_sites=4, w=1.0, mass=2.0)).part(z=True)
	ground = ground_state(terms)
	assert ground.energy == pytest.approx(-4.0), 'E = -mN/2'
	assert np.allclose(ground.state.amplitudes, StateVector.from_basis_state(bare_vacuum(4)).amplitudes)


def test_two_site_singlet():
	ground = ground_state(build_hamiltonian(ModelParams(n_sites=2, w=1.0)))
	assert ground.energy == pytest.approx(-1.0)
	assert np.allclose(ground.state.amplitudes, np.array([0, 1, -1, 0]) / math.sqrt(2))
	assert ground.gap == pytest.approx(1.0)


def test_ground_state_residual(unit_terms: HamiltonianTerms):
	ground = ground_state(unit_terms, magnetization=0)
	residual = apply_hamiltonian(unit_terms, ground.state) - ground.energy * ground.state.amplitudes
	assert np.linalg.norm(residual) <= 1e-10 * unit_terms.coefficient_bound()
	assert ground.state.sector_weights() == pytest.approx({0: 1.0})
	sector = np.flatnonzero(engine.basis_magnetizations(6) == 0)
	block = dense_hamiltonian(unit_terms)[np.ix_(sector, sector)]
	assert ground.energy == pytest.approx(scipy.linalg.eigvalsh(block)[0], abs=1e-9)


def test_sparse_ground_state_agrees(unit_terms: HamiltonianTerms, monkeypatch: pytest.MonkeyPatch):
	dense = ground_state(unit_terms, magnetization=0)
	monkeypatch.setattr(engine, '_dense_sector_limit', 8)
	sparse = ground_state(unit_terms, magnetization=0)
	assert sparse.energy == pytest.approx(dense.energy, abs=1e-9)
	assert sparse.state.fidelity(dense.state) == pytest.approx(1.0, abs=1e-8)


def test_empty_sector_rejected(unit_terms: HamiltonianTerms):
	with pytest.raises(ParameterError):
		ground_state(unit_terms, magnetization=1)


def test_reduced_density_product_state():
	block = reduced_density(StateVector.from_basis_state(bare_vacuum(4)), 2)
	assert block.dim == 4
	assert sorted(block.eigenvalues)[-1] == pytest.approx(1.0)
	assert sum(block.eigenvalues) == pytest.approx(1.0)


def test_reduced_density_bell_pair():
	bell = StateVector([0, 1, 1, 0], normalize=True)
	assert np.allclose(reduced_density(bell, 1).matrix, np.eye(2) / 2)


def test_reduced_density_sides_share_spectrum(rng: np.random.Generator):
	psi = StateVector.random(6, rng)
	left = np.sort(reduced_density(psi, 2).eigenvalues)[::-1]
	right = np.sort(reduced_density(psi, 2, keep='right').eigenvalues)[::-1]
	assert np.allclose(left, right[: left.size], atol=1e-12)
	assert np.allclose(right[left.size :], 0, atol=1e-12)
	with pytest.raises(ParameterError):
		reduced_density(psi, 6)


def test_density_block_checks():
	with pytest.raises(InvariantViolation):
		DensityBlock(np.eye(2))
	with pytest.raises(InvariantViolation):
		DensityBlock(np.array([[0.5, 1], [0, 0.5]]))


def test_y_rotations_compose(rng: np.random.Generator):
	psi = StateVector.random(3, rng)
	twice = apply_gate(GateOp.local_y([1, 3], math.pi / 4), apply_gate(GateOp.local_y([1, 3], math.pi / 4), psi))
	once = apply_gate(GateOp.local_y([1, 3], math.pi / 2), psi)
	assert np.allclose(twice.amplitudes, once.amplitudes)


def test_y_rotation_sign():
	# exp(-iπ/4 σʸ) takes spin up to (|↑⟩ + |↓⟩)/√2
	rotated = apply_gate(GateOp.local_y([1], math.pi / 4), StateVector.basis(1, 0))
	assert np.allclose(rotated.amplitudes, np.array([1, 1]) / math.sqrt(2))


def test_ms_gate_matches_expm(rng: np.random.Generator):
	n_sites = 4
	active = (1, 2, 4)
	theta = 0.3
	generator = sum(
		_embed(_pauli_x, a, n_sites) @ _embed(_pauli_x, b, n_sites)
		for i, a in enumerate(active)
		for b in active[i + 1 :]
	)
	psi = StateVector.random(n_sites, rng)
	expected = scipy.linalg.expm(-1j * theta * generator) @ psi.amplitudes
	assert np.allclose(apply_gate(GateOp.ms_xx(active, theta, 0.1), psi).amplitudes, expected, atol=1e-12)
	assert np.allclose(apply_gate(GateOp.ms_xx(active, 0.0, 0.0), psi).amplitudes, psi.amplitudes)


def test_hidden_sites_are_protected(rng: np.random.Generator):
	psi = StateVector.random(3, rng)
	with pytest.raises(ProtocolError):
		apply_gate(GateOp.ms_xx((1, 2), 0.1, 0.1), psi, hidden=frozenset({2}))
	with pytest.raises(ProtocolError):
		apply_sequence([GateOp.hide([3]), GateOp.local_z([3], [0.1]), GateOp.unhide([3])], psi)
	with pytest.raises(ProtocolError):
		apply_sequence([GateOp.hide([3])], psi)
	with pytest.raises(ProtocolError):
		apply_sequence([GateOp.unhide([3])], psi)
	dephased = apply_sequence([GateOp.hide([3]), GateOp.dephase([1, 2, 3], [0.1, 0.1, 0.2]), GateOp.unhide([3])], psi)
	assert dephased.n_sites == 3


def test_sequence_unitary_is_unitary():
	gates = [GateOp.local_y([1, 2], 0.3), GateOp.ms_xx([1, 2], 0.7, 0.1), GateOp.local_z([2], [0.2])]
	unitary = sequence_unitary(gates, 2)
	assert np.allclose(unitary.conj().T @ unitary, np.eye(4))


def test_sampling_a_basis_state(rng: np.random.Generator):
	samples = sample_basis_states(StateVector.from_basis_state(bare_vacuum(4)), 20, rng)
	assert {s.spins for s in samples} == {(1, -1, 1, -1)}


def test_snapshot(tmp_path, rng: np.random.Generator):
	psi = StateVector.random(5, rng)
	path = tmp_path / 'psi.bin'
	psi.save(path)
	assert np.array_equal(StateVector.load(path).amplitudes, psi.amplitudes)

	bad = tmp_path / 'bad.bin'
	bad.write_bytes(b'nope' + path.read_bytes()[4:])
	with pytest.raises(ParameterError):
		StateVector.load(bad)
	truncated = tmp_path / 'truncated.bin'
	truncated.write_bytes(path.read_bytes()[:-16])
	with pytest.raises(ParameterError):
		StateVector.load(truncated)
