"""Exact state-vector core: Hamiltonian action without materialising matrices, Krylov time evolution, ground states, reduced density matrices and gate application

Amplitude index convention: site 1 is the most significant bit of the index, and a 0 bit is spin up (σᶻ = +1)
So reshaping amplitudes to [2] * N gives one axis per site in site order, with index 0 on an axis being spin up"""

import logging
import struct
from collections.abc import Iterable, Mapping, Sequence
from functools import cache, lru_cache
from pathlib import Path
from typing import TYPE_CHECKING, NamedTuple

import numpy as np
import scipy.linalg
import scipy.sparse.linalg

from .exceptions import (
	InvariantViolation,
	NumericalError,
	ParameterError,
	ProtocolError,
	UnsupportedSizeError,
)
from .gates import GateKind, GateOp
from .model import BasisState, HamiltonianTerms
from .settings import SchwingerSimSettings

if TYPE_CHECKING:
	import numpy.typing as npt

	from .typedefs import ComplexArray, IntArray, RealArray

logger = logging.getLogger(__name__)
_settings = SchwingerSimSettings()

norm_tolerance = 1e-10
"""How far from 1 the norm of a StateVector may drift"""
_snapshot_magic = b'SSV1'
_breakdown_tolerance = 1e-12
_dense_sector_limit = 1 << 10
"""Sector dimension up to which ground states use a full dense eigensolve"""


@cache
def z_signs(n_sites: int) -> 'npt.NDArray[np.int8]':
	"""σᶻ eigenvalue of every site in every basis state, shape (N, 2^N), row n - 1 for site n"""
	indices = np.arange(1 << n_sites)
	signs = np.empty((n_sites, 1 << n_sites), dtype=np.int8)
	for n in range(1, n_sites + 1):
		signs[n - 1] = 1 - 2 * ((indices >> (n_sites - n)) & 1)
	signs.flags.writeable = False
	return signs


@cache
def basis_magnetizations(n_sites: int) -> 'IntArray':
	"""Σ σᶻ of every basis state"""
	mags = z_signs(n_sites).sum(axis=0, dtype=np.int64)
	mags.flags.writeable = False
	return mags


def _site_count(dim: int) -> int:
	n_sites = dim.bit_length() - 1
	if n_sites < 1 or dim != 1 << n_sites:
		raise ParameterError(f'State vector length must be a power of 2 (at least 2), got {dim}')
	return n_sites


class StateVector:
	"""Normalised pure state of N spins, immutable once constructed"""

	def __init__(self, amplitudes: 'ComplexArray | Sequence[complex]', *, normalize: bool = False) -> None:
		amps = np.array(amplitudes, dtype=np.complex128)
		if amps.ndim != 1:
			raise ParameterError(f'Amplitudes must be one-dimensional, got shape {amps.shape}')
		self.n_sites = _site_count(amps.size)
		norm = float(np.linalg.norm(amps))
		if normalize:
			if norm == 0:
				raise ParameterError('Cannot normalise a zero vector')
			amps /= norm
		elif abs(norm - 1) > norm_tolerance:
			raise InvariantViolation(f'State vector norm is {norm}, not 1')
		amps.flags.writeable = False
		self.amplitudes: 'ComplexArray' = amps

	@classmethod
	def from_basis_state(cls, state: BasisState) -> 'StateVector':
		return cls.basis(state.n_sites, state.index)

	@classmethod
	def basis(cls, n_sites: int, index: int) -> 'StateVector':
		amps = np.zeros(1 << n_sites, dtype=np.complex128)
		amps[index] = 1
		return cls(amps)

	@classmethod
	def random(cls, n_sites: int, rng: np.random.Generator, magnetization: int | None = None) -> 'StateVector':
		"""Haar-ish random state from complex Gaussian amplitudes, optionally supported on one magnetization sector"""
		dim = 1 << n_sites
		amps = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
		if magnetization is not None:
			amps[basis_magnetizations(n_sites) != magnetization] = 0
		return cls(amps, normalize=True)

	def __repr__(self) -> str:
		return f'{self.__class__.__qualname__}(n_sites={self.n_sites})'

	@property
	def dim(self) -> int:
		return self.amplitudes.size

	@property
	def tensor(self) -> 'ComplexArray':
		"""Amplitudes viewed with one axis per site"""
		return self.amplitudes.reshape([2] * self.n_sites)

	def overlap(self, other: 'StateVector') -> complex:
		"""⟨self|other⟩"""
		_check_same_size(self.n_sites, other.n_sites)
		return complex(np.vdot(self.amplitudes, other.amplitudes))

	def fidelity(self, other: 'StateVector') -> float:
		return abs(self.overlap(other)) ** 2

	def probabilities(self) -> 'RealArray':
		return np.abs(self.amplitudes) ** 2

	def z_expectations(self) -> 'RealArray':
		"""⟨σᶻ_n⟩ for every site, entry n - 1 for site n"""
		return z_signs(self.n_sites) @ self.probabilities()

	def sector_weights(self) -> Mapping[int, float]:
		"""Probability of each total magnetization, leaving out sectors with no weight at all"""
		weights = np.bincount(
			basis_magnetizations(self.n_sites) + self.n_sites, weights=self.probabilities()
		)
		return {m - self.n_sites: float(w) for m, w in enumerate(weights) if w > 0}

	def save(self, path: Path) -> None:
		"""Binary snapshot: magic, endianness tag, N as uint32, then interleaved real/imaginary doubles"""
		with path.open('wb') as f:
			f.write(_snapshot_magic)
			f.write(b'<')
			f.write(struct.pack('<I', self.n_sites))
			f.write(self.amplitudes.astype('<c16').tobytes())

	@classmethod
	def load(cls, path: Path) -> 'StateVector':
		data = path.read_bytes()
		if data[:4] != _snapshot_magic:
			raise ParameterError(f'{path} is not a state vector snapshot')
		endian = data[4:5].decode('ascii')
		if endian not in {'<', '>'}:
			raise ParameterError(f'{path} has an unknown endianness tag {endian!r}')
		(n_sites,) = struct.unpack(f'{endian}I', data[5:9])
		amps = np.frombuffer(data[9:], dtype=f'{endian}c16')
		if amps.size != 1 << n_sites:
			raise ParameterError(f'{path} is truncated, expected {1 << n_sites} amplitudes, got {amps.size}')
		return cls(amps.astype(np.complex128))


def _check_same_size(expected: int, actual: int) -> None:
	if expected != actual:
		raise ParameterError(f'Number of sites differ: {expected} != {actual}')


class HamiltonianOperator:
	"""Matrix-free action of a HamiltonianTerms: ZZ, Z and the constant folded into one diagonal, flip-flops done on a tensor view"""

	def __init__(self, terms: HamiltonianTerms) -> None:
		self.terms = terms
		self.n_sites = terms.n_sites
		self.dim = 1 << terms.n_sites
		signs = z_signs(self.n_sites)
		diagonal = np.full(self.dim, terms.constant)
		for a, b, c in terms.zz_pairs:
			diagonal += c * (signs[a - 1] * signs[b - 1])
		for n, c in terms.z_fields:
			diagonal += c * signs[n - 1]
		diagonal.flags.writeable = False
		self.diagonal: 'RealArray' = diagonal
		self.flip_flops = tuple((a, b, c) for a, b, c in terms.pm_pairs if c)

	def _pair_view(self, vec: 'ComplexArray', a: int, b: int) -> 'ComplexArray':
		low, high = sorted((a, b))
		return vec.reshape(
			1 << (low - 1), 2, 1 << (high - low - 1), 2, 1 << (self.n_sites - high)
		)

	def apply(self, vec: 'ComplexArray') -> 'ComplexArray':
		vec = np.ascontiguousarray(vec).reshape(-1)
		out = self.diagonal * vec
		for a, b, c in self.flip_flops:
			src = self._pair_view(vec, a, b)
			dst = self._pair_view(out, a, b)
			dst[:, 0, :, 1, :] += c * src[:, 1, :, 0, :]
			dst[:, 1, :, 0, :] += c * src[:, 0, :, 1, :]
		return out

	def restricted_dense(self, indices: 'IntArray') -> 'RealArray':
		"""Dense block of the matrix between the given basis states, only sensible for small blocks"""
		positions = np.full(self.dim, -1)
		positions[indices] = np.arange(indices.size)
		block = np.diag(self.diagonal[indices])
		for a, b, c in self.flip_flops:
			mask = (1 << (self.n_sites - a)) | (1 << (self.n_sites - b))
			partners = indices ^ mask
			anti_aligned = ((indices & mask) != 0) & ((indices & mask) != mask)
			in_block = anti_aligned & (positions[partners] >= 0)
			block[positions[partners[in_block]], positions[indices[in_block]]] += c
		return block


@lru_cache(maxsize=32)
def hamiltonian_operator(terms: HamiltonianTerms) -> HamiltonianOperator:
	return HamiltonianOperator(terms)


def apply_hamiltonian(h: HamiltonianTerms, psi: StateVector) -> 'ComplexArray':
	"""H|ψ⟩, not normalised"""
	_check_same_size(h.n_sites, psi.n_sites)
	return hamiltonian_operator(h).apply(psi.amplitudes)


def expectation(h: HamiltonianTerms, psi: StateVector) -> float:
	return float(np.vdot(psi.amplitudes, apply_hamiltonian(h, psi)).real)


def dense_hamiltonian(h: HamiltonianTerms) -> 'RealArray':
	"""Full matrix, for oracles on small systems

	Raises:
		UnsupportedSizeError: if there are more sites than settings.dense_limit"""
	if h.n_sites > _settings.dense_limit:
		raise UnsupportedSizeError(h.n_sites, _settings.dense_limit)
	op = hamiltonian_operator(h)
	return op.restricted_dense(np.arange(op.dim))


class _LanczosBasis(NamedTuple):
	vectors: 'ComplexArray'
	alphas: 'RealArray'
	betas: 'RealArray'
	"""Off-diagonals, followed by the residual norm of the last vector"""
	exhausted: bool
	"""The Krylov space is invariant, so projected evolution is exact"""


def _lanczos(op: HamiltonianOperator, start: 'ComplexArray', max_dim: int) -> _LanczosBasis:
	"""Lanczos with full reorthogonalisation, start must be normalised"""
	vectors = np.zeros((max_dim, start.size), dtype=np.complex128)
	vectors[0] = start
	alphas = []
	betas = []
	for j in range(max_dim):
		w = op.apply(vectors[j])
		alpha = float(np.vdot(vectors[j], w).real)
		w -= alpha * vectors[j]
		if j > 0:
			w -= betas[-1] * vectors[j - 1]
		w -= vectors[: j + 1].T @ (vectors[: j + 1].conj() @ w)
		beta = float(np.linalg.norm(w))
		alphas.append(alpha)
		betas.append(beta)
		if beta < _breakdown_tolerance:
			return _LanczosBasis(vectors[: j + 1], np.array(alphas), np.array(betas), exhausted=True)
		if j + 1 < max_dim:
			vectors[j + 1] = w / beta
	return _LanczosBasis(vectors, np.array(alphas), np.array(betas), exhausted=False)


def evolve_exact(
	h: HamiltonianTerms,
	psi: StateVector,
	t: float,
	tol: float | None = None,
	*,
	krylov_dim: int | None = None,
	max_steps: int | None = None,
) -> StateVector:
	"""e^{-iHt}|ψ⟩ by Krylov projection, substeps shrunk until each one's a-posteriori error estimate is within its share of tol

	Raises:
		ParameterError: for a non-finite time, non-positive tolerance, or mismatched sizes
		NumericalError: if the substep budget runs out"""
	_check_same_size(h.n_sites, psi.n_sites)
	if not np.isfinite(t):
		raise ParameterError(f'Evolution time must be finite, got {t}')
	tol = _settings.evolve_tol if tol is None else tol
	if tol <= 0:
		raise ParameterError(f'Tolerance must be positive, got {tol}')
	if t == 0:
		return psi
	krylov_dim = min(krylov_dim or _settings.krylov_dim, psi.dim)
	max_steps = max_steps or _settings.krylov_max_steps
	op = hamiltonian_operator(h)

	vec = psi.amplitudes.copy()
	remaining = t
	tau = t
	steps = 0
	while remaining != 0:
		if abs(tau) > abs(remaining):
			tau = remaining
		basis = _lanczos(op, vec / np.linalg.norm(vec), krylov_dim)
		k = basis.alphas.size
		if k == 1:
			evals = basis.alphas
			evecs = np.ones((1, 1))
		else:
			evals, evecs = scipy.linalg.eigh_tridiagonal(basis.alphas, basis.betas[: k - 1])
		while True:
			steps += 1
			if steps > max_steps:
				raise NumericalError(
					'Krylov evolution did not converge',
					{'t': t, 'remaining': remaining, 'substep': tau, 'steps': steps - 1, 'tol': tol},
				)
			coefficients = evecs @ (np.exp(-1j * tau * evals) * evecs[0])
			error = 0.0 if basis.exhausted else basis.betas[-1] * abs(coefficients[-1])
			if error <= tol * abs(tau) / abs(t):
				break
			tau /= 2
		vec = np.linalg.norm(vec) * (basis.vectors.T @ coefficients)
		remaining -= tau
		if abs(remaining) <= abs(t) * 1e-15:
			remaining = 0
	logger.debug('Evolved %d sites by t=%g in %d substeps', h.n_sites, t, steps)
	return StateVector(vec, normalize=True)


def evolve_grid(
	h: HamiltonianTerms, psi: StateVector, times: Iterable[float], tol: float | None = None
) -> list[StateVector]:
	"""States at each of a nondecreasing sequence of times, evolving incrementally from t=0, the errors of each increment add up"""
	states = []
	current = psi
	previous = 0.0
	for t in times:
		if t < previous:
			raise ParameterError(f'Times must be nondecreasing, got {t} after {previous}')
		current = evolve_exact(h, current, t - previous, tol)
		states.append(current)
		previous = t
	return states


class GroundState(NamedTuple):
	energy: float
	state: StateVector
	gap: float | None
	"""Distance to the next level, or None if only one level was computed"""


def _fix_phase(vec: 'ComplexArray') -> 'ComplexArray':
	"""Makes the first amplitude of (nearly) largest magnitude real positive"""
	magnitudes = np.abs(vec)
	dominant = int(np.flatnonzero(magnitudes >= magnitudes.max() - 1e-9)[0])
	return vec * (np.conj(vec[dominant]) / magnitudes[dominant])


def ground_state(h: HamiltonianTerms, tol: float | None = None, *, magnetization: int | None = None) -> GroundState:
	"""Lowest eigenpair of h, within one magnetization sector if asked (M = 0 being the zero-charge sector)

	Raises:
		ParameterError: if the requested sector is empty
		NumericalError: if the eigensolver does not reach the residual tolerance"""
	tol = _settings.ground_tol if tol is None else tol
	if tol <= 0:
		raise ParameterError(f'Tolerance must be positive, got {tol}')
	op = hamiltonian_operator(h)
	if magnetization is None:
		indices = np.arange(op.dim)
	else:
		indices = np.flatnonzero(basis_magnetizations(h.n_sites) == magnetization)
		if indices.size == 0:
			raise ParameterError(f'No basis states of {h.n_sites} sites have magnetization {magnetization}')

	scale = max(1.0, h.coefficient_bound())
	if indices.size <= _dense_sector_limit:
		evals, evecs = scipy.linalg.eigh(op.restricted_dense(indices), subset_by_index=(0, min(1, indices.size - 1)))
		energy = float(evals[0])
		sub_vec = evecs[:, 0].astype(np.complex128)
		gap = float(evals[1] - evals[0]) if evals.size > 1 else None
	else:
		energy, sub_vec, gap = _sparse_ground(op, indices, tol * scale)

	vec = np.zeros(op.dim, dtype=np.complex128)
	vec[indices] = sub_vec
	vec = _fix_phase(vec / np.linalg.norm(vec))
	residual = float(np.linalg.norm(op.apply(vec) - energy * vec))
	if residual > tol * scale:
		raise NumericalError('Ground state residual too large', {'residual': residual, 'allowed': tol * scale})
	if gap is not None and gap < 1e-10:
		logger.warning('Ground state of %d sites is degenerate (gap %g), returning one state of the manifold', h.n_sites, gap)
	return GroundState(energy, StateVector(vec, normalize=True), gap)


def _sparse_ground(op: HamiltonianOperator, indices: 'IntArray', allowed_residual: float) -> tuple[float, 'ComplexArray', float]:
	full = np.zeros(op.dim, dtype=np.complex128)

	def matvec(x: 'ComplexArray') -> 'ComplexArray':
		full[:] = 0
		full[indices] = x.ravel()
		return op.apply(full)[indices]

	restricted = scipy.sparse.linalg.LinearOperator((indices.size, indices.size), matvec=matvec, dtype=np.complex128)
	v0 = np.full(indices.size, 1 / np.sqrt(indices.size), dtype=np.complex128)
	eigsh_tol = 0.0
	for attempt in range(3):
		evals, evecs = scipy.sparse.linalg.eigsh(restricted, k=2, which='SA', v0=v0, tol=eigsh_tol, ncv=min(indices.size, 20 * (attempt + 1)))
		order = np.argsort(evals)
		evals = evals[order]
		vec = evecs[:, order[0]]
		residual = float(np.linalg.norm(matvec(vec) - evals[0] * vec))
		if residual <= allowed_residual:
			return float(evals[0]), vec, float(evals[1] - evals[0])
		logger.debug('eigsh attempt %d left residual %g, retrying with a larger subspace', attempt, residual)
	raise NumericalError('Sparse eigensolver did not converge', {'residual': residual, 'allowed': allowed_residual})


class DensityBlock:
	"""Reduced density matrix of a contiguous block of sites"""

	def __init__(self, matrix: 'ComplexArray') -> None:
		if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
			raise ParameterError(f'Density matrix must be square, got shape {matrix.shape}')
		if not np.allclose(matrix, matrix.conj().T, rtol=0, atol=1e-10):
			raise InvariantViolation('Density matrix is not Hermitian')
		trace = complex(np.trace(matrix))
		if abs(trace - 1) > 1e-10:
			raise InvariantViolation(f'Density matrix has trace {trace}')
		self.matrix = matrix
		self.eigenvalues: 'RealArray' = scipy.linalg.eigvalsh(matrix)
		if self.eigenvalues.min() < -1e-10:
			raise InvariantViolation(f'Density matrix has a negative eigenvalue {self.eigenvalues.min()}')

	@property
	def dim(self) -> int:
		return self.matrix.shape[0]


def _check_cut(n_sites: int, cut: int) -> None:
	if not 1 <= cut <= n_sites - 1:
		raise ParameterError(f'cut must be between 1 and {n_sites - 1}, got {cut}')


def reduced_density(psi: StateVector, cut: int, *, keep: str = 'left') -> DensityBlock:
	"""ρ of sites 1..cut (keep='left') or cut+1..N (keep='right'), tracing out the rest"""
	_check_cut(psi.n_sites, cut)
	matrix = psi.amplitudes.reshape(1 << cut, -1)
	if keep == 'right':
		matrix = matrix.T
	elif keep != 'left':
		raise ParameterError(f'keep must be left or right, got {keep!r}')
	rho = matrix @ matrix.conj().T
	return DensityBlock((rho + rho.conj().T) / 2)


def schmidt_coefficients(psi: StateVector, cut: int) -> 'RealArray':
	"""Singular values of the amplitudes reshaped across the cut, largest first"""
	_check_cut(psi.n_sites, cut)
	return scipy.linalg.svdvals(psi.amplitudes.reshape(1 << cut, -1))


_hadamard = np.array([[1, 1], [1, -1]], dtype=np.complex128) / np.sqrt(2)


def _apply_single_site(tensor: 'ComplexArray', matrix: 'ComplexArray', site: int) -> 'ComplexArray':
	tensor = np.tensordot(matrix, tensor, axes=([1], [site - 1]))
	return np.moveaxis(tensor, 0, site - 1)


def _y_rotation(angle: float) -> 'ComplexArray':
	"""exp(-i angle σʸ)"""
	c, s = np.cos(angle), np.sin(angle)
	return np.array([[c, -s], [s, c]], dtype=np.complex128)


def _z_phases(n_sites: int, sites: Sequence[int], angles: Sequence[float]) -> 'ComplexArray':
	signs = z_signs(n_sites)
	total = np.zeros(1 << n_sites)
	for site, angle in zip(sites, angles, strict=True):
		total += angle * signs[site - 1]
	return np.exp(-1j * total)


def _apply_gate_array(gate: GateOp, amps: 'ComplexArray', n_sites: int) -> 'ComplexArray':
	if gate.kind in {GateKind.HIDE, GateKind.UNHIDE}:
		return amps
	if gate.kind in {GateKind.LOCAL_Z, GateKind.DEPHASE}:
		return amps * _z_phases(n_sites, gate.sites, gate.angles)
	tensor = amps.reshape([2] * n_sites)
	if gate.kind == GateKind.LOCAL_Y:
		rotation = _y_rotation(gate.angle)
		for site in gate.sites:
			tensor = _apply_single_site(tensor, rotation, site)
		return tensor.reshape(-1)
	if gate.kind == GateKind.MS_XX:
		# X = HZH on each active ion, and Σ_{k<l} z_k z_l = (S² - |A|)/2 with S the active magnetization
		for site in gate.sites:
			tensor = _apply_single_site(tensor, _hadamard, site)
		signs = z_signs(n_sites)
		active_m = signs[[site - 1 for site in gate.sites]].sum(axis=0, dtype=np.int64)
		pair_sum = (active_m * active_m - len(gate.sites)) / 2
		tensor = (tensor.reshape(-1) * np.exp(-1j * gate.angle * pair_sum)).reshape([2] * n_sites)
		for site in gate.sites:
			tensor = _apply_single_site(tensor, _hadamard, site)
		return tensor.reshape(-1)
	raise InvariantViolation(f'Unhandled gate kind {gate.kind}')


def _check_gate(gate: GateOp, n_sites: int, hidden: frozenset[int]) -> None:
	if any(site > n_sites for site in gate.sites):
		raise ParameterError(f'{gate.kind.value} gate on sites {gate.sites} does not fit in {n_sites} sites')
	if gate.kind in {GateKind.MS_XX, GateKind.LOCAL_Y, GateKind.LOCAL_Z}:
		touched = hidden.intersection(gate.sites)
		if touched:
			raise ProtocolError(f'{gate.kind.value} gate acts on hidden sites {sorted(touched)}')


def apply_gate(gate: GateOp, psi: StateVector, hidden: frozenset[int] = frozenset()) -> StateVector:
	"""Applies one gate, given which sites are hidden at the time

	Raises:
		ProtocolError: if a control gate touches a hidden site"""
	_check_gate(gate, psi.n_sites, hidden)
	return StateVector(_apply_gate_array(gate, psi.amplitudes, psi.n_sites))


def _track_hiding(gate: GateOp, hidden: frozenset[int]) -> frozenset[int]:
	if gate.kind == GateKind.HIDE:
		already = hidden.intersection(gate.sites)
		if already:
			raise ProtocolError(f'Sites {sorted(already)} are hidden twice')
		return hidden.union(gate.sites)
	if gate.kind == GateKind.UNHIDE:
		not_hidden = set(gate.sites).difference(hidden)
		if not_hidden:
			raise ProtocolError(f'Sites {sorted(not_hidden)} are unhidden without being hidden')
		return hidden.difference(gate.sites)
	return hidden


def apply_sequence(gates: Iterable[GateOp], psi: StateVector, hidden: frozenset[int] = frozenset()) -> StateVector:
	"""Applies gates in order, keeping track of which sites are hidden

	Raises:
		ProtocolError: if a gate touches a hidden site, hiding is unbalanced, or the sequence ends with sites still hidden"""
	amps = psi.amplitudes
	for gate in gates:
		_check_gate(gate, psi.n_sites, hidden)
		amps = _apply_gate_array(gate, amps, psi.n_sites)
		hidden = _track_hiding(gate, hidden)
	if hidden:
		raise ProtocolError(f'Sequence leaves sites {sorted(hidden)} hidden')
	return StateVector(amps)


def sequence_unitary(gates: Sequence[GateOp], n_sites: int) -> 'ComplexArray':
	"""Dense unitary of a whole sequence, column by column

	Raises:
		UnsupportedSizeError: past settings.dense_limit"""
	if n_sites > _settings.dense_limit:
		raise UnsupportedSizeError(n_sites, _settings.dense_limit)
	dim = 1 << n_sites
	unitary = np.empty((dim, dim), dtype=np.complex128)
	for index in range(dim):
		unitary[:, index] = apply_sequence(gates, StateVector.basis(n_sites, index)).amplitudes
	return unitary


def sample_basis_states(psi: StateVector, shots: int, rng: np.random.Generator) -> list[BasisState]:
	"""Projective σᶻ measurement of every site, repeated shots times"""
	probabilities = psi.probabilities()
	outcomes = rng.choice(psi.dim, size=shots, p=probabilities / probabilities.sum())
	return [BasisState.from_index(psi.n_sites, int(index)) for index in outcomes]
