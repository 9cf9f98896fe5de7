"""The encoded lattice Schwinger model: gauge fields eliminated through the Gauss law, leaving a spin chain with asymmetric long-range ZZ couplings

Conventions used everywhere:
	Sites are 1-indexed in arguments and in tuples of terms; arrays are 0-indexed, so entry n - 1 is site n
	σᶻ = +1 means the site is occupied
	Constant energy offsets are dropped unless asked for, they only give a global phase"""

import logging
from typing import TYPE_CHECKING, NamedTuple

import numpy as np
from pydantic import BaseModel, Field, field_validator

from .exceptions import InvariantViolation, ParameterError
from .typedefs import RealArray, Site

if TYPE_CHECKING:
	from typing_extensions import Self

logger = logging.getLogger(__name__)


def staggered_sign(site: Site) -> int:
	"""(-1)^n for a 1-indexed site"""
	return -1 if site % 2 else 1


class ModelParams(BaseModel):
	"""Lattice couplings defining the simulated theory, in natural units (inverse length)"""

	model_config = {'extra': 'forbid', 'frozen': True}

	n_sites: int = Field(ge=2)
	"""Number of lattice sites N, must be even as the staggered unit cell has two sites"""
	w: float = Field(gt=0)
	"""Hopping/pair creation rate, 1/(2a)"""
	j: float = Field(default=0.0, ge=0)
	"""Electric field energy J = g²a/2"""
	mass: float = Field(default=0.0, ge=0)
	"""Fermion rest mass m"""
	j0: float = Field(default=1.0, gt=0)
	"""Mølmer-Sørensen coupling strength J₀ of the simulator, only matters for gate protocols"""
	eps0: int = 0
	"""Background field ε₀, only supported for Gauss law reconstruction"""

	@field_validator('n_sites')
	@classmethod
	def _even_sites(cls, n_sites: int) -> int:
		if n_sites % 2:
			raise ValueError(f'n_sites must be even, got {n_sites}')
		return n_sites

	def updated_copy(self, **changes: object) -> 'Self':
		"""Returns a new instance with the same fields as this, but with fields updated as specified by changes, validated again"""
		return type(self).model_validate(self.model_dump() | changes)


class ZZTerm(NamedTuple):
	site_a: Site
	site_b: Site
	coefficient: float


class PMTerm(NamedTuple):
	"""coefficient * (σ⁺_a σ⁻_b + σ⁻_a σ⁺_b), always between neighbours"""
	site_a: Site
	site_b: Site
	coefficient: float


class ZField(NamedTuple):
	site: Site
	coefficient: float


class HamiltonianTerms(BaseModel):
	"""Symbolic term list of H_S = H_ZZ + H_± + H_Z, which the engine turns into a matrix-free operator"""

	model_config = {'extra': 'forbid', 'frozen': True}

	n_sites: int = Field(ge=1)
	zz_pairs: tuple[ZZTerm, ...] = ()
	"""(n, l, c_nl) with n < l"""
	pm_pairs: tuple[PMTerm, ...] = ()
	"""(n, n + 1, w)"""
	z_fields: tuple[ZField, ...] = ()
	"""(n, h_n), staggered mass plus the field energy offsets"""
	constant: float = 0.0
	"""Energy offset, dropped (0) unless build_hamiltonian was asked to include it"""

	def part(self, *, zz: bool = False, pm: bool = False, z: bool = False) -> 'HamiltonianTerms':
		"""Only the selected term groups, without the constant"""
		return HamiltonianTerms(
			n_sites=self.n_sites,
			zz_pairs=self.zz_pairs if zz else (),
			pm_pairs=self.pm_pairs if pm else (),
			z_fields=self.z_fields if z else (),
		)

	def scaled(self, *, zz: float = 1.0, pm: float = 1.0, z: float = 1.0) -> 'HamiltonianTerms':
		"""Every coefficient of each group multiplied by a factor, e.g. for ramping H_± on"""
		return HamiltonianTerms(
			n_sites=self.n_sites,
			zz_pairs=tuple(ZZTerm(a, b, c * zz) for a, b, c in self.zz_pairs),
			pm_pairs=tuple(PMTerm(a, b, c * pm) for a, b, c in self.pm_pairs),
			z_fields=tuple(ZField(n, c * z) for n, c in self.z_fields),
			constant=self.constant,
		)

	def coefficient_bound(self) -> float:
		"""Sum of absolute coefficients, an upper bound on the operator norm"""
		return (
			sum(abs(c) for *_, c in self.zz_pairs)
			+ 2 * sum(abs(c) for *_, c in self.pm_pairs)
			+ sum(abs(c) for _, c in self.z_fields)
			+ abs(self.constant)
		)


def local_field_coefficients(params: ModelParams) -> RealArray:
	"""h_n = (m/2)(-1)^n - (J/2) Σ_{k=n}^{N-1} (k mod 2), the per-site resummation of H_Z, index n - 1 for site n"""
	n_sites = params.n_sites
	odd_links_from = np.zeros(n_sites + 1)
	# Number of odd k in [n, N - 1], accumulated from the right
	for n in range(n_sites - 1, 0, -1):
		odd_links_from[n] = odd_links_from[n + 1] + (n % 2)
	return np.array(
		[
			(params.mass / 2) * staggered_sign(n) - (params.j / 2) * odd_links_from[n]
			for n in range(1, n_sites + 1)
		]
	)


def dropped_constant(params: ModelParams) -> float:
	"""Constant from expanding J Σ L_n² at ε₀ = 0: (J/4)(N(N-1)/2 + ⌊N/2⌋)"""
	n_sites = params.n_sites
	return (params.j / 4) * (n_sites * (n_sites - 1) / 2 + n_sites // 2)


def build_hamiltonian(params: ModelParams, *, include_constant: bool = False) -> HamiltonianTerms:
	"""Spin Hamiltonian H_S = H_ZZ + H_± + H_Z for zero background field

	Raises:
		ParameterError: if params has a nonzero background field, which would change every term group"""
	if params.eps0 != 0:
		raise ParameterError(f'Hamiltonian is only built for eps0 = 0, got {params.eps0}')
	n_sites = params.n_sites
	zz_pairs = tuple(
		ZZTerm(n, l, (params.j / 2) * (n_sites - l))
		for n in range(1, n_sites - 1)
		for l in range(n + 1, n_sites)
	)
	pm_pairs = tuple(PMTerm(n, n + 1, params.w) for n in range(1, n_sites))
	z_fields = tuple(
		ZField(n, float(h)) for n, h in enumerate(local_field_coefficients(params), start=1)
	)
	return HamiltonianTerms(
		n_sites=n_sites,
		zz_pairs=zz_pairs,
		pm_pairs=pm_pairs,
		z_fields=z_fields,
		constant=dropped_constant(params) if include_constant else 0.0,
	)


def coupling_matrix(params: ModelParams, *, symmetric: bool = False) -> RealArray:
	"""N×N matrix of ZZ couplings, entry (n, l) = (J/2)(N - max(n, l)) for n < l and zero when max(n, l) = N
	Each pair is counted once, above the diagonal, giving rank N - 2; with symmetric the (l, n) entries are filled in too, raising the rank to N - 1"""
	n_sites = params.n_sites
	sites = np.arange(1, n_sites + 1)
	furthest = np.maximum.outer(sites, sites)
	matrix = (params.j / 2) * (n_sites - furthest).astype(float)
	np.fill_diagonal(matrix, 0.0)
	if symmetric:
		return matrix
	return np.triu(matrix)


class BasisState(BaseModel):
	"""Computational basis configuration, σᶻ eigenvalue per site"""

	model_config = {'extra': 'forbid', 'frozen': True}

	spins: tuple[int, ...] = Field(min_length=1)

	@field_validator('spins')
	@classmethod
	def _spin_values(cls, spins: tuple[int, ...]) -> tuple[int, ...]:
		if any(s not in {1, -1} for s in spins):
			raise ValueError(f'spins must be +1 or -1, got {spins}')
		return spins

	@classmethod
	def from_index(cls, n_sites: int, index: int) -> 'BasisState':
		"""Site 1 is the most significant bit, bit 0 is spin up"""
		return cls(spins=tuple(1 - 2 * ((index >> (n_sites - n)) & 1) for n in range(1, n_sites + 1)))

	@property
	def n_sites(self) -> int:
		return len(self.spins)

	@property
	def index(self) -> int:
		"""Position of this configuration in a state vector"""
		index = 0
		for s in self.spins:
			index = (index << 1) | (s == -1)
		return index

	@property
	def magnetization(self) -> int:
		"""M = Σ σᶻ_n, zero in the zero-charge sector"""
		return sum(self.spins)

	def flipped(self, *sites: Site) -> 'BasisState':
		spins = list(self.spins)
		for site in sites:
			spins[site - 1] = -spins[site - 1]
		return BasisState(spins=tuple(spins))


class FieldProfile(BaseModel):
	"""Electric field L_n on each of the N - 1 links, link n sits between sites n and n + 1"""

	model_config = {'extra': 'forbid', 'frozen': True}

	links: tuple[int, ...]


def bare_vacuum(n_sites: int) -> BasisState:
	"""Néel pattern with odd sites occupied and even sites empty, ie. no particles at all

	Raises:
		ParameterError: if n_sites is odd"""
	if n_sites < 2 or n_sites % 2:
		raise ParameterError(f'Bare vacuum needs an even number of sites, got {n_sites}')
	return BasisState(spins=tuple(-staggered_sign(n) for n in range(1, n_sites + 1)))


def _half_integer_to_int(twice: int, link: Site) -> int:
	if twice % 2:
		raise InvariantViolation(f'Gauss law produced a half-integral field on link {link}')
	return twice // 2


def gauss_field_profile(state: BasisState, eps0: int = 0) -> FieldProfile:
	"""L_n = ε₀ + ½ Σ_{l≤n} (σᶻ_l + (-1)^l), accumulated left to right"""
	twice = 2 * eps0
	links = []
	for n in range(1, state.n_sites):
		twice += state.spins[n - 1] + staggered_sign(n)
		links.append(_half_integer_to_int(twice, n))
	return FieldProfile(links=tuple(links))


def gauss_field_profile_from_right(state: BasisState, eps0: int = 0) -> FieldProfile:
	"""L_n = ε₀ - ½ Σ_{l>n} (σᶻ_l + (-1)^l), the same Gauss law accumulated from the right boundary
	Agrees with gauss_field_profile when the total charge is zero"""
	twice = 2 * eps0
	links = []
	for n in range(state.n_sites - 1, 0, -1):
		twice -= state.spins[n] + staggered_sign(n + 1)
		links.append(_half_integer_to_int(twice, n))
	return FieldProfile(links=tuple(reversed(links)))


def field_energy(state: BasisState, params: ModelParams) -> float:
	"""J Σ L_n² on a basis state, with the field reconstructed from the left"""
	profile = gauss_field_profile(state, params.eps0)
	return params.j * float(sum(l * l for l in profile.links))
