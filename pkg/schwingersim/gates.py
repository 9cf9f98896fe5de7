"""Gate operations of the trapped-ion protocol, and their line-oriented text format

Every gate is exp(-i * angle * P), with P being:
	MS_XX: Σ σˣ_k σˣ_l over unordered pairs k < l of the active set
	LOCAL_Y: Σ σʸ_n over the sites
	LOCAL_Z, DEPHASE: σᶻ_n with a separate angle per site
HIDE and UNHIDE move ions to and from the hiding levels and do nothing to the state itself"""

import math
from collections.abc import Iterable, Sequence
from enum import Enum

from pydantic import BaseModel, Field, model_validator

from .exceptions import ParameterError
from .typedefs import Site


class GateKind(str, Enum):
	MS_XX = 'MS_XX'
	LOCAL_Y = 'LOCAL_Y'
	LOCAL_Z = 'LOCAL_Z'
	HIDE = 'HIDE'
	UNHIDE = 'UNHIDE'
	DEPHASE = 'DEPHASE'
	"""Environmental Z phase from the noise model, allowed to act on hidden ions"""


_single_angle_kinds = {GateKind.MS_XX, GateKind.LOCAL_Y}
_per_site_kinds = {GateKind.LOCAL_Z, GateKind.DEPHASE}


class GateOp(BaseModel):
	"""One element of a gate sequence"""

	model_config = {'extra': 'forbid', 'frozen': True}

	kind: GateKind
	sites: tuple[Site, ...]
	"""1-indexed sites acted on, the active set for MS_XX"""
	angles: tuple[float, ...] = ()
	"""One angle for MS_XX and LOCAL_Y, one per site for LOCAL_Z and DEPHASE, none for HIDE/UNHIDE"""
	duration: float = Field(default=0.0, ge=0)
	"""Time the entangling interaction is on, 0 for everything else"""

	@model_validator(mode='after')
	def _check_shape(self) -> 'GateOp':
		if any(site < 1 for site in self.sites):
			raise ValueError(f'sites are 1-indexed, got {self.sites}')
		if len(set(self.sites)) != len(self.sites):
			raise ValueError(f'sites must be distinct, got {self.sites}')
		if self.kind in _single_angle_kinds and len(self.angles) != 1:
			raise ValueError(f'{self.kind.value} takes exactly one angle, got {self.angles}')
		if self.kind in _per_site_kinds and len(self.angles) != len(self.sites):
			raise ValueError(f'{self.kind.value} needs one angle per site')
		if self.kind in {GateKind.HIDE, GateKind.UNHIDE} and self.angles:
			raise ValueError(f'{self.kind.value} takes no angles')
		if self.kind == GateKind.MS_XX and not self.sites:
			raise ValueError('MS_XX needs a nonempty active set')
		if self.kind != GateKind.MS_XX and self.duration:
			raise ValueError('only MS_XX gates take time')
		return self

	@classmethod
	def ms_xx(cls, sites: Iterable[Site], angle: float, duration: float) -> 'GateOp':
		return cls(kind=GateKind.MS_XX, sites=tuple(sites), angles=(angle,), duration=duration)

	@classmethod
	def local_y(cls, sites: Iterable[Site], angle: float) -> 'GateOp':
		return cls(kind=GateKind.LOCAL_Y, sites=tuple(sites), angles=(angle,))

	@classmethod
	def local_z(cls, sites: Iterable[Site], angles: Iterable[float]) -> 'GateOp':
		return cls(kind=GateKind.LOCAL_Z, sites=tuple(sites), angles=tuple(angles))

	@classmethod
	def dephase(cls, sites: Iterable[Site], angles: Iterable[float]) -> 'GateOp':
		return cls(kind=GateKind.DEPHASE, sites=tuple(sites), angles=tuple(angles))

	@classmethod
	def hide(cls, sites: Iterable[Site]) -> 'GateOp':
		return cls(kind=GateKind.HIDE, sites=tuple(sites))

	@classmethod
	def unhide(cls, sites: Iterable[Site]) -> 'GateOp':
		return cls(kind=GateKind.UNHIDE, sites=tuple(sites))

	@property
	def angle(self) -> float:
		"""The single angle of an MS_XX or LOCAL_Y gate"""
		if self.kind not in _single_angle_kinds:
			raise ParameterError(f'{self.kind.value} has per-site angles')
		return self.angles[0]

	@property
	def is_entangling(self) -> bool:
		return self.kind == GateKind.MS_XX

	def updated_copy(self, **changes: object) -> 'GateOp':
		return type(self).model_validate(self.model_dump() | changes)


GateSequence = Sequence[GateOp]


def _format_list(values: Sequence[object]) -> str:
	return ','.join(repr(float(v)) if isinstance(v, float) else str(v) for v in values) if values else '-'


def format_gate(gate: GateOp) -> str:
	return '\t'.join(
		(gate.kind.value, _format_list(gate.sites), _format_list(gate.angles), repr(float(gate.duration)))
	)


def format_sequence(gates: GateSequence) -> str:
	"""One gate per line: KIND, comma-separated sites, comma-separated angles, duration, separated by tabs; '-' for an empty list"""
	return ''.join(format_gate(gate) + '\n' for gate in gates)


def check_ms_timing(gates: GateSequence, j0: float, rel_tol: float = 1e-9) -> None:
	"""Raises ParameterError unless every MS_XX angle is J₀ times its duration
	Sequences from perturb_sequence fail this when the coupling offset is nonzero"""
	for index, gate in enumerate(gates):
		if gate.is_entangling and not math.isclose(gate.angle, j0 * gate.duration, rel_tol=rel_tol, abs_tol=1e-15):
			raise ParameterError(
				f'gate {index}: MS_XX angle {gate.angle!r} is not J₀ × duration = {j0 * gate.duration!r}'
			)


def parse_sequence(text: str, *, j0: float | None = None) -> list[GateOp]:
	"""Reads what format_sequence writes, skipping blank lines and # comments
	With j0, MS_XX angles are also checked against their durations

	Raises:
		ParameterError: if a line is malformed, or an MS_XX gate does not run for as long as its angle needs"""
	gates = []
	for line_number, line in enumerate(text.splitlines(), start=1):
		line = line.split('#', 1)[0].strip()
		if not line:
			continue
		fields = line.split('\t')
		if len(fields) != 4:
			raise ParameterError(f'line {line_number}: expected 4 tab-separated fields, got {len(fields)}')
		kind, sites, angles, duration = fields
		try:
			gates.append(
				GateOp(
					kind=GateKind(kind),
					sites=() if sites == '-' else tuple(int(s) for s in sites.split(',')),
					angles=() if angles == '-' else tuple(float(a) for a in angles.split(',')),
					duration=float(duration),
				)
			)
		except ValueError as e:
			raise ParameterError(f'line {line_number}: {e}') from e
	if j0 is not None:
		check_ms_timing(gates, j0)
	return gates
