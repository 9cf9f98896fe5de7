from .continuum import (
	Extrapolation,
	LatticeSpacing,
	RampSchedule,
	SweepResult,
	adiabatic_prepare,
	continuum_sweep,
	couplings_from_spacing,
	extrapolate_thermodynamic,
	quench_run,
	spacing_for_ratio,
)
from .engine import (
	DensityBlock,
	GroundState,
	StateVector,
	apply_gate,
	apply_hamiltonian,
	apply_sequence,
	evolve_exact,
	evolve_grid,
	ground_state,
	reduced_density,
	sample_basis_states,
)
from .exceptions import (
	ConfigError,
	FitError,
	InvariantViolation,
	NumericalError,
	ParameterError,
	PreconditionError,
	ProtocolError,
	UnsupportedSizeError,
)
from .gates import GateKind, GateOp, check_ms_timing, format_sequence, parse_sequence
from .model import (
	BasisState,
	FieldProfile,
	HamiltonianTerms,
	ModelParams,
	bare_vacuum,
	build_hamiltonian,
	coupling_matrix,
	gauss_field_profile,
)
from .noise import (
	NoiseParams,
	NoiseSample,
	ensemble_average,
	hiding_failure_monte_carlo,
	perturb_sequence,
	postselect_magnetization,
	sample_noise,
)
from .observables import (
	Persistence,
	TimeSeries,
	electric_field_expectation,
	extended_state_entropy,
	half_chain_entropy,
	particle_density,
	rate_function_kappa,
	total_magnetization,
	vacuum_persistence,
)
from .trotter import (
	CompiledSchedule,
	TrotterSchedule,
	compile_cycle,
	compile_section1,
	compile_section2,
	compile_section3,
	run_schedule,
	trotter_error_bound,
)
from .version import __version__

__all__ = [
	'BasisState',
	'CompiledSchedule',
	'ConfigError',
	'DensityBlock',
	'Extrapolation',
	'FieldProfile',
	'FitError',
	'GateKind',
	'GateOp',
	'GroundState',
	'HamiltonianTerms',
	'InvariantViolation',
	'LatticeSpacing',
	'ModelParams',
	'NoiseParams',
	'NoiseSample',
	'NumericalError',
	'ParameterError',
	'Persistence',
	'PreconditionError',
	'ProtocolError',
	'RampSchedule',
	'StateVector',
	'SweepResult',
	'TimeSeries',
	'TrotterSchedule',
	'UnsupportedSizeError',
	'__version__',
	'adiabatic_prepare',
	'apply_gate',
	'apply_hamiltonian',
	'apply_sequence',
	'bare_vacuum',
	'build_hamiltonian',
	'check_ms_timing',
	'compile_cycle',
	'compile_section1',
	'compile_section2',
	'compile_section3',
	'continuum_sweep',
	'coupling_matrix',
	'couplings_from_spacing',
	'electric_field_expectation',
	'ensemble_average',
	'evolve_exact',
	'evolve_grid',
	'extended_state_entropy',
	'extrapolate_thermodynamic',
	'format_sequence',
	'gauss_field_profile',
	'ground_state',
	'half_chain_entropy',
	'hiding_failure_monte_carlo',
	'parse_sequence',
	'particle_density',
	'perturb_sequence',
	'postselect_magnetization',
	'quench_run',
	'rate_function_kappa',
	'reduced_density',
	'run_schedule',
	'sample_basis_states',
	'sample_noise',
	'spacing_for_ratio',
	'total_magnetization',
	'trotter_error_bound',
	'vacuum_persistence',
]
