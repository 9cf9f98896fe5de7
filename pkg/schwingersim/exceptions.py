from collections.abc import Mapping
from typing import Any


class ParameterError(ValueError):
	"""Raised for invalid parameters, or arguments that don't fit together (e.g. different numbers of sites)"""


class UnsupportedSizeError(ParameterError):
	"""Raised if something that needs dense matrices is asked to handle too many sites"""
	def __init__(self, n_sites: int, limit: int, what: str = 'dense matrices') -> None:
		self.n_sites = n_sites
		self.limit = limit
		super().__init__(f'{what} are only supported up to {limit} sites, got {n_sites}')


class PreconditionError(ParameterError):
	"""Raised if an input state doesn't satisfy what an operation needs from it, e.g. a definite magnetization sector"""


class ProtocolError(RuntimeError):
	"""Raised if a gate sequence breaks the rules of the hardware protocol, e.g. a gate acting on a hidden ion"""


class NumericalError(ArithmeticError):
	"""Raised if a numerical method did not converge, with whatever it knew at the time in diagnostics"""
	def __init__(self, message: str, diagnostics: Mapping[str, Any] | None = None) -> None:
		self.diagnostics = dict(diagnostics or {})
		if self.diagnostics:
			message += ' (' + ', '.join(f'{k}={v!r}' for k, v in self.diagnostics.items()) + ')'
		super().__init__(message)


class FitError(NumericalError):
	"""Raised if a least-squares fit is under-determined or the design matrix is rank deficient"""


class InvariantViolation(AssertionError):
	"""Raised if something that should be impossible happened anyway"""


class ConfigError(ValueError):
	"""Raised for a bad run configuration, naming the field that was wrong"""
	def __init__(self, field: str, problem: str) -> None:
		self.field = field
		self.problem = problem
		super().__init__(f'{field}: {problem}' if field else problem)
