from pathlib import Path

from pydantic import Field
from pydantic_settings import BaseSettings


class SchwingerSimSettings(BaseSettings):
	"""Process-wide defaults, overridable through SCHWINGERSIM_* environment variables or a .env file"""

	output_root: Path = Path('runs')
	"""Directory that run outputs go under when a config does not name its own output directory"""
	threads: int = Field(default=1, ge=1)
	"""Worker threads for trajectory ensembles and sweeps, results do not depend on this"""
	evolve_tol: float = Field(default=1e-9, gt=0)
	"""2-norm error allowed for exact time evolution"""
	ground_tol: float = Field(default=1e-10, gt=0)
	"""Relative residual allowed for ground states"""
	krylov_dim: int = Field(default=30, ge=2)
	"""Largest Krylov subspace built per evolution substep"""
	krylov_max_steps: int = Field(default=100_000, ge=1)
	"""Substep budget for one evolve_exact call before giving up"""
	dense_limit: int = Field(default=12, ge=2)
	"""Largest number of sites for which dense matrices (oracles, commutator norms) may be built"""
	log_level: str = 'INFO'

	model_config = {'env_prefix': 'schwingersim_', 'env_file': '.env', 'env_file_encoding': 'utf-8', 'extra': 'ignore'}
