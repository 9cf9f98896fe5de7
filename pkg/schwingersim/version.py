import subprocess
from pathlib import Path

__version__ = '0.1.0'


def get_git_version() -> str:
	"""Tag or commit of the checkout this package is imported from, with -dirty when there are local changes

	Raises:
		subprocess.CalledProcessError: outside a git checkout
		FileNotFoundError: if git is not installed"""
	return subprocess.check_output(
		['git', 'describe', '--tags', '--always', '--dirty'],
		encoding='utf8',
		cwd=Path(__file__).parent,
		stderr=subprocess.DEVNULL,
	).strip()


def describe_build() -> str:
	"""Version recorded in run manifests, falling back to the package version for installed copies"""
	try:
		return get_git_version()
	except (subprocess.CalledProcessError, FileNotFoundError):
		return f'v{__version__}'
