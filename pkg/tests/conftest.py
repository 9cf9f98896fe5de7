import numpy as np
import pytest


def pytest_configure(config: pytest.Config):
	config.addinivalue_line('markers', 'slow: physics checks that take tens of seconds, deselect with -m "not slow"')


@pytest.fixture
def rng():
	return np.random.default_rng(20240607)
