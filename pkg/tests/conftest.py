import pytest

from stratlearn.space import builtin_space


@pytest.fixture(scope="session")
def small_space():
    return builtin_space("kissat_small")


@pytest.fixture(scope="session")
def large_space():
    return builtin_space("kissat_large")
