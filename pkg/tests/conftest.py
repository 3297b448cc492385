import pytest

from fo4lab.gset import GSetParams, enumerate_g


@pytest.fixture(scope="session")
def reduced_registry():
    # v0 <= 4, per-layer bound 3, layers 0..2; about a minute on one core
    return enumerate_g(GSetParams.reduced())
