import pytest

from dnlslab.numerics import GridSpec


@pytest.fixture(scope="session")
def grid20():
    return GridSpec(20.0, 1024)


@pytest.fixture(scope="session")
def grid_small():
    return GridSpec(20.0, 512)
