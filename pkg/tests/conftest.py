import pytest

from confluent_wznw import build_algebra


@pytest.fixture(scope="session")
def sl2():
    return build_algebra("A", 1)


@pytest.fixture(scope="session")
def sl3():
    return build_algebra("A", 2)
