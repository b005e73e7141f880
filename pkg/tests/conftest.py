import functools

import pytest

from semispec import builtin
from semispec.geometry import auto_domain


@pytest.fixture(scope="session")
def harmonic():
    return builtin("harmonic")


@pytest.fixture(scope="session")
def quartic():
    return builtin("quartic")


@pytest.fixture(scope="session")
def double_well():
    return builtin("double_well")


@pytest.fixture(scope="session")
def tilted():
    return builtin("tilted_double_well", 0.1)


@functools.lru_cache(maxsize=None)
def domain_for(name, window, hbar):
    model = builtin("tilted_double_well", 0.1) if name == "tilted" else builtin(name)
    return auto_domain(model, window, hbar)
