import numpy as np
import pytest

from sbstein import MM1Embedded, ProbVector, ReflectedSRW

SRW_PS = (0.6, 0.75, 0.9)
MM1_RHOS = (0.3, 0.5, 0.8)


def builtin_chains():
    return [ReflectedSRW(p) for p in SRW_PS] + [MM1Embedded(r) for r in MM1_RHOS]


@pytest.fixture
def srw():
    return ReflectedSRW(0.75)


@pytest.fixture
def mm1():
    return MM1Embedded(0.5)


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)


def geometric_window(success, n):
    k = np.arange(n)
    return success * (1 - success) ** k


def geom(success):
    return ProbVector.geometric(success)
