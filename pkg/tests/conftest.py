import numpy as np
import pytest

from cobranet.dcm import Digraph, sample_dcm
from cobranet.degrees import DegreeProfile, DegreeSequence, build_sequence
from cobranet.experiments import preset_profile


def regular(n, d=6):
    return DegreeSequence(np.full(n, d), np.full(n, d))


def random_sequence(rng, n, lo=2, hi=6):
    d_plus = rng.integers(lo, hi + 1, n)
    d_minus = rng.multinomial(int(d_plus.sum()), np.full(n, 1.0 / n))
    return DegreeSequence(d_minus, d_plus)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(params=["red", "green", "blue"])
def fig3_sequence(request):
    return request.param, build_sequence(preset_profile(request.param, 10_000))


@pytest.fixture
def two_self_loops():
    return Digraph.from_out_adj([[0, 0]])


@pytest.fixture
def small_dcm(rng):
    return sample_dcm(random_sequence(rng, 50), rng)
