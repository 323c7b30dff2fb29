import numpy as np
import pytest

from scenarios.common import generic_field, random_word, word_pool
from utils.data_handling import scenario_from_dict
from utils.geometry import FourVector
from utils.kernels import QuadratureConfig
from utils.profiles import Mollifier
from utils.testfun import PairDensity, flux_probe

ORIGIN = FourVector(0.0)
FAR = FourVector(0.0, (5.0, 0.0, 0.0))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def cfg():
    return QuadratureConfig()


@pytest.fixture
def mollifier():
    return Mollifier(0.02, 6)


@pytest.fixture
def probe():
    """Flux probe about the origin with r = 1, eps = 0.05."""
    return flux_probe(ORIGIN, 1.0, 0.05, 6)[1]


@pytest.fixture
def pair(mollifier):
    """q = 2 from the probe centre out to spatial distance 5."""
    return PairDensity(2.0, ORIGIN, FAR, mollifier)


@pytest.fixture
def wide_mollifier():
    return Mollifier(0.25, 6)


@pytest.fixture
def generic_fields():
    """Two divergence-free fields δf with electric and magnetic components."""
    return [generic_field(FourVector(0.0), 0.6, 6), generic_field(FourVector(0.2, (0.8, 0.5, 0.0)), 0.6, 6)]


@pytest.fixture
def scenario_factory(tmp_path):
    def make(kind, **params):
        return scenario_from_dict({"kind": kind, "id": f"test_{kind}", "params": params},
                                  overrides={"out_dir": str(tmp_path)})
    return make


@pytest.fixture
def pool(scenario_factory):
    return word_pool(scenario_factory("word_eval"))


@pytest.fixture
def random_words(rng, pool):
    def draw(n, **kwargs):
        return [random_word(rng, pool, **kwargs) for _ in range(n)]
    return draw
