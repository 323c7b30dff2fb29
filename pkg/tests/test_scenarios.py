import numpy as np
import pytest
from numpy.testing import assert_allclose

from scenarios import flux_trichotomy, gram_positivity
from utils.kernels import check_mollifier_hypothesis, phi_m

N_GEOMETRIES = 12


def test_random_geometries_leave_the_time_zero_slice(rng, scenario_factory):
    scenario = scenario_factory("flux_trichotomy")
    g = flux_trichotomy.validate(scenario)
    params = g.terms[0][1].param_dict
    q = float(scenario.geometry["q"])
    times = []
    for _ in range(N_GEOMETRIES):
        m = flux_trichotomy.random_geometry(rng, scenario, params)
        assert m is not None
        check_mollifier_hypothesis(m, params)
        times += [m.c1.x0, m.c2.x0]
        assert_allclose(abs(phi_m(m, g, route="lemma").value), abs(q), atol=1e-8)
    assert np.max(np.abs(times)) > 0.05


@pytest.mark.parametrize("fields, expected", [(True, True), (False, False)])
def test_gram_words_draw_generic_fields(scenario_factory, fields, expected):
    scenario = scenario_factory("gram_positivity", n_words=12, loops=0, fields=fields)
    pool, _ = gram_positivity.validate(scenario)
    words = gram_positivity.gram_words(scenario, pool)
    assert len(words) == 12
    assert any("delta" in w.text for w in words) is expected
