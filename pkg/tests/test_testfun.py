import numpy as np
import pytest
from numpy.testing import assert_allclose

from utils.config import GeometryError, TestFunctionError
from utils.geometry import FourVector, boost, translation
from utils.profiles import gauss_panels
from utils.testfun import (METRIC, TAG_DIVERGENCE_FREE, ChargeDensity, PairDensity, ScalarAtom, ScalarField,
                           build_test_function, convolve_at, curl, delta_two_form, divergence, flux_probe, ft_eval,
                           gradient, pair_density, scalar_bump, test_function_record, time_field)

ETA = np.array(METRIC)


def _shell_points(rng, n, r=1.0, eps=0.05):
    t = rng.uniform(-eps, eps, n)
    rho = rng.uniform(r, r + eps, n)
    dirs = rng.normal(size=(n, 3))
    dirs /= np.linalg.norm(dirs, axis=1)[:, None]
    return np.column_stack([t, rho[:, None] * dirs])


def test_flux_probe_is_divergence_free_pointwise(rng, probe):
    pts = _shell_points(rng, 200)
    div = divergence(probe, trust_tags=False).evaluate(pts)
    scale = np.max(np.abs(probe.evaluate(pts)))
    assert scale > 0.0
    assert np.max(np.abs(div)) <= 1e-9 * scale


def test_flux_probe_is_transverse_in_momentum(rng, probe):
    p = rng.normal(scale=5.0, size=(50, 4))
    g_hat = ft_eval(probe, p)
    contracted = np.sum(ETA * p * g_hat, axis=1)
    assert np.max(np.abs(contracted)) <= 1e-10 * np.max(np.abs(p)) * np.max(np.abs(g_hat))


def test_tagged_divergence_is_symbolic_zero(probe):
    assert divergence(probe).is_zero


def test_divergence_rejects_scalars():
    with pytest.raises(TestFunctionError):
        divergence(scalar_bump(FourVector(0.0), 0.5))


def test_gradient_divergence_is_wave_operator(rng):
    s = scalar_bump(FourVector(0.1, (0.2, 0.0, -0.1)), 0.6, 0.8, 6)
    box = divergence(gradient(s), trust_tags=False)
    assert not box.is_zero
    (coeff, atom), = s.terms
    lap = ScalarField.atom(ScalarAtom(atom.center, atom.time, atom.space, (0, 0, 0, 0), 1), coeff)
    expected = s.derivative(0).derivative(0) - lap
    pts = np.column_stack([rng.uniform(-0.4, 0.6, 100), rng.uniform(-0.5, 0.5, (100, 3))])
    assert_allclose(box.evaluate(pts), expected.evaluate(pts), rtol=1e-9,
                    atol=1e-9 * np.max(np.abs(expected.evaluate(pts))))


def test_flux_probe_needs_thin_shell():
    with pytest.raises(GeometryError):
        flux_probe(FourVector(0.0), 0.1, 0.05)


def test_flux_probe_support_is_an_annulus(probe):
    region = probe.support
    assert region.contains((0.0, 1.02, 0.0, 0.0))
    assert not region.contains((0.0, 0.5, 0.0, 0.0))
    assert not region.contains((0.2, 1.02, 0.0, 0.0))


def test_pair_density_needs_spacelike_endpoints(mollifier):
    with pytest.raises(GeometryError):
        PairDensity(1.0, FourVector(0.0), FourVector(3.0, (1.0, 0.0, 0.0)), mollifier)


def test_pair_density_divergence_in_momentum(rng, pair):
    p = rng.normal(scale=4.0, size=(40, 4))
    div_hat = ft_eval(pair.divergence, p)
    from_vector = -1j * np.sum(ETA * p * ft_eval(pair, p), axis=1)
    assert_allclose(from_vector, div_hat, rtol=1e-9, atol=1e-12)


def test_pair_density_value_on_segment(pair, mollifier):
    x = np.array([[0.0, 2.5, 0.0, 0.0]])
    length = float(np.linalg.norm(pair.d))
    nodes, weights = gauss_panels(mollifier.space._edges(), 12)
    line = 2.0 * np.sum(mollifier.space(nodes) * weights) / length
    expected = float(mollifier.time(0.0)) * line * pair.current
    assert_allclose(pair.evaluate(x)[0], expected, rtol=1e-6)
    assert_allclose(pair.evaluate(np.array([[0.0, 2.5, 1.0, 0.0]])), 0.0)


def test_pair_density_charge_orientation(pair):
    assert_allclose(pair.current, [0.0, 10.0, 0.0, 0.0])
    (c_plus, atom_plus), (c_minus, atom_minus) = sorted(pair.divergence.terms, key=lambda t: -t[0])
    assert c_plus == 2.0 and atom_plus.center == pair.c1
    assert c_minus == -2.0 and atom_minus.center == pair.c2


def test_pair_density_follows_translations_only(pair):
    moved = pair.transformed(translation((0.0, 1.0, 0.0, 0.0)))
    assert_allclose(moved.c2.as_array(), [0.0, 6.0, 0.0, 0.0])
    with pytest.raises(GeometryError):
        pair.transformed(boost(0.2))


def test_canonical_pair_keeps_the_current(mollifier):
    m = PairDensity(-1.5, FourVector(0.0, (3.0, 0.0, 0.0)), FourVector(0.0), mollifier)
    coeff, unit = m.canonical()
    assert_allclose(coeff * unit.current, m.current)


def test_convolution_routes_agree(mollifier):
    s = scalar_bump(FourVector(0.05, (0.3, -0.1, 0.0)), 0.5, 0.7, 6)
    c = FourVector(0.01, (0.1, 0.0, 0.05))
    assert_allclose(convolve_at(s, mollifier, c, "radial"), convolve_at(s, mollifier, c), rtol=1e-6)


def test_radial_convolution_rejects_derivatives(mollifier):
    s = scalar_bump(FourVector(0.0), 0.5).derivative(1)
    with pytest.raises(TestFunctionError):
        convolve_at(s, mollifier, FourVector(0.0), "radial")


def test_records_rebuild_labels(probe, pair, mollifier):
    charge = ChargeDensity(-1.0, FourVector(0.0, (1.0, 2.0, 3.0)), mollifier)
    for obj in (probe, pair, charge):
        rebuilt = build_test_function(test_function_record(obj))
        assert rebuilt == obj
    assert test_function_record(probe, "g")["name"] == "g"
    with pytest.raises(TestFunctionError):
        build_test_function({"kind": "fluxprobe", "r": 1.0})


def test_pair_density_accepts_a_radius(pair):
    m = pair_density(pair.q, pair.c1, pair.c2, pair.mollifier.a)
    assert m == pair
    assert_allclose(m.current, pair.current)


def test_codifferential_of_an_exterior_derivative(rng):
    h = time_field(scalar_bump(FourVector(0.0), 0.5, 0.5, 6))
    u = delta_two_form(curl(h))
    assert TAG_DIVERGENCE_FREE in u.tags
    assert u.provenance is not None
    pts = rng.uniform(-0.4, 0.4, (100, 4))
    scale = np.max(np.abs(u.evaluate(pts)))
    assert scale > 0.0
    assert np.max(np.abs(divergence(u, trust_tags=False).evaluate(pts))) <= 1e-9 * scale
    with pytest.raises(TestFunctionError):
        delta_two_form(h)


def test_pair_transform_at_zero_is_the_current(pair):
    assert_allclose(ft_eval(pair, np.zeros((1, 4)))[0], pair.current, atol=1e-12)
    assert_allclose(pair.current, 2.0 * (pair.c2.as_array() - pair.c1.as_array()))
    ends = np.stack([pair.c1.as_array(), pair.c2.as_array()])
    at_ends = pair.divergence.evaluate(ends)
    assert at_ends[0] > 0.0 > at_ends[1]
