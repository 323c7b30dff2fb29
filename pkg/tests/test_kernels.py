import numpy as np
import pytest
from numpy.testing import assert_allclose

from utils.config import GeometryError, QuadratureError, TestFunctionError
from utils.geometry import FourVector
from utils.kernels import (KirchhoffWave, QuadratureConfig, _atoms, _direct_kernel, _momentum_integral,
                           check_mollifier_hypothesis, kirchhoff_wave, lattice_pairing, mass_shell_restriction,
                           pairing, phi_m, smeared_kernel, wightman, wightman_scalar)
from utils.profiles import PlateauProfile, RadialBump
from utils.testfun import (METRIC, ZERO_SCALAR, PairDensity, flux_probe, gradient, scalar_bump, time_field,
                           vector_field)

INSIDE = FourVector(0.0, (0.3, 0.0, 0.0))
OUTSIDE = FourVector(0.0, (5.0, 0.0, 0.0))
PROBE_PARAMS = {"c": FourVector(0.0), "r": 1.0, "eps": 0.05}


@pytest.mark.parametrize("c1, c2, expected", [
    (FourVector(0.0), OUTSIDE, 2.0),
    (OUTSIDE, FourVector(0.0), -2.0),
    (FourVector(0.0), INSIDE, 0.0),
    (OUTSIDE, FourVector(0.0, (0.0, 6.0, 0.0)), 0.0),
])
def test_flux_trichotomy_by_kirchhoff(probe, mollifier, c1, c2, expected):
    m = PairDensity(2.0, c1, c2, mollifier)
    res = phi_m(m, probe, route="lemma")
    assert res.method == "kirchhoff"
    assert_allclose(res.value, expected, atol=1e-8)


def test_explicit_time_profile_keeps_the_flux(probe, pair):
    assert_allclose(phi_m(pair, probe, route="lemma", tau_explicit=True).value, 2.0, atol=1e-8)


def test_flux_is_linear_in_the_probe(probe, pair):
    doubled = probe.scaled(-3.0)
    assert_allclose(phi_m(pair, doubled, route="lemma").value, -6.0, atol=1e-8)


def test_lemma_route_needs_flux_probe(pair):
    g = gradient(scalar_bump(FourVector(0.0), 0.5))
    with pytest.raises(TestFunctionError):
        phi_m(pair, g, route="lemma")
    with pytest.raises(TestFunctionError):
        phi_m(pair, g, route="sideways")


def test_mollifier_hypothesis_rejects_endpoint_in_ramp(mollifier):
    m = PairDensity(1.0, FourVector(0.0, (1.0, 0.0, 0.0)), OUTSIDE, mollifier)
    with pytest.raises(GeometryError):
        check_mollifier_hypothesis(m, PROBE_PARAMS)
    wide = PairDensity(1.0, FourVector(0.0, (0.8, 0.0, 0.0)), OUTSIDE, type(mollifier)(0.1, 6))
    with pytest.raises(GeometryError):
        check_mollifier_hypothesis(wide, PROBE_PARAMS)


def test_kirchhoff_wave_inside_and_outside():
    wave = kirchhoff_wave(PlateauProfile(1.0, 0.05, 6), FourVector(0.0))
    assert_allclose(wave.radial(0.3, 0.2), 1.0, atol=1e-12)
    assert_allclose(wave.radial(-0.4, 0.1), 1.0, atol=1e-12)
    assert_allclose(wave.radial(0.5, 0.0), 1.0, atol=1e-12)
    assert_allclose(wave.radial(0.3, 2.0), 0.0, atol=1e-12)
    assert_allclose(wave(0.0, np.array([[0.5, 0.5, 0.0]])), 1.0)


def test_kirchhoff_wave_needs_plateau():
    with pytest.raises(TestFunctionError):
        kirchhoff_wave(RadialBump(0.5), FourVector(0.0))
    assert isinstance(kirchhoff_wave(PlateauProfile(1.0, 0.1), (0, 0, 0, 0)), KirchhoffWave)


def test_flux_pairings_vanish_on_shell(probe):
    other = flux_probe(FourVector(0.0, (0.4, 0.0, 0.0)), 1.0, 0.05, 6)[1]
    res = wightman(probe, other)
    assert res.value == 0j
    assert pairing(other, probe, "pauli_jordan").value == 0.0


def test_pauli_jordan_is_antisymmetric(probe, pair):
    forward = pairing(pair, probe, "pauli_jordan")
    backward = pairing(probe, pair, "pauli_jordan")
    assert_allclose(forward.value, -backward.value, atol=1e-12)


def test_scalar_two_point_is_hermitian():
    s = scalar_bump(FourVector(0.0), 0.5, 0.5, 6)
    t = scalar_bump(FourVector(0.2, (1.5, 0.0, 0.0)), 0.5, 0.5, 6)
    st, ts = wightman_scalar(s, t), wightman_scalar(t, s)
    assert_allclose(st.value, np.conj(ts.value), rtol=1e-5, atol=1e-10)
    ss = wightman_scalar(s, s)
    assert ss.value.real > 0.0
    assert abs(ss.value.imag) <= 1e-8 * ss.value.real


def test_field_vanishes_in_causal_shadow(pair):
    x = FourVector(0.0, (2.5, 3.0, 0.0))
    field, F, _ = mass_shell_restriction(pair, x, route="kirchhoff")
    assert np.max(np.abs(field)) <= 1e-10
    assert np.max(np.abs(F)) <= 1e-10


def test_unknown_field_route(pair):
    with pytest.raises(TestFunctionError):
        mass_shell_restriction(pair, FourVector(0.0), route="lattice")


def test_quadrature_config_validation():
    with pytest.raises(QuadratureError):
        QuadratureConfig(cutoff=-1.0)
    with pytest.raises(QuadratureError):
        QuadratureConfig(rtol=2.0)
    cfg = QuadratureConfig().with_overrides(cutoff=None, radial_points=20)
    assert cfg.cutoff is None and cfg.radial_points == 20


@pytest.mark.slow
def test_angular_route_matches_radial_route(cfg):
    u = time_field(scalar_bump(FourVector(0.0), 0.5, 0.5, 6))
    v = time_field(scalar_bump(FourVector(0.1, (0.3, 0.0, 0.0)), 0.5, 0.5, 6))
    radial = pairing(u, v, "wightman", cfg)
    angular = pairing(u, v, "wightman", cfg, route="angular")
    assert angular.method == radial.method == "momentum"
    assert_allclose(angular.value, radial.value, rtol=1e-3)


def _component_field(s, mu):
    return vector_field([s if nu == mu else ZERO_SCALAR for nu in range(4)])


@pytest.mark.parametrize("mu", range(4))
def test_single_component_pairing_carries_one_metric_sign(cfg, mu):
    s = scalar_bump(FourVector(0.0), 0.5, 0.5, 6)
    t = scalar_bump(FourVector(0.1, (0.3, 0.0, 0.0)), 0.5, 0.5, 6)
    vector = wightman(_component_field(s, mu), _component_field(t, mu), cfg)
    assert_allclose(vector.value, METRIC[mu] * wightman_scalar(s, t, cfg).value, rtol=1e-8)


@pytest.mark.slow
@pytest.mark.parametrize("mu", range(4))
def test_angular_route_matches_radial_route_per_component(cfg, mu):
    u = _component_field(scalar_bump(FourVector(0.0), 0.5, 0.5, 6), mu)
    v = _component_field(scalar_bump(FourVector(0.1, (0.3, 0.0, 0.0)), 0.5, 0.5, 6), mu)
    radial = pairing(u, v, "wightman", cfg)
    angular = pairing(u, v, "wightman", cfg, route="angular")
    assert_allclose(angular.value, radial.value, rtol=1e-3)
    assert np.sign(radial.value.real) == METRIC[mu]


def test_divergence_free_fields_have_nonpositive_norm(cfg, generic_fields):
    for u in generic_fields:
        w = wightman(u, u, cfg)
        assert w.value.real < 0.0
        assert abs(w.value.imag) <= 1e-6 * abs(w.value.real)
    cross = wightman(generic_fields[0], generic_fields[1], cfg)
    back = wightman(generic_fields[1], generic_fields[0], cfg)
    assert_allclose(cross.value, np.conj(back.value), rtol=1e-5, atol=1e-10)


def test_smeared_kernel_far_from_the_cone_is_the_massless_kernel(cfg, mollifier):
    xi = np.array([[1.0, 20.0, 0.0, 0.0], [0.0, 0.0, 12.0, 5.0]])
    values, errors = smeared_kernel(mollifier, mollifier, xi, cfg)
    interval = xi[:, 0] ** 2 - np.sum(xi[:, 1:] ** 2, axis=1)
    assert_allclose(values, -1.0 / (4.0 * np.pi ** 2 * interval), rtol=1e-5)
    assert np.all(errors <= 1e-10)


@pytest.mark.slow
def test_smeared_kernel_branches_agree_with_the_shell_integral(cfg, wide_mollifier):
    xi = np.array([[0.5, 3.0, 0.0, 0.0], [1.0, 0.0, 1.5, 0.0], [0.3, 0.2, 0.0, 0.0]])
    values, _ = smeared_kernel(wide_mollifier, wide_mollifier, xi, cfg)
    rho = np.linalg.norm(xi[:, 1:], axis=1)
    direct, _ = _direct_kernel(wide_mollifier, wide_mollifier, xi[:, 0], rho, 40.0, cfg)
    assert_allclose(values, direct, rtol=1e-4, atol=1e-8)


@pytest.mark.slow
@pytest.mark.parametrize("c1, c2", [
    (FourVector(0.0, (0.0, 1.5, 0.0)), FourVector(0.0, (1.5, 1.5, 0.0))),
    (FourVector(0.3, (0.5, 1.0, 0.0)), FourVector(0.3, (1.0, 2.0, 0.5))),
])
def test_position_route_matches_momentum_atoms(cfg, wide_mollifier, c1, c2):
    m = PairDensity(1.0, FourVector(0.0), FourVector(0.0, (1.5, 0.0, 0.0)), wide_mollifier)
    n = PairDensity(1.0, c1, c2, wide_mollifier)
    position = wightman(m, n, cfg)
    momentum = _momentum_integral(_atoms(m, cfg), _atoms(n, cfg, lower=True), cfg)
    assert position.method == "position"
    assert_allclose(position.value, momentum.value, rtol=1e-3, atol=1e-6)


def test_orthogonal_pairs_pair_to_zero(wide_mollifier):
    m = PairDensity(1.0, FourVector(0.0), FourVector(0.0, (1.5, 0.0, 0.0)), wide_mollifier)
    n = PairDensity(1.0, FourVector(0.0, (0.0, 2.0, 0.0)), FourVector(0.0, (0.0, 3.0, 0.0)), wide_mollifier)
    res = wightman(m, n)
    assert res.value == 0j
    assert res.method == "position"


@pytest.mark.slow
def test_lattice_sum_matches_radial_pairing(cfg):
    u = time_field(scalar_bump(FourVector(0.0), 1.0, 1.0, 6))
    v = time_field(scalar_bump(FourVector(0.0, (1.5, 0.0, 0.0)), 1.0, 1.0, 6))
    lattice = lattice_pairing(u, v, box=30.0, cutoff=24.0)
    radial = wightman(u, v, cfg)
    assert lattice.method == "lattice"
    assert_allclose(lattice.value, radial.value, rtol=1e-2)


def test_momentum_field_vanishes_in_causal_shadow(pair):
    field, F, err = mass_shell_restriction(pair, FourVector(0.0, (2.5, 3.0, 0.0)), route="momentum")
    assert np.all(field == 0.0)
    assert np.all(F == 0.0)
    assert err == 0.0


@pytest.mark.slow
def test_momentum_field_matches_kirchhoff(pair):
    x = FourVector(0.5, (2.5, 0.3, 0.0))
    field, F, _ = mass_shell_restriction(pair, x, route="momentum")
    ref_field, ref_F, _ = mass_shell_restriction(pair, x, route="kirchhoff")
    assert_allclose(field, ref_field, atol=1e-3 * np.max(np.abs(ref_field)) + 1e-8)
    assert_allclose(F, ref_F, atol=1e-3 * np.max(np.abs(ref_F)) + 1e-6)
