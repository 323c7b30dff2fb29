import numpy as np
import pytest
from numpy.testing import assert_allclose

from utils.config import TestFunctionError
from utils.profiles import (BumpProfile, Mollifier, PlateauProfile, RadialBump, build_profile, first_moment,
                            gauss_panels, profile_record, spherical_mean)


@pytest.mark.parametrize("order", [2, 4, 6])
def test_bump_has_unit_mass(order):
    bump = BumpProfile(order, 0.3, 0.7)
    nodes, weights = gauss_panels(bump.knots, order + 2)
    assert_allclose(np.sum(bump(nodes) * weights), 1.0, rtol=1e-12)
    assert_allclose(bump.cdf(bump.support[1] + 1.0), 1.0)
    assert_allclose(abs(bump.fourier(0.0)), 1.0)


def test_bump_transform_matches_quadrature():
    bump = BumpProfile(6, 0.2, 0.5)
    edges = np.linspace(*bump.support, 25)
    nodes, weights = gauss_panels(edges, 16)
    for w in (0.5, 3.0, 17.0):
        direct = np.sum(bump(nodes) * np.exp(1j * w * nodes) * weights)
        assert_allclose(bump.fourier(w), direct, rtol=1e-10, atol=1e-14)


@pytest.mark.parametrize("profile", [PlateauProfile(1.0, 0.05, 6), PlateauProfile(0.5, 0.2, 4),
                                     RadialBump(0.3, 6)])
def test_radial_transform_closed_form(profile):
    k = np.array([0.01, 0.7, 3.0, 11.0, 40.0])
    assert_allclose(profile.fourier(k), profile.fourier_quadrature(k), rtol=1e-6,
                    atol=1e-9 * abs(profile.fourier(0.0)))


def test_mollifier_is_normalised():
    moll = Mollifier(0.02, 6)
    assert_allclose(moll.fourier(np.zeros(4)), 1.0, rtol=1e-10)
    assert moll((0.0, 0.0, 0.0, 0.0)) > 0.0
    assert moll((0.03, 0.0, 0.0, 0.0)) == 0.0


def test_plateau_values():
    chi = PlateauProfile(1.0, 0.1, 6)
    assert_allclose(chi(np.array([0.0, 0.5, 1.0])), 1.0)
    assert_allclose(chi(np.array([1.1, 2.0])), 0.0)
    mid = float(chi(1.05))
    assert 0.0 < mid < 1.0


def test_spherical_mean_inside_and_outside_plateau():
    chi = PlateauProfile(1.0, 0.05, 6)
    assert_allclose(spherical_mean(chi, 0.3, 0.4), 1.0, atol=1e-12)
    assert_allclose(spherical_mean(chi, 3.0, 0.5), 0.0, atol=1e-12)
    assert_allclose(spherical_mean(chi, 0.0, 0.5), 1.0, atol=1e-12)


def test_first_moment_matches_quadrature():
    bump = RadialBump(0.5, 6)
    nodes, weights = gauss_panels(np.array([0.0, 1.0 / 6.0, 0.3]), 12)
    direct = np.sum(nodes * bump(nodes) * weights)
    assert_allclose(first_moment(bump, 0.3), direct, rtol=1e-10)


@pytest.mark.parametrize("kwargs", [dict(order=1), dict(width=-1.0)])
def test_bump_rejects_bad_parameters(kwargs):
    with pytest.raises(TestFunctionError):
        BumpProfile(**kwargs)


def test_profile_records():
    for profile in (BumpProfile(4, 0.1, 0.2), PlateauProfile(1.0, 0.05, 6), RadialBump(0.3, 4),
                    Mollifier(0.02, 6)):
        assert build_profile(profile_record(profile)) == profile
    with pytest.raises(TestFunctionError):
        build_profile({"kind": "spline"})
