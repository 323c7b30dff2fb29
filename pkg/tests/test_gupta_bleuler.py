import numpy as np
import pytest
from numpy.testing import assert_allclose

from utils.algebra import V, W, dressed_pair_operator, is_gauge_invariant, normal_form, psi
from utils.config import GaugeInvarianceError, RepresentationError, TestFunctionError
from utils.geometry import IDENTITY, FourVector, translation
from utils.gupta_bleuler import (clustering_gap, cocycle_word, correlation, expectation, gb_condition_check, gram_psd,
                                 implementation_consistency, represent, strip_matter, vacuum_expectation,
                                 vacuum_functional)
from utils.testfun import ChargeDensity, flux_probe, gradient, scalar_bump, time_field


@pytest.fixture
def probes():
    offsets = [(0.0, 0.0, 0.0), (0.4, 0.0, 0.0), (0.0, 0.3, 0.0)]
    return [flux_probe(FourVector(0.0, off), 1.0, 0.05, 6)[1] for off in offsets]


def test_matter_has_no_representation(mollifier):
    with pytest.raises(RepresentationError):
        represent(psi(ChargeDensity(1.0, FourVector(0.0), mollifier)))


def test_flux_probe_exponential_has_unit_expectation(probe):
    value, err = expectation(V(1.0, probe))
    assert value == 1.0
    assert err == 0.0
    assert vacuum_functional(probe.scaled(3.0)) == 1.0


def test_representation_folds_fields(probes):
    w = V(1.0, probes[0]).concat(V(-2.0, probes[1])).concat(V(0.5, probes[0]))
    rep = represent(w)
    assert {c for c, _ in rep.fields.terms} == {1.5, -2.0}
    assert rep.densities.is_zero


def test_vacuum_functional_exceeds_one_off_the_gauge_invariant_fields():
    u = time_field(scalar_bump(FourVector(0.0), 1.0, 1.0, 6, coeff=10.0))
    assert vacuum_functional(u).real > 1.001


def test_gram_of_flux_words_is_positive(probes):
    words = [V(a, g) for g in probes for a in (1.0, -0.5)]
    words.append(V(1.0, probes[0]).concat(V(1.0, probes[2])))
    result = gram_psd(words, tolerance=1e-8, workers=2)
    assert result.matrix.shape == (len(words), len(words))
    assert_allclose(result.matrix, np.ones_like(result.matrix), atol=1e-12)
    assert result.is_psd


def test_gram_rejects_bare_bridges(probe, pair):
    with pytest.raises(GaugeInvarianceError) as info:
        gram_psd([V(1.0, probe), W(pair)])
    assert info.value.witness is not None


def test_strip_matter_keeps_bridges(pair, mollifier):
    dressed = dressed_pair_operator(pair.q, pair.c1, pair.c2, mollifier)
    assert normal_form(strip_matter(dressed)).equivalent(W(pair))


def test_gupta_bleuler_condition_needs_divergence_free_fields(probe):
    s = scalar_bump(FourVector(0.0, (3.0, 0.0, 0.0)), 0.5)
    with pytest.raises(TestFunctionError):
        gb_condition_check(gradient(s), probe, s)
    assert gb_condition_check(probe, probe, scalar_bump(FourVector(0.0), 0.5).scaled(0.0)) == 0.0


@pytest.mark.slow
def test_gupta_bleuler_condition_holds_for_flux_fields(probes):
    s = scalar_bump(FourVector(0.0, (0.5, 0.0, 0.0)), 0.5, 0.5, 6)
    assert gb_condition_check(probes[0], probes[1], s) <= 1e-8


def test_clustering_of_flux_words(probe):
    assert clustering_gap(V(1.0, probe), translation((0.0, 10.0, 0.0, 0.0))) == 0.0


def test_trivial_cocycle(pair):
    assert normal_form(cocycle_word(pair, IDENTITY)).is_identity


@pytest.mark.slow
def test_bridge_conjugation_matches_beta_m(probe, pair):
    check = implementation_consistency(pair, V(1.0, probe))
    assert check.discrepancy <= 1e-6
    assert abs(check.lhs) == pytest.approx(1.0)
    assert_allclose(vacuum_expectation(V(1.0, probe)), 1.0)


def test_flux_correlation_along_translations(probe):
    for shift in (0.0, 0.5, 10.0):
        value = correlation(probe, probe, translation((0.0, shift, 0.0, 0.0)))
        assert_allclose(value, 1.0, atol=1e-12)


@pytest.mark.slow
def test_gram_of_generic_field_words_is_positive(cfg, generic_fields, probes):
    f0, f1 = generic_fields
    words = [V(1.0, f0), V(-0.7, f0), V(0.5, f1), V(1.0, f0).concat(V(1.0, f1)),
             V(1.0, probes[0]).concat(V(-1.0, f1)), V(2.0, probes[1])]
    result = gram_psd(words, cfg, tolerance=1e-8, workers=2)
    assert result.is_psd
    assert_allclose(np.diag(result.matrix), 1.0, atol=1e-6)
    assert np.max(np.abs(result.matrix)) <= 1.0 + 1e-6


def test_vacuum_expectation_of_generic_field_is_below_one(cfg, generic_fields):
    for u in generic_fields:
        value = vacuum_expectation(V(1.0, u), cfg)
        assert 0.0 < value.real < 1.0
        assert abs(value.imag) <= 1e-6


@pytest.mark.slow
def test_clustering_gap_decreases_with_distance(cfg, generic_fields):
    word = V(3.0, generic_fields[0])
    gaps = [clustering_gap(word, translation((0.0, d, 0.0, 0.0)), cfg) for d in (3.0, 6.0, 12.0)]
    assert gaps[0] > 0.0
    assert gaps[0] > gaps[1] > gaps[2]


def test_cocycle_is_not_gauge_invariant_once_the_charges_move(pair):
    audit = is_gauge_invariant(cocycle_word(pair, translation((0.0, 1.0, 0.0, 0.0))))
    assert not audit
    assert not audit.balance.is_zero
    assert audit.witness is not None
    assert abs(audit.witness_phase) >= 1e-3
    assert is_gauge_invariant(cocycle_word(pair, IDENTITY))
