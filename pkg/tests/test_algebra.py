import pytest
from numpy.testing import assert_allclose

from utils.algebra import (IDENTITY_WORD, CentralMark, LabelSum, OperatorWord, PairFunctional, PhaseExpr, V,
                           VGenerator, W, WGenerator, abelianize, adjoint, alpha_p, beta_m, beta_phi, charge_balance,
                           dressed_pair_operator, gauge_gamma, gauge_phase, group_commutator,
                           is_gauge_invariant, multiply_and_normalize, normal_form, omega_state, phi_terms, psi)
from utils.config import GeometryError, TestFunctionError
from utils.geometry import FourVector, boost, rotation, translation
from utils.testfun import ChargeDensity, PairDensity, flux_probe, gradient, scalar_bump

N_WORDS = 60


def test_normal_form_is_idempotent(random_words):
    for w in random_words(N_WORDS):
        once = normal_form(w)
        assert normal_form(once).equivalent(once), w.text


def test_adjoint_is_an_involution(random_words):
    for w in random_words(N_WORDS):
        assert adjoint(adjoint(w)).equivalent(normal_form(w)), w.text


def test_adjoint_reverses_products(random_words):
    words = random_words(2 * N_WORDS)
    for w1, w2 in zip(words[::2], words[1::2]):
        assert adjoint(w1 * w2).equivalent(adjoint(w2) * adjoint(w1))


def test_normal_form_keeps_abelian_image(random_words):
    for w in random_words(N_WORDS):
        assert abelianize(normal_form(w)).equivalent(abelianize(w))


def test_omega_is_normalised(random_words):
    for w in random_words(N_WORDS):
        assert omega_state(adjoint(w).concat(w)) == 1.0
    assert omega_state(IDENTITY_WORD) == 1.0


def test_omega_vanishes_off_the_identity(probe, pair):
    assert omega_state(V(1.0, probe)) == 0j
    assert omega_state(W(pair)) == 0j


def test_bridges_move_right_of_weyl_operators(probe, pair):
    nf = normal_form(W(pair).concat(V(0.5, probe)))
    assert [type(f) for f in nf.factors] == [VGenerator, WGenerator]
    assert nf.phase.equivalent(PhaseExpr.of_terms(phi_terms(LabelSum.of(pair), probe, 0.5)))


def test_equal_letters_merge(probe, pair):
    nf = normal_form(V(1.0, probe).concat(V(2.0, probe)).concat(W(pair)).concat(W(pair)))
    assert nf.factors[0].equivalent(VGenerator(3.0, probe))
    assert nf.factors[1].equivalent(WGenerator(LabelSum.of(pair).scaled(2.0)))


def test_spacelike_weyl_operators_commute(probe):
    far = flux_probe(FourVector(0.0, (5.0, 0.0, 0.0)), 1.0, 0.05, 6)[1]
    assert group_commutator(V(1.0, probe), V(2.0, far)).is_identity


def test_commutator_with_bridge_is_a_phase(probe, pair):
    comm = group_commutator(V(1.0, probe), W(pair))
    assert not comm.factors
    assert comm.phase.equivalent(PhaseExpr.of_terms(phi_terms(LabelSum.of(pair), probe, -1.0)))


def test_central_marks_cancel_against_inverses(probe):
    far = flux_probe(FourVector(0.0, (5.0, 0.0, 0.0)), 1.0, 0.05, 6)[1]
    mark = CentralMark(VGenerator(1.0, probe), VGenerator(1.0, far))
    w = OperatorWord.of(mark).concat(V(2.0, probe)).concat(OperatorWord.of(mark.inverse()))
    nf = normal_form(w)
    assert len(nf.factors) == 1 and nf.factors[0].equivalent(VGenerator(2.0, probe))
    assert abelianize(OperatorWord.of(mark)).equivalent(abelianize(IDENTITY_WORD))


def test_weyl_operator_needs_divergence_free_label():
    with pytest.raises(TestFunctionError):
        VGenerator(1.0, gradient(scalar_bump(FourVector(0.0), 0.5)))


def test_beta_m_is_additive(probe, pair, mollifier):
    other = PairDensity(-1.0, FourVector(0.0, (0.3, 0.0, 0.0)), FourVector(0.0, (0.0, 4.0, 0.0)), mollifier)
    w = V(1.5, probe).concat(W(pair))
    both = beta_m(LabelSum.of(pair) + LabelSum.of(other), w)
    stepwise = beta_m(other, beta_m(pair, w))
    assert both.equivalent(stepwise)
    assert beta_m(pair, W(other)).equivalent(W(other))


def test_pair_functional_scales_with_its_label(probe, pair):
    w = V(1.0, probe).concat(V(-0.5, probe))
    doubled = beta_phi(PairFunctional(LabelSum.of(pair).scaled(2.0)), w)
    assert doubled.equivalent(beta_m(pair, beta_m(pair, w)))
    assert beta_phi(PairFunctional(LabelSum.of(pair)), W(pair)).equivalent(W(pair))


def test_dressed_bridge_is_gauge_invariant(pair, mollifier):
    dressed = dressed_pair_operator(pair.q, pair.c1, pair.c2, mollifier)
    assert is_gauge_invariant(dressed)
    assert charge_balance(dressed).is_zero
    s = scalar_bump(FourVector(0.0, (0.5, 0.2, 0.0)), 1.0, 2.0)
    assert gauge_phase(s, dressed).is_zero
    assert gauge_gamma(s, dressed).equivalent(dressed)


def test_bare_bridge_has_a_witness(pair):
    audit = is_gauge_invariant(W(pair), min_phase=1e-3)
    assert not audit
    assert abs(audit.witness_phase) >= 1e-3
    assert_allclose(gauge_phase(audit.witness, W(pair)).evaluate().theta, audit.witness_phase)


def test_bridge_loop_is_gauge_invariant(pool):
    assert is_gauge_invariant(pool.loop)
    assert not is_gauge_invariant(psi(pool.charges[0]))


def test_gauge_gamma_needs_scalar(probe, pair):
    with pytest.raises(TestFunctionError):
        gauge_gamma(probe, W(pair))


def test_alpha_moves_labels(pair, mollifier):
    P = translation((0.0, 1.0, 0.0, 0.0))
    moved = alpha_p(P, W(pair))
    assert moved.equivalent(W(pair.transformed(P)))
    turned = alpha_p(rotation((0.0, 0.0, 1.0), 0.5), psi(ChargeDensity(1.0, FourVector(0.0), mollifier)))
    assert turned.equivalent(psi(ChargeDensity(1.0, FourVector(0.0), mollifier)))


def test_alpha_rejects_boosted_bridges(pair, probe):
    with pytest.raises(GeometryError):
        alpha_p(boost(0.3), W(pair))
    assert len(alpha_p(boost(0.3), V(1.0, probe)).factors) == 1


def test_multiply_and_normalize_merges_letters(probe, pair):
    product = multiply_and_normalize(V(1.0, probe).concat(W(pair)), W(pair.scaled(-1.0)))
    assert product.equivalent(normal_form(V(1.0, probe)))
