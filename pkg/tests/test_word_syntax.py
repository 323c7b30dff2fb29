import pytest

from utils.algebra import IDENTITY_WORD, V, W, dressed_pair_operator, normal_form
from utils.config import ScenarioError
from utils.geometry import FourVector
from utils.word_syntax import format_word, parse_densities, parse_phase, parse_vector_field, parse_word


def test_printed_normal_forms_parse_back(random_words):
    for w in random_words(40):
        nf = normal_form(w)
        parsed = parse_word(format_word(nf))
        assert parsed == nf
        assert parsed.text == nf.text


def test_phase_terms_parse_back(probe, pair, mollifier):
    nf = normal_form(W(pair).concat(V(0.5, probe)))
    assert nf.phase.terms
    assert parse_word(nf.text) == nf
    dressed = dressed_pair_operator(1.0, FourVector(0.0), FourVector(0.0, (2.0, 0.0, 0.0)), mollifier)
    assert parse_word(dressed.text) == dressed
    assert parse_phase(nf.phase.text) == nf.phase


def test_identity_and_turns():
    assert parse_word("identity") == IDENTITY_WORD
    w = parse_word("exp(1/4*turn + 0.5*rad)")
    assert not w.factors
    assert w.phase.text == "1/4*turn + 0.5*rad"


def test_short_label_forms(probe, pair):
    w = parse_word("V(1, fluxprobe(c=0 0 0 0, r=1, eps=0.05)) * W(pair(q=2, c1=0 0 0 0, c2=0 5 0 0, moll=0.02))")
    assert w.factors[0].g == probe
    assert w == V(1.0, probe).concat(W(pair))
    assert parse_vector_field("2*fluxprobe(c=0 0 0 0, r=1, eps=0.05, k=6)") == probe.scaled(2.0)
    assert parse_densities("pair(q=2, c1=0 0 0 0, c2=0 5 0 0, moll=0.02, k=6)").terms[0][0] == 2.0


@pytest.mark.parametrize("text", [
    "V(1.0, ",
    "W(bogus(q=1))",
    "identity trailing",
    "V(1, fluxprobe(c=0 0 0 0, r=0.05, eps=0.05))",
    "W(pair(q=1, c1=0 0 0 0, c2=3 1 0 0, moll=0.02))",
    "V(1, gradient(1.0*atom(c=0 0 0 0, t=bump(k=6, c=0.0, w=0.5), s=rbump(a=0.5, k=6), d=0 0 0 0, lap=0)))",
    "exp(0.5*turn)",
])
def test_malformed_words_raise_scenario_error(text):
    with pytest.raises(ScenarioError):
        parse_word(text)
