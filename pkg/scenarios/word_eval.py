"""
Word evaluation: normal form, ω-state and vacuum functional of a word given
in text form, plus rewriting soundness over seeded random words.
"""
import logging

import pandas as pd

from scenarios.common import progress, quadrature_config, random_word, rng_for, validated, word_pool
from utils.algebra import abelianize, adjoint, is_gauge_invariant, normal_form, omega_state
from utils.config import ScenarioError
from utils.data_handling import Report, input_hash
from utils.gupta_bleuler import expectation
from utils.word_syntax import parse_word

logger = logging.getLogger(__name__)


def soundness_counts(rng, pool, n, max_len=6):
    """
    Failure counts of the rewriting laws over n random words

    Returns:
        dict with keys idempotence, adjoint, product_adjoint, abelian,
        omega_norm, omega_orthogonal, text
    """
    counts = dict.fromkeys(("idempotence", "adjoint", "product_adjoint", "abelian", "omega_norm",
                            "omega_orthogonal", "text"), 0)
    for _ in progress(range(n), "words"):
        w1, w2 = random_word(rng, pool, max_len), random_word(rng, pool, max_len)
        nf = normal_form(w1)
        if not normal_form(nf).equivalent(nf):
            counts["idempotence"] += 1
        if not adjoint(adjoint(w1)).equivalent(nf):
            counts["adjoint"] += 1
        if not adjoint(w1 * w2).equivalent(adjoint(w2) * adjoint(w1)):
            counts["product_adjoint"] += 1
        if not abelianize(nf).equivalent(abelianize(w1)):
            counts["abelian"] += 1
        if omega_state(adjoint(w1).concat(w1)) != 1.0:
            counts["omega_norm"] += 1
        nf2 = normal_form(w2)
        if len(nf.factors) != len(nf2.factors) or not all(
                type(a) is type(b) and a.equivalent(b) for a, b in zip(nf.factors, nf2.factors)):
            if omega_state(adjoint(w1).concat(w2)) != 0.0:
                counts["omega_orthogonal"] += 1
        if not parse_word(nf.text).equivalent(nf):
            counts["text"] += 1
    return counts


def validate(scenario):
    text = str(scenario.param("word", "identity"))
    word = parse_word(text)
    pool = validated(lambda: word_pool(scenario), "word pool")
    if "expected_re" in scenario.params or "expected_im" in scenario.params:
        try:
            complex(float(scenario.param("expected_re", 0.0)), float(scenario.param("expected_im", 0.0)))
        except (TypeError, ValueError) as e:
            raise ScenarioError(f"invalid expected value: {e}") from e
    return text, word, pool


def run(scenario):
    """
    Rows for the given word (vacuum functional when ψ-free, ω-state, gauge
    invariance, text round trip) and, for params.n_random > 0, the failure
    counts of the rewriting laws.
    """
    text, word, pool = validate(scenario)
    cfg = quadrature_config(scenario)
    report = Report.for_scenario(scenario)
    report.add_input("word", text)
    nf = normal_form(word)
    report.add_table("normal_form", pd.DataFrame([{"input_hash": input_hash(text), "normal_form": nf.text}]))

    expected = None
    if "expected_re" in scenario.params or "expected_im" in scenario.params:
        expected = complex(float(scenario.param("expected_re", 0.0)), float(scenario.param("expected_im", 0.0)))
    elif not nf.factors and nf.phase.is_zero:
        expected = 1.0
    if nf.psi_factors:
        logger.info("word carries matter factors; vacuum functional skipped")
    else:
        value, err = expectation(nf, cfg)
        report.add("vacuum", value, err, expected)
    report.add("omega", omega_state(nf, cfg), 0.0, 1.0 if expected == 1.0 else None)
    report.add("gauge_invariant", 1.0 if is_gauge_invariant(nf) else 0.0)
    report.check("text_round_trip", parse_word(nf.text).equivalent(nf))

    n_random = int(scenario.param("n_random", 0))
    if n_random:
        counts = soundness_counts(rng_for(scenario), pool, n_random, int(scenario.param("max_len", 6)))
        for law, count in sorted(counts.items()):
            report.add(f"failures[{law}]", count, 0.0, 0.0, 0.5)
    return report
