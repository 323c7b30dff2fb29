"""
Gauge audit: the dressed bridge is invariant under every gauge function, the
bare bridge is not, and the charge-balance criterion sorts constructed words.
"""
import logging

from scenarios.common import (mollifier, pair, progress, random_invariant_word, rng_for, validated, vec,
                              word_pool)
from utils.algebra import (LabelSum, OperatorWord, PsiGenerator, W, WGenerator, dressed_pair_operator,
                           gauge_gamma, gauge_phase, is_gauge_invariant)
from utils.data_handling import Report
from utils.geometry import FourVector
from utils.testfun import scalar_bump

logger = logging.getLogger(__name__)


def validate(scenario):
    geo = scenario.geometry
    q = float(geo["q"])
    dressed = validated(lambda: dressed_pair_operator(q, vec(geo["c1"]), vec(geo["c2"]), mollifier(scenario)),
                        "dressed pair")
    bare = validated(lambda: W(pair(scenario, q=float(scenario.param("q_bare", 1.0)))), "bare bridge")
    pool = validated(lambda: word_pool(scenario), "word pool")
    return dressed, bare, pool


def random_gauge_function(rng, centres, k, spread=1.0):
    """Bump gauge function centred near one of ``centres``."""
    c = centres[int(rng.integers(len(centres)))]
    offset = FourVector(float(rng.uniform(-spread, spread)), tuple(rng.uniform(-spread, spread, 3)))
    width = float(rng.uniform(0.5, 2.0))
    return scalar_bump(c + offset, width, width, k, float(rng.uniform(-3.0, 3.0)))


def criterion_words(rng, pool, n):
    """
    n words with known invariance: bridge triangles and dressed edges
    (invariant) alternate with the same words missing one letter (not).
    """
    out = []
    for j in range(n):
        if j % 4 < 2:
            word = random_invariant_word(rng, pool, max_len=3, loops=1)
            if j % 4 == 1:
                word = word.concat(OperatorWord.of(WGenerator(LabelSum.of(pool.edges[0]))))
        else:
            e = int(rng.integers(len(pool.edges)))
            m = pool.edges[e]
            left, right = pool.charges[e], pool.charges[(e + 1) % len(pool.charges)]
            letters = [PsiGenerator(LabelSum.of(left)), WGenerator(LabelSum.of(m)),
                       PsiGenerator(-LabelSum.of(right))]
            if j % 4 == 3:
                letters = letters[:-1]
            word = OperatorWord(factors=tuple(letters))
        out.append((word, j % 2 == 0))
    return out


def run(scenario):
    """
    Rows for the dressed and bare bridges, the witness phase, label-level and
    numeric invariance over params.n_random gauge functions and the number of
    misclassified constructed words out of params.n_criterion.
    """
    dressed, bare, pool = validate(scenario)
    report = Report.for_scenario(scenario)
    report.add_input("dressed", dressed.text)
    report.add_input("bare", bare.text)
    min_phase = float(scenario.param("min_phase", 1e-3))

    audit = is_gauge_invariant(dressed, min_phase)
    report.check("invariant[dressed]", audit.invariant)
    audit = is_gauge_invariant(bare, min_phase)
    report.check("invariant[bare]", audit.invariant, expected=False)
    report.add("witness_phase[bare]", abs(audit.witness_phase), 0.0, min_phase, 0.0, relation="ge")

    rng = rng_for(scenario)
    geo = scenario.geometry
    centres = [vec(geo["c1"]), vec(geo["c2"])]
    n_random = int(scenario.param("n_random", 50))
    label_failures, worst = 0, 0.0
    for _ in progress(range(n_random), "gauge"):
        s = random_gauge_function(rng, centres, int(geo["k"]))
        if not gauge_gamma(s, dressed).equivalent(dressed):
            label_failures += 1
        worst = max(worst, abs(gauge_phase(s, dressed).evaluate().theta))
    report.add("label_invariance_failures", label_failures, 0.0, 0.0, 0.5)
    report.add("numeric_phase_max[dressed]", worst, 0.0, 0.0, float(scenario.param("phase_tol", 1e-10)),
               relation="le")

    n_words = int(scenario.param("n_criterion", 20))
    mismatches = 0
    for word, expected in criterion_words(rng, pool, n_words):
        if bool(is_gauge_invariant(word, min_phase)) != expected:
            mismatches += 1
            logger.warning("criterion misclassified %s", word.text)
    report.add("criterion_mismatches", mismatches, 0.0, 0.0, 0.5)
    logger.info("gauge audit: %d label failures, %d mismatches", label_failures, mismatches)
    return report
