"""
Gupta-Bleuler positivity: the vacuum functional is positive on gauge-invariant
words but exceeds 1 on some exponentials of non-gauge-invariant fields.
"""
import logging

import pandas as pd

from scenarios.common import quadrature_config, random_invariant_word, rng_for, validated, vec, word_pool
from utils.data_handling import Report, input_hash
from utils.gupta_bleuler import gb_condition_check, gram_psd, vacuum_functional
from utils.testfun import scalar_bump, time_field

logger = logging.getLogger(__name__)


def gram_words(scenario, pool):
    """
    params.n_words random invariant words over flux and generic δf letters
    (params.fields); the last params.loops carry a bridge triangle.
    """
    rng = rng_for(scenario)
    n = int(scenario.param("n_words", 8))
    loops = int(scenario.param("loops", 1))
    fields = bool(scenario.param("fields", True))
    return [random_invariant_word(rng, pool, max_len=3, loops=1 if j >= n - loops else 0, fields=fields)
            for j in range(n)]


def indefinite_field(scenario):
    """u = s e_0 with a bump s; W(u, u) > 0, so ϖ(e^{iA(u)}) > 1."""
    geo = scenario.geometry
    width = float(scenario.param("bump_width", 1.0))
    amplitude = float(scenario.param("bump_amplitude", 10.0))
    return time_field(scalar_bump(vec(geo["c"]), width, width, int(geo["k"]), amplitude))


def validate(scenario):
    pool = validated(lambda: word_pool(scenario), "word pool")
    u = validated(lambda: indefinite_field(scenario), "indefinite field")
    return pool, u


def run(scenario):
    """
    Rows min_eigenvalue (>= -params.eig_tol), the vacuum functional on a
    non-gauge-invariant exponential (> 1 + 1e-3) and the smeared
    Gupta-Bleuler residual for two probes; the Gram matrix goes out as a table.
    """
    pool, u = validate(scenario)
    cfg = quadrature_config(scenario)
    report = Report.for_scenario(scenario)
    words = gram_words(scenario, pool)
    for k, w in enumerate(words):
        report.add_input(f"word{k}", w.text)

    eig_tol = float(scenario.param("eig_tol", 1e-8))
    result = gram_psd(words, cfg, eig_tol, scenario.workers)
    report.add("min_eigenvalue", result.min_eigenvalue, result.abs_error, 0.0, eig_tol, relation="ge")
    rows = []
    for j, w in enumerate(words):
        for k in range(len(words)):
            value = result.matrix[j, k]
            rows.append({"row": j, "col": k, "word_hash": input_hash(w.text),
                         "value_re": float(value.real), "value_im": float(value.imag)})
    report.add_table("gram", pd.DataFrame(rows))

    value = vacuum_functional(u, cfg)
    report.add_input("indefinite", u.text)
    report.add("vacuum_functional[non_invariant]", value, 0.0, 1.0 + 1e-3, 0.0, relation="ge")

    s = scalar_bump(vec(scenario.geometry["c"]), 1.0, 1.0, int(scenario.geometry["k"]))
    residual = gb_condition_check(pool.probes[0], pool.probes[1], s, cfg)
    report.add("gb_residual", residual, 0.0, 0.0, float(scenario.param("gb_tol", 1e-8)), relation="le")
    logger.info("gram minimum eigenvalue %.3e over %d words", result.min_eigenvalue, len(words))
    return report
