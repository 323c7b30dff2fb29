"""
Outer-automorphism witness

The charge unitary V(1, δdh_c) is trivial in the vacuum, yet β_m shifts its
phase by q. The representation implements β_m by conjugation with e^{iA(m)},
and β_m commutes with rotations and translations up to moving m.
"""
import logging

import numpy as np

from scenarios.common import (pair, probe, progress, quadrature_config, random_invariant_word, rng_for,
                              validated, word_pool)
from utils.algebra import OperatorWord, VGenerator, alpha_p, beta_m
from utils.data_handling import Report
from utils.geometry import rotation, translation
from utils.gupta_bleuler import clustering_gap, implementation_consistency, vacuum_expectation

logger = logging.getLogger(__name__)


def validate(scenario):
    g = validated(lambda: probe(scenario), "flux probe")
    m = validated(lambda: pair(scenario), "pair density")
    pool = validated(lambda: word_pool(scenario), "word pool")
    return g, m, pool


def random_motion(rng, spread=3.0):
    """Rotation about a random axis followed by a random translation."""
    shift = np.concatenate([[rng.uniform(-spread, spread)], rng.uniform(-spread, spread, 3)])
    if rng.random() < 0.5:
        return translation(shift)
    return rotation(rng.normal(size=3), float(rng.uniform(0.0, 2.0 * np.pi)), shift)


def add_clustering(report, pool, scenario, cfg):
    """
    Rows clustering_gap[d] for V(1, δf) moved by d along x over
    params.cluster_distances, and clustering_trend, the largest increase of
    the gap from one distance to the next (<= 0).
    """
    distances = sorted(float(d) for d in scenario.param("cluster_distances", [5.0, 10.0, 20.0]))
    word = OperatorWord.of(VGenerator(1.0, pool.fields[0]))
    gaps = []
    for d in distances:
        gap = clustering_gap(word, translation((0.0, d, 0.0, 0.0)), cfg)
        report.add(f"clustering_gap[{d:g}]", gap)
        gaps.append(gap)
    trend = max((b - a for a, b in zip(gaps, gaps[1:])), default=0.0)
    report.add("clustering_trend", trend, 0.0, 0.0, float(scenario.param("cluster_tol", 1e-9)), relation="le")


def run(scenario):
    """
    Rows vacuum_defect, beta_phase (expected q), the largest
    representation/symbolic discrepancy over params.n_words words and the
    largest covariance gap over params.n_maps motions, followed by the
    clustering rows of a generic field word.
    """
    g, m, pool = validate(scenario)
    cfg = quadrature_config(scenario)
    report = Report.for_scenario(scenario)
    report.add_input("probe", g.text)
    report.add_input("pair", m.text)
    q = float(scenario.geometry["q"])
    charge = OperatorWord.of(VGenerator(1.0, g))

    value = vacuum_expectation(charge, cfg)
    report.add("vacuum_defect", 2.0 - 2.0 * value.real, 0.0, 0.0,
               float(scenario.param("defect_tol", 1e-6)), relation="le")

    shifted = beta_m(m, charge).phase.evaluate(cfg)
    report.add("beta_phase", shifted.theta, shifted.abs_error, q, scenario.tolerance * max(1.0, abs(q)))

    rng = rng_for(scenario)
    n_words = int(scenario.param("n_words", 20))
    loops = int(scenario.param("loops", 0))
    worst = 0.0
    for _ in progress(range(n_words), "implement"):
        w = random_invariant_word(rng, pool, max_len=3, loops=loops, fields=True)
        worst = max(worst, implementation_consistency(m, w, cfg).discrepancy)
    report.add("implementation_gap_max", worst, 0.0, 0.0, scenario.tolerance, relation="le")

    n_maps = int(scenario.param("n_maps", 20))
    gap = 0.0
    for _ in progress(range(n_maps), "covariance"):
        P = random_motion(rng)
        lhs = alpha_p(P, beta_m(m, charge)).phase.evaluate(cfg).theta
        rhs = beta_m(m.transformed(P), alpha_p(P, charge)).phase.evaluate(cfg).theta
        gap = max(gap, abs(lhs - rhs))
    report.add("covariance_gap_max", gap, 0.0, 0.0, float(scenario.param("covariance_tol", 1e-6)),
               relation="le")

    add_clustering(report, pool, scenario, cfg)
    logger.info("outer witness: beta phase %.6f for q=%g", shifted.theta, q)
    return report
