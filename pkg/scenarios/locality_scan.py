"""
Locality scan: the commutator function vanishes between spacelike probes and
is antisymmetric; optionally the shell integral is compared with the lattice
mode sum.
"""
import logging

import numpy as np

from scenarios.common import probe, progress, quadrature_config, rng_for, spacelike_offset, validated, vec
from utils.config import ScenarioError
from utils.data_handling import Report
from utils.geometry import FourVector, regions_spacelike
from utils.kernels import lattice_pairing, pairing, wightman
from utils.testfun import current_probe, scalar_bump, time_field

logger = logging.getLogger(__name__)


def _reach(scenario):
    geo = scenario.geometry
    return 2.0 * (float(geo["r"]) + 2.0 * float(geo["eps"]))


def spacelike_pairs(scenario, rng, n):
    geo = scenario.geometry
    c = vec(geo["c"])
    g1 = probe(scenario)
    out = []
    for _ in range(n):
        g2 = probe(scenario, c + spacelike_offset(rng, _reach(scenario)))
        if not regions_spacelike(g1.support, g2.support):
            raise ScenarioError(f"probe pair is not spacelike: {g2.text}")
        out.append((g1, g2))
    return out


def random_field(scenario, rng):
    """Flux probe or current probe at a random place near the scenario centre."""
    geo = scenario.geometry
    c = vec(geo["c"]) + FourVector(float(rng.uniform(-1, 1)), tuple(rng.uniform(-2, 2, 3)))
    if rng.random() < 0.5:
        return probe(scenario, c)
    width = float(rng.uniform(0.5, 1.5))
    return current_probe(time_field(scalar_bump(c, width, width, int(geo["k"]))))


def oracle_pairs(scenario, n):
    geo = scenario.geometry
    c = vec(geo["c"])
    out = []
    for j in range(n):
        offset = FourVector(0.0, (0.3 * j, 0.0, 0.0))
        u = time_field(scalar_bump(c, 1.0, 1.0, int(geo["k"])))
        v = time_field(scalar_bump(c + offset, 1.0, 1.0, int(geo["k"])))
        out.append((u, v))
    return out


def validate(scenario):
    validated(lambda: probe(scenario), "flux probe")


def run(scenario):
    """
    Rows locality_max (spacelike probe pairs), antisymmetry_max and, for
    params.n_oracle > 0, the largest relative gap to the lattice oracle.
    """
    validate(scenario)
    reduce = bool(scenario.param("use_on_shell_reduction", False))
    cfg = quadrature_config(scenario, use_on_shell_reduction=reduce)
    rng = rng_for(scenario)
    report = Report.for_scenario(scenario)

    worst, err = 0.0, 0.0
    for g1, g2 in progress(spacelike_pairs(scenario, rng, int(scenario.param("n_geometries", 10))), "local"):
        res = pairing(g1, g2, "pauli_jordan", cfg)
        if abs(res.value) >= worst:
            worst, err = abs(res.value), res.abs_error
    report.add("locality_max", worst, err, 0.0, float(scenario.param("locality_tol", 1e-6)), relation="le")

    residual = 0.0
    for _ in progress(range(int(scenario.param("n_pairs", 20))), "antisymmetry"):
        u, v = random_field(scenario, rng), random_field(scenario, rng)
        forward, backward = wightman(u, v, cfg), wightman(v, u, cfg)
        scale = max(1.0, abs(forward.value))
        residual = max(residual, abs(forward.value.imag + backward.value.imag) / scale)
    report.add("antisymmetry_max", residual, 0.0, 0.0, float(scenario.param("antisymmetry_tol", 1e-8)),
               relation="le")

    n_oracle = int(scenario.param("n_oracle", 0))
    if n_oracle:
        box = float(scenario.param("oracle_box", 30.0))
        cutoff = float(scenario.param("oracle_cutoff", 24.0))
        gap = 0.0
        for u, v in progress(oracle_pairs(scenario, n_oracle), "oracle"):
            shell = wightman(u, v, cfg).value
            lattice = lattice_pairing(u, v, box, cutoff).value
            gap = max(gap, abs(shell - lattice) / max(abs(shell), np.finfo(float).tiny))
        report.add("oracle_relative_gap_max", gap, 0.0, 0.0, float(scenario.param("oracle_tol", 1e-2)),
                   relation="le")
    logger.info("locality %.3e, antisymmetry %.3e", worst, residual)
    return report
