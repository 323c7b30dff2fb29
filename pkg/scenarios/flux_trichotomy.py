"""
Flux trichotomy: φ_m(δdh_c) is q, -q or 0 depending on which charge sits in
the probe's double cone.
"""
import logging

import numpy as np

from scenarios.common import pair, probe, progress, quadrature_config, rng_for, validated, vec
from utils.config import GeometryError, ScenarioError
from utils.data_handling import Report
from utils.geometry import FourVector
from utils.kernels import check_mollifier_hypothesis, phi_m

logger = logging.getLogger(__name__)

ROUTES = ("lemma", "momentum", "both")
INNER_SHIFT = 0.3


def _cases(scenario):
    geo = scenario.geometry
    inside, outside = vec(geo["c1"]), vec(geo["c2"])
    shift = FourVector(0.0, (0.0, INNER_SHIFT * float(geo["r"]), 0.0))
    q = float(geo["q"])
    return [
        ("inside_outside", inside, outside, q),
        ("outside_inside", outside, inside, -q),
        ("both_inside", inside, inside + shift, 0.0),
        ("both_outside", outside, outside + shift, 0.0),
    ]


def validate(scenario):
    route = scenario.param("route", "lemma")
    if route not in ROUTES:
        raise ScenarioError(f"route must be one of {', '.join(ROUTES)}, got {route!r}")
    g = validated(lambda: probe(scenario), "flux probe")
    params = g.terms[0][1].param_dict
    for name, c1, c2, _ in _cases(scenario):
        m = validated(lambda: pair(scenario, c1, c2), f"pair density for {name}")
        validated(lambda: check_mollifier_hypothesis(m, params), f"mollifier for {name}")
    return g


def random_geometry(rng, scenario, params):
    """
    A pair density with one charge in the probe's double cone and one
    spacelike to it, both displaced in time within their causal margins.
    """
    r, eps = params["r"], params["eps"]
    c = params["c"]
    for _ in range(100):
        d_in = rng.normal(size=3)
        d_in *= rng.uniform(0.0, 0.5 * (r - eps)) / np.linalg.norm(d_in)
        d_out = rng.normal(size=3)
        d_out *= rng.uniform(r + 2 * eps + 0.5, r + 4.0) / np.linalg.norm(d_out)
        t_in = rng.uniform(-0.5, 0.5) * ((r - eps) - np.linalg.norm(d_in))
        t_out = rng.uniform(-0.5, 0.5) * (np.linalg.norm(d_out) - (r + 2 * eps))
        c1 = c + FourVector(float(t_in), tuple(d_in))
        c2 = c + FourVector(float(t_out), tuple(d_out))
        if rng.random() < 0.5:
            c1, c2 = c2, c1
        try:
            m = pair(scenario, c1, c2)
            check_mollifier_hypothesis(m, params)
        except GeometryError:
            continue
        return m
    return None


def run(scenario):
    """
    Rows phi[<case>] per charge placement, the τ-explicit lemma value and,
    for params.n_random > 0, the largest momentum/lemma route gap over random
    admissible geometries.
    """
    g = validate(scenario)
    cfg = quadrature_config(scenario)
    route = scenario.param("route", "lemma")
    report = Report.for_scenario(scenario)
    report.add_input("probe", g.text)
    q = float(scenario.geometry["q"])
    tol = scenario.tolerance * max(1.0, abs(q))

    for name, c1, c2, expected in _cases(scenario):
        m = pair(scenario, c1, c2)
        report.add_input(name, m.text)
        if route in ("lemma", "both"):
            res = phi_m(m, g, "lemma", cfg)
            report.add(f"phi[{name}]", res.value, res.abs_error, expected, tol)
        if route in ("momentum", "both"):
            res = phi_m(m, g, "momentum", cfg)
            report.add(f"phi_momentum[{name}]", res.value, res.abs_error, expected, tol)
        logger.info("flux case %s done", name)

    if scenario.param("tau_check", True):
        name, c1, c2, expected = _cases(scenario)[0]
        res = phi_m(pair(scenario, c1, c2), g, "lemma", cfg, tau_explicit=True)
        report.add(f"phi_tau_explicit[{name}]", res.value, res.abs_error, expected, tol)

    n_random = int(scenario.param("n_random", 0))
    if n_random:
        rng = rng_for(scenario)
        params = g.terms[0][1].param_dict
        gap, err = 0.0, 0.0
        for _ in progress(range(n_random), "routes"):
            m = random_geometry(rng, scenario, params)
            if m is None:
                continue
            lemma = phi_m(m, g, "lemma", cfg)
            momentum = phi_m(m, g, "momentum", cfg)
            if abs(lemma.value - momentum.value) > gap:
                gap, err = abs(lemma.value - momentum.value), momentum.abs_error
        report.add("route_gap_max", gap, err, 0.0, tol)
    return report
