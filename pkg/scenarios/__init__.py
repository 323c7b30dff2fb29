"""Scenario kinds, one module each, all exposing run(scenario) -> Report."""
import logging

from scenarios import (classical_field, flux_trichotomy, gauge_audit, gram_positivity, locality_scan,
                       outer_witness, word_eval)
from utils.config import ScenarioError

logger = logging.getLogger(__name__)

KINDS = {
    "flux_trichotomy": flux_trichotomy,
    "gauge_audit": gauge_audit,
    "gram_positivity": gram_positivity,
    "outer_witness": outer_witness,
    "locality_scan": locality_scan,
    "classical_field": classical_field,
    "word_eval": word_eval,
}


def describe(kind):
    """First docstring line of a kind's module."""
    doc = (KINDS[kind].__doc__ or "").strip()
    return doc.splitlines()[0] if doc else ""


def run_scenario(scenario, write=True):
    """
    Validate and run a scenario, then write its report

    Args:
        scenario: utils.data_handling.Scenario
        write: Write CSV and JSON under scenario.out_dir

    Returns:
        Report

    Raises:
        ScenarioError: unknown kind or failed validation
    """
    module = KINDS.get(scenario.kind)
    if module is None:
        raise ScenarioError(f"unknown scenario kind {scenario.kind!r}")
    logger.info("running %s (%s, seed %d)", scenario.scenario_id, scenario.kind, scenario.seed)
    report = module.run(scenario)
    if write:
        report.write(scenario.out_dir)
    status = "passed" if report.passed else f"failed {len(report.failures)} row(s)"
    logger.info("%s %s", scenario.scenario_id, status)
    return report
