import json

import pandas as pd
import pytest

from utils.config import ScenarioError
from utils.data_handling import (GEOMETRY_DEFAULTS, REPORT_COLUMNS, STATUS_FAIL, STATUS_INFO, STATUS_PASS,
                                 Report, filter_rows, input_hash, load_scenario, scenario_from_dict)


@pytest.mark.parametrize("data", [
    {"kind": "teleport"},
    {"kind": "word_eval", "colour": "red"},
    {"kind": "word_eval", "geometry": {"radius": 1.0}},
    {"kind": "word_eval", "geometry": {"c": [0.0, 1.0]}},
    {"kind": "word_eval", "quadrature": {"points": 3}},
    {"kind": "word_eval", "seed": "abc"},
    {"kind": "word_eval", "tolerance": -1.0},
])
def test_invalid_scenarios(data):
    with pytest.raises(ScenarioError):
        scenario_from_dict(data)


def test_defaults_and_overrides():
    scenario = scenario_from_dict({"kind": "gauge_audit", "seed": 3, "geometry": {"r": 2.0}},
                                  overrides={"seed": 11, "tolerance": None, "cutoff": 80.0})
    assert scenario.seed == 11
    assert scenario.scenario_id == "gauge_audit"
    assert scenario.geometry["r"] == 2.0
    assert scenario.geometry["moll"] == GEOMETRY_DEFAULTS["moll"]
    assert scenario.quadrature["cutoff"] == 80.0
    assert scenario.resolved()["geometry"]["r"] == 2.0


def test_kind_override_replaces_file_kind():
    scenario = scenario_from_dict({"kind": "gauge_audit"}, overrides={"kind": "word_eval"})
    assert scenario.kind == "word_eval"


def test_load_scenario(tmp_path):
    path = tmp_path / "s.toml"
    path.write_text('kind = "word_eval"\nid = "w"\n[params]\nword = "identity"\n')
    scenario = load_scenario(path)
    assert scenario.scenario_id == "w"
    assert scenario.param("word") == "identity"
    assert scenario.source == str(path)
    with pytest.raises(ScenarioError):
        load_scenario(tmp_path / "missing.toml")
    bad = tmp_path / "bad.toml"
    bad.write_text("kind = \n")
    with pytest.raises(ScenarioError):
        load_scenario(bad)


@pytest.mark.parametrize("value, expected, tolerance, relation, status", [
    (1.0 + 1e-9j, 1.0, 1e-6, "eq", STATUS_PASS),
    (1.1, 1.0, 1e-6, "eq", STATUS_FAIL),
    (-3.0, 0.0, 1e-6, "le", STATUS_PASS),
    (1e-3, 0.0, 1e-6, "le", STATUS_FAIL),
    (5.0, 3.0, 1e-6, "ge", STATUS_PASS),
    (float("nan"), 0.0, 1.0, "le", STATUS_FAIL),
    (0.3, None, None, "eq", STATUS_INFO),
])
def test_row_status(value, expected, tolerance, relation, status):
    report = Report("r", "word_eval", {"tolerance": 1e-8})
    row = report.add("x", value, expected=expected, tolerance=tolerance, relation=relation)
    assert row.status == status
    assert report.passed == (status != STATUS_FAIL)


def test_check_rows_and_default_tolerance():
    report = Report("r", "word_eval", {"tolerance": 1e-4})
    assert report.add("y", 1.00005, expected=1.0).status == STATUS_PASS
    assert report.check("holds", True).status == STATUS_PASS
    assert report.check("should_fail", True, expected=False).status == STATUS_FAIL
    assert [row.quantity for row in report.failures] == ["should_fail"]
    with pytest.raises(ScenarioError):
        report.add("z", 1.0, expected=1.0, relation="approx")


def test_write_report(tmp_path):
    report = Report("demo", "word_eval", {"tolerance": 1e-8, "seed": 1})
    report.add("vacuum", 1.0, 0.0, 1.0)
    report.add("omega", 0.5)
    report.add_input("word", "identity")
    report.add_table("normal_form", pd.DataFrame([{"normal_form": "identity"}]))
    paths = report.write(tmp_path)
    assert sorted(p.rsplit("/", 1)[-1] for p in paths) == ["demo.csv", "demo.json", "demo_normal_form.csv"]
    frame = pd.read_csv(tmp_path / "demo.csv")
    assert list(frame.columns) == REPORT_COLUMNS
    payload = json.loads((tmp_path / "demo.json").read_text())
    assert payload["passed"] is True
    assert payload["inputs"]["word"] == input_hash("identity")
    assert report.to_json() == report.to_json()
    assert len(filter_rows(report.to_frame(), status=STATUS_INFO)) == 1
    assert len(filter_rows(report.to_frame(), prefix="vac")) == 1
