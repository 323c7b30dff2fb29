import json
from pathlib import Path

from app import EXIT_INVALID, EXIT_OK, main

SCENARIOS = Path(__file__).resolve().parents[1] / "data" / "scenarios"


def test_list_kinds(capsys):
    assert main(["list"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "flux_trichotomy" in out and "word_eval" in out


def test_identity_word_scenario(tmp_path):
    code = main(["run", "--scenario", str(SCENARIOS / "identity_word.toml"), "--out", str(tmp_path)])
    assert code == EXIT_OK
    payload = json.loads((tmp_path / "identity_word.json").read_text())
    assert payload["passed"] is True
    assert (tmp_path / "identity_word.csv").exists()
    assert (tmp_path / "identity_word_normal_form.csv").exists()


def test_kind_subcommand_with_defaults(tmp_path):
    assert main(["word_eval", "--out", str(tmp_path), "--seed", "5"]) == EXIT_OK
    payload = json.loads((tmp_path / "word_eval.json").read_text())
    assert payload["config"]["seed"] == 5


def test_run_needs_scenario_file(tmp_path):
    assert main(["run", "--out", str(tmp_path)]) == EXIT_INVALID


def test_invalid_scenario_file(tmp_path):
    bad = tmp_path / "bad.toml"
    bad.write_text('kind = "word_eval"\nunknown_key = 1\n')
    assert main(["run", "--scenario", str(bad), "--out", str(tmp_path)]) == EXIT_INVALID
    word = tmp_path / "word.toml"
    word.write_text('kind = "word_eval"\n[params]\nword = "V(1.0, "\n')
    assert main(["run", "--scenario", str(word), "--out", str(tmp_path)]) == EXIT_INVALID
