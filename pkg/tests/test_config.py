import importlib.util
import logging
import sys
from pathlib import Path

CONFIG = Path(__file__).resolve().parents[1] / "utils" / "config.py"


def _load_config(name="gaussflux_config_copy"):
    spec = importlib.util.spec_from_file_location(name, CONFIG)
    module = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(module)
    return module


def test_missing_dotenv_is_logged(monkeypatch, caplog, capsys):
    monkeypatch.setitem(sys.modules, "dotenv", None)
    with caplog.at_level(logging.WARNING):
        _load_config()
    assert "python-dotenv" in caplog.text
    assert capsys.readouterr().out == ""


def test_environment_sets_defaults(monkeypatch):
    monkeypatch.setitem(sys.modules, "dotenv", None)
    monkeypatch.setenv("GAUSSFLUX_SEED", "7")
    monkeypatch.setenv("GAUSSFLUX_QUAD_CUTOFF", "12.5")
    module = _load_config()
    assert module.ENV_DEFAULTS["seed"] == 7
    assert module.ENV_DEFAULTS["quad_cutoff"] == 12.5
