"""
Scenario files in, report tables out

A scenario is one TOML file; a report is a list of rows (one named value each,
with its error estimate and the verdict against the declared tolerance) plus
optional tables, written as CSV and as a deterministic JSON mirror.
"""
import hashlib
import json
import logging
import math
import os
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from dataclasses import dataclass, field

import pandas as pd

from utils.config import ENV_DEFAULTS, ScenarioError

logger = logging.getLogger(__name__)

REPORT_COLUMNS = ["scenario_id", "quantity", "value_re", "value_im", "abs_error",
                  "expected", "tolerance", "status"]

SCENARIO_KINDS = ("flux_trichotomy", "gauge_audit", "gram_positivity", "outer_witness",
                  "locality_scan", "classical_field", "word_eval")

TOP_LEVEL_KEYS = {"kind", "id", "seed", "tolerance", "out_dir", "workers", "geometry",
                  "quadrature", "params"}

GEOMETRY_DEFAULTS = {
    "c": [0.0, 0.0, 0.0, 0.0],
    "r": 1.0,
    "eps": 0.05,
    "k": 6,
    "q": 2.0,
    "c1": [0.0, 0.0, 0.0, 0.0],
    "c2": [0.0, 5.0, 0.0, 0.0],
    "moll": 0.02,
}

QUADRATURE_KEYS = {"radial_points", "angular_order", "cutoff", "cutoff_factor", "rtol",
                   "line_points", "max_refinements", "use_on_shell_reduction"}

STATUS_PASS = "pass"
STATUS_FAIL = "fail"
STATUS_INFO = "info"


@dataclass
class Scenario:
    """
    Resolved scenario

    Attributes:
        kind: One of SCENARIO_KINDS
        scenario_id: Name used in report rows and file names
        geometry: Probe and pair geometry (GEOMETRY_DEFAULTS filled in)
        quadrature: QuadratureConfig overrides
        params: Kind specific parameters
        seed: Random seed
        tolerance: Default tolerance for rows that do not declare one
        out_dir: Report directory
        workers: Threads for Gram entries
        source: Path of the scenario file, if any
    """

    kind: str
    scenario_id: str
    geometry: dict = field(default_factory=lambda: dict(GEOMETRY_DEFAULTS))
    quadrature: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)
    seed: int = ENV_DEFAULTS["seed"]
    tolerance: float = ENV_DEFAULTS["tolerance"]
    out_dir: str = ENV_DEFAULTS["out_dir"]
    workers: int = ENV_DEFAULTS["workers"]
    source: str = None

    def resolved(self):
        """Plain dict of the full configuration, embedded in every report."""
        return {
            "kind": self.kind,
            "id": self.scenario_id,
            "seed": self.seed,
            "tolerance": self.tolerance,
            "out_dir": self.out_dir,
            "workers": self.workers,
            "geometry": dict(self.geometry),
            "quadrature": dict(self.quadrature),
            "params": dict(self.params),
        }

    def param(self, key, default=None):
        return self.params.get(key, default)


def scenario_from_dict(data, source=None, overrides=None):
    """
    Validate a scenario mapping and fill in defaults

    Precedence is overrides (CLI flags) over the mapping over environment
    defaults over built-in defaults.

    Args:
        data: Mapping as read from TOML
        source: Path the mapping came from
        overrides: Dict of top-level keys (seed, tolerance, out_dir, workers, cutoff)

    Returns:
        Scenario

    Raises:
        ScenarioError: on unknown kinds or keys, or values of the wrong type
    """
    data = dict(data)
    overrides = {k: v for k, v in (overrides or {}).items() if v is not None}
    unknown = set(data) - TOP_LEVEL_KEYS
    if unknown:
        raise ScenarioError(f"unknown scenario keys: {', '.join(sorted(unknown))}")
    kind = overrides.get("kind", data.get("kind"))
    if kind not in SCENARIO_KINDS:
        raise ScenarioError(f"unknown scenario kind {kind!r}; expected one of {', '.join(SCENARIO_KINDS)}")

    geometry = dict(GEOMETRY_DEFAULTS)
    extra = set(data.get("geometry", {})) - set(GEOMETRY_DEFAULTS)
    if extra:
        raise ScenarioError(f"unknown geometry keys: {', '.join(sorted(extra))}")
    geometry.update(data.get("geometry", {}))
    for key in ("c", "c1", "c2"):
        if len(geometry[key]) != 4:
            raise ScenarioError(f"geometry.{key} needs 4 components")

    quadrature = dict(data.get("quadrature", {}))
    extra = set(quadrature) - QUADRATURE_KEYS
    if extra:
        raise ScenarioError(f"unknown quadrature keys: {', '.join(sorted(extra))}")
    if overrides.get("cutoff") is not None:
        quadrature["cutoff"] = overrides["cutoff"]
    elif "cutoff" not in quadrature and ENV_DEFAULTS["quad_cutoff"] is not None:
        quadrature["cutoff"] = ENV_DEFAULTS["quad_cutoff"]

    try:
        scenario = Scenario(
            kind=kind,
            scenario_id=str(data.get("id", kind)),
            geometry=geometry,
            quadrature=quadrature,
            params=dict(data.get("params", {})),
            seed=int(overrides.get("seed", data.get("seed", ENV_DEFAULTS["seed"]))),
            tolerance=float(overrides.get("tolerance", data.get("tolerance", ENV_DEFAULTS["tolerance"]))),
            out_dir=str(overrides.get("out_dir", data.get("out_dir", ENV_DEFAULTS["out_dir"]))),
            workers=int(overrides.get("workers", data.get("workers", ENV_DEFAULTS["workers"]))),
            source=source,
        )
    except (TypeError, ValueError) as e:
        raise ScenarioError(f"invalid scenario value: {e}") from e
    if not scenario.tolerance > 0:
        raise ScenarioError(f"tolerance must be positive, got {scenario.tolerance}")
    return scenario


def load_scenario(path, overrides=None):
    """Read and validate a TOML scenario file."""
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except FileNotFoundError as e:
        raise ScenarioError(f"scenario file not found: {path}") from e
    except tomllib.TOMLDecodeError as e:
        raise ScenarioError(f"scenario file {path} is not valid TOML: {e}") from e
    logger.info("loaded scenario %s", path)
    return scenario_from_dict(data, source=str(path), overrides=overrides)


def input_hash(text):
    """Short sha256 of a label's text form."""
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]


def _real(x):
    return None if x is None else float(x)


@dataclass
class ReportRow:
    scenario_id: str
    quantity: str
    value_re: float
    value_im: float
    abs_error: float
    expected: float
    tolerance: float
    status: str

    def as_dict(self):
        return {col: getattr(self, col) for col in REPORT_COLUMNS}


@dataclass
class Report:
    """Rows of named values with pass/fail verdicts, plus named tables."""

    scenario_id: str
    kind: str
    config: dict = field(default_factory=dict)
    rows: list = field(default_factory=list)
    inputs: dict = field(default_factory=dict)
    tables: dict = field(default_factory=dict)

    @classmethod
    def for_scenario(cls, scenario):
        return cls(scenario.scenario_id, scenario.kind, scenario.resolved())

    def add(self, quantity, value, abs_error=0.0, expected=None, tolerance=None, relation="eq"):
        """
        Append a row and decide its status

        Args:
            quantity: Row name
            value: Real or complex value
            abs_error: Error estimate attached to value
            expected: Expected value; None gives an informational row
            tolerance: Allowed deviation; defaults to the scenario tolerance
            relation: 'eq' (|value - expected| <= tolerance), 'le'
                (value <= expected + tolerance) or 'ge' (value >= expected - tolerance)

        Returns:
            The new ReportRow
        """
        value = complex(value)
        if tolerance is None:
            tolerance = self.config.get("tolerance", ENV_DEFAULTS["tolerance"])
        if expected is None:
            status = STATUS_INFO
        else:
            if relation == "eq":
                ok = abs(value - complex(expected)) <= tolerance
            elif relation == "le":
                ok = value.real <= float(expected) + tolerance
            elif relation == "ge":
                ok = value.real >= float(expected) - tolerance
            else:
                raise ScenarioError(f"unknown relation {relation!r}")
            ok = ok and math.isfinite(value.real) and math.isfinite(value.imag)
            status = STATUS_PASS if ok else STATUS_FAIL
        expected_re = None if expected is None else complex(expected).real
        row = ReportRow(self.scenario_id, quantity, value.real, value.imag, float(abs_error),
                        _real(expected_re), float(tolerance), status)
        self.rows.append(row)
        if status == STATUS_FAIL:
            logger.warning("%s: %s = %.6g%+.6gj outside tolerance %.3g of %s", self.scenario_id,
                           quantity, value.real, value.imag, tolerance, expected)
        return row

    def check(self, quantity, condition, expected=True):
        """Boolean row: value 1 when condition holds."""
        return self.add(quantity, 1.0 if condition else 0.0, expected=1.0 if expected else 0.0, tolerance=0.5)

    def add_input(self, name, text):
        self.inputs[name] = input_hash(text)

    def add_table(self, name, frame):
        self.tables[name] = frame

    @property
    def passed(self):
        return all(row.status != STATUS_FAIL for row in self.rows)

    @property
    def failures(self):
        return [row for row in self.rows if row.status == STATUS_FAIL]

    def to_frame(self):
        return pd.DataFrame([row.as_dict() for row in self.rows], columns=REPORT_COLUMNS)

    def to_json(self):
        """Deterministic JSON text; no timestamps, keys sorted."""
        payload = {
            "scenario_id": self.scenario_id,
            "kind": self.kind,
            "passed": self.passed,
            "config": self.config,
            "inputs": self.inputs,
            "rows": [row.as_dict() for row in self.rows],
            "tables": {name: json.loads(frame.to_json(orient="split", index=False, double_precision=15))
                       for name, frame in sorted(self.tables.items())},
        }
        return json.dumps(payload, sort_keys=True, indent=2, allow_nan=True)

    def write(self, out_dir=None):
        """
        Write <id>.csv, <id>.json and one <id>_<table>.csv per table

        Returns:
            List of written paths
        """
        out_dir = out_dir or self.config.get("out_dir") or ENV_DEFAULTS["out_dir"]
        os.makedirs(out_dir, exist_ok=True)
        base = os.path.join(out_dir, self.scenario_id)
        paths = [f"{base}.csv", f"{base}.json"]
        self.to_frame().to_csv(paths[0], index=False)
        with open(paths[1], "w", encoding="utf-8") as fh:
            fh.write(self.to_json())
            fh.write("\n")
        for name, frame in sorted(self.tables.items()):
            path = f"{base}_{name}.csv"
            frame.to_csv(path, index=False)
            paths.append(path)
        logger.info("report written to %s", ", ".join(paths))
        return paths


def filter_rows(frame, status=None, prefix=None):
    """
    Filter a report frame

    Args:
        frame: DataFrame from Report.to_frame
        status: Keep only rows with this status
        prefix: Keep only quantities starting with this prefix

    Returns:
        Filtered DataFrame
    """
    if frame.empty:
        return frame
    out = frame
    if status:
        out = out[out["status"] == status]
    if prefix:
        out = out[out["quantity"].str.startswith(prefix)]
    return out
