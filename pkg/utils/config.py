import os
import logging
import sys

logger = logging.getLogger(__name__)

try:
    from dotenv import load_dotenv
    load_dotenv()
except ImportError:
    logger.warning("python-dotenv not installed; using environment variables directly")

# Workbench defaults from environment variables (a .env file is honoured)
ENV_DEFAULTS = {
    "out_dir": os.environ.get("GAUSSFLUX_OUT_DIR", "reports"),
    "seed": int(os.environ.get("GAUSSFLUX_SEED", "0")),
    "tolerance": float(os.environ.get("GAUSSFLUX_TOLERANCE", "1e-4")),
    "quad_cutoff": (float(os.environ["GAUSSFLUX_QUAD_CUTOFF"])
                    if os.environ.get("GAUSSFLUX_QUAD_CUTOFF") else None),
    "log_level": os.environ.get("GAUSSFLUX_LOG_LEVEL", "INFO"),
    "workers": int(os.environ.get("GAUSSFLUX_WORKERS", "1")),
}

# Numerical constants shared by the modules
LIGHTLIKE_TOL = 1e-12
SPACELIKE_MARGIN = 1e-9
ISOMETRY_TOL = 1e-12
DEFAULT_ORDER = 6
PHASE_SERIES_THRESHOLD = 1e-4

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


class WorkbenchError(Exception):
    """Base class of all errors raised by the workbench."""


class GeometryError(WorkbenchError):
    """Invalid region, Poincaré map or violated causal precondition."""


class TestFunctionError(WorkbenchError):
    """Wrong valence, bad support data or an unsupported expression node."""

    __test__ = False


class QuadratureError(WorkbenchError):
    """Quadrature failed to reach the requested tolerance.

    Args:
        message: Human readable reason
        estimate: Best value obtained before giving up
        abs_error: Error estimate attached to ``estimate``
    """

    def __init__(self, message, estimate=None, abs_error=None):
        super().__init__(message)
        self.estimate = estimate
        self.abs_error = abs_error


class RepresentationError(WorkbenchError):
    """A word cannot be mapped to Gupta-Bleuler exponentials."""


class GaugeInvarianceError(WorkbenchError):
    """A word required to be gauge invariant is not.

    Args:
        message: Human readable reason
        witness: Scalar gauge function producing a non-zero phase
    """

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class ScenarioError(WorkbenchError):
    """Scenario validation failure."""


def setup_logging(level=None):
    """
    Install a single stream handler on the root logger

    Args:
        level: Logging level name; defaults to GAUSSFLUX_LOG_LEVEL

    Returns:
        The configured root logger
    """
    root = logging.getLogger()
    level = level or ENV_DEFAULTS["log_level"]
    root.setLevel(getattr(logging, str(level).upper(), logging.INFO))
    if not any(getattr(h, "_gaussflux", False) for h in root.handlers):
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        handler._gaussflux = True
        root.addHandler(handler)
    return root
