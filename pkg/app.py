import argparse
import logging
import sys

from scenarios import KINDS, describe, run_scenario
from utils.config import ENV_DEFAULTS, ScenarioError, WorkbenchError, setup_logging
from utils.data_handling import load_scenario, scenario_from_dict

logger = logging.getLogger("gaussflux")

EXIT_OK = 0
EXIT_TOLERANCE = 1
EXIT_INVALID = 2


def _add_common_flags(parser):
    parser.add_argument("--scenario", help="TOML scenario file")
    parser.add_argument("--out", help=f"report directory (default {ENV_DEFAULTS['out_dir']})")
    parser.add_argument("--seed", type=int, help="random seed")
    parser.add_argument("--tolerance", type=float, help="default row tolerance")
    parser.add_argument("--quad-cutoff", type=float, dest="quad_cutoff", help="momentum cutoff")
    parser.add_argument("--workers", type=int, help="threads for Gram entries")
    parser.add_argument("--log-level", dest="log_level", help="logging level name")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="gaussflux",
        description="Charges, flux probes and gauge bridges in the algebra of the free electromagnetic field.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run the scenario file given by --scenario")
    _add_common_flags(run)

    for kind in KINDS:
        kind_parser = sub.add_parser(kind, help=describe(kind))
        _add_common_flags(kind_parser)

    sub.add_parser("list", help="print the scenario kinds")
    return parser


def _overrides(args):
    return {
        "seed": args.seed,
        "tolerance": args.tolerance,
        "out_dir": args.out,
        "workers": args.workers,
        "cutoff": args.quad_cutoff,
    }


def resolve_scenario(args):
    """Scenario from --scenario (optionally forced to a kind) or from defaults."""
    overrides = _overrides(args)
    if args.command != "run":
        overrides["kind"] = args.command
    if args.scenario:
        return load_scenario(args.scenario, overrides)
    if args.command == "run":
        raise ScenarioError("run needs --scenario")
    return scenario_from_dict({"kind": args.command}, overrides=overrides)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(getattr(args, "log_level", None))

    if args.command == "list":
        for kind in KINDS:
            print(f"{kind:18s} {describe(kind)}")
        return EXIT_OK

    try:
        scenario = resolve_scenario(args)
        report = run_scenario(scenario)
    except ScenarioError as e:
        logger.error("invalid scenario: %s", e)
        return EXIT_INVALID
    except WorkbenchError as e:
        logger.error("%s: %s", type(e).__name__, e)
        return EXIT_TOLERANCE

    for row in report.rows:
        print(f"{row.quantity:36s} {row.value_re: .10g} {row.value_im:+.3g}j  "
              f"err={row.abs_error:.2g}  {row.status}")
    return EXIT_OK if report.passed else EXIT_TOLERANCE


if __name__ == "__main__":
    sys.exit(main())
