import sys
from pathlib import Path

project_root = Path(__file__).parent.parent
if str(project_root) not in sys.path:
    sys.path.insert(0, str(project_root))

import argparse
import json
import logging
import os
from typing import List, Optional

from dotenv import load_dotenv
from pydantic import ValidationError

from backend import __version__
from backend.commands import estimate, gate_search, reproduce, run_guarded, simulate, validate
from backend.models.records import CommandName, ExperimentPlan, ScanAxis
from backend.services.config_manager import ConfigManager
from backend.services.errors import ConfigError, ServiceError
from backend.services.figure_service import TARGETS

logger = logging.getLogger("rydfid")

DEFAULT_CONFIG = project_root / "config" / "config.yaml"

HANDLERS = {
    CommandName.ESTIMATE: estimate.run,
    CommandName.SIMULATE: simulate.run,
    CommandName.GATE_SEARCH: gate_search.run,
    CommandName.REPRODUCE: reproduce.run,
    CommandName.VALIDATE: validate.run,
}


# Function: build_parser
def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML config file (default: $RYDFID_CONFIG or config/config.yaml)")
    common.add_argument("--out", help="output directory (default: output.directory)")
    common.add_argument("--jobs", type=int, default=1, help="worker processes for scan points")
    common.add_argument("--quick", action="store_true", help="reduced grids, skip heavy dynamics")
    common.add_argument(
        "--scan",
        action="append",
        default=[],
        metavar="KEY=START:STOP:N[:log]",
        help="scan a config key; repeat for a grid",
    )
    common.add_argument("--gate", choices=["pi_2pi_pi", "adiabatic"], help="override gate.kind")
    common.add_argument("--preset", help="gate preset from presets.gates (gate1, gate2, gate3)")
    common.add_argument("--state", help="Rydberg state of the preset (66S or 106S)")
    common.add_argument("--n-max", type=int, dest="n_max")
    common.add_argument("--rtol", type=float)
    common.add_argument("--atol", type=float)
    common.add_argument("--weight-cutoff", type=float, dest="weight_cutoff")

    parser = argparse.ArgumentParser(
        prog="rydfid", description="Recoil and fidelity estimates for Rydberg blockade gates"
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("estimate", parents=[common], help="analytic error budget per scan point")
    sub.add_parser("simulate", parents=[common], help="full two-atom dynamics per scan point")
    sub.add_parser("gate-search", parents=[common], help="find adiabatic gate parameters")
    rep = sub.add_parser("reproduce", parents=[common], help="regenerate a figure or the gate table")
    rep.add_argument("target", choices=list(TARGETS))
    sub.add_parser("validate", parents=[common], help="run the acceptance checks")
    return parser


# Function: build_plan
def build_plan(args: argparse.Namespace) -> ExperimentPlan:
    solver = {
        key: getattr(args, key)
        for key in ("n_max", "rtol", "atol", "weight_cutoff")
        if getattr(args, key) is not None
    }
    try:
        return ExperimentPlan(
            command=CommandName(args.command),
            config_path=str(args.config or os.getenv("RYDFID_CONFIG") or DEFAULT_CONFIG),
            gate_kind=args.gate,
            scan_axes=[ScanAxis.parse(text) for text in args.scan],
            solver_overrides=solver,
            output_dir=args.out,
            jobs=args.jobs,
            quick=args.quick,
            target=getattr(args, "target", None),
            preset=args.preset,
            state=args.state,
        )
    except (ValidationError, ValueError) as e:
        raise ConfigError("BAD_ARGUMENTS", str(e))


# Function: configure_logging
def configure_logging(config_path: str) -> None:
    level = os.getenv("RYDFID_LOG_LEVEL")
    fmt = "%(asctime)s %(levelname)s %(name)s: %(message)s"
    try:
        config = ConfigManager(Path(config_path))
        level = level or config.get("logging.level", "INFO")
        fmt = config.get("logging.format", fmt)
    except ServiceError:
        # the command itself reports the broken config
        level = level or "INFO"
    logging.basicConfig(level=getattr(logging, str(level).upper(), logging.INFO), format=fmt)


# Function: main
def main(argv: Optional[List[str]] = None) -> int:
    load_dotenv()
    args = build_parser().parse_args(argv)
    config_path = str(args.config or os.getenv("RYDFID_CONFIG") or DEFAULT_CONFIG)
    configure_logging(config_path)

    try:
        plan = build_plan(args)
    except ConfigError as e:
        logger.error("%s", e.message)
        print(json.dumps(e.to_dict(), default=str), file=sys.stderr)
        return e.exit_code

    logger.info("rydfid %s %s", __version__, plan.command.value)
    return run_guarded(HANDLERS[plan.command], plan)


if __name__ == "__main__":
    sys.exit(main())
