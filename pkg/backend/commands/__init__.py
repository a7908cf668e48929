import sys
from pathlib import Path

project_root = Path(__file__).parent.parent.parent
if str(project_root) not in sys.path:
    sys.path.insert(0, str(project_root))

import json
import logging
from typing import Callable

from backend.models.records import ExperimentPlan
from backend.services.config_manager import ConfigManager
from backend.services.errors import ServiceError
from backend.services.experiment_service import preset_overrides

logger = logging.getLogger(__name__)


# Function: plan_config
def plan_config(plan: ExperimentPlan) -> ConfigManager:
    """Config file of the plan with its command-line overrides applied"""
    config = ConfigManager(Path(plan.config_path) if plan.config_path else None)
    overrides = {}
    if plan.preset:
        overrides.update(preset_overrides(config, plan.preset, plan.state))
    if plan.gate_kind:
        overrides["gate.kind"] = plan.gate_kind
    for key, value in plan.solver_overrides.items():
        overrides[f"solver.{key}"] = value
    if plan.output_dir:
        overrides["output.directory"] = plan.output_dir
    if not overrides:
        return config
    logger.debug("config overrides: %s", overrides)
    return config.with_overrides(overrides)


# Function: run_guarded
def run_guarded(handler: Callable[[ExperimentPlan], int], plan: ExperimentPlan) -> int:
    """
    Run one command handler and turn failures into exit codes

    Returns:
        0 on success, the error's exit code for a ServiceError, 1 otherwise
    """
    try:
        return handler(plan)
    except ServiceError as e:
        logger.error("%s failed [%s]: %s", plan.command.value, e.code, e.message)
        print(json.dumps(e.to_dict(), default=str), file=sys.stderr)
        return e.exit_code
    except Exception:
        logger.exception("%s failed unexpectedly", plan.command.value)
        return 1
