import sys
from pathlib import Path

project_root = Path(__file__).parent.parent.parent
if str(project_root) not in sys.path:
    sys.path.insert(0, str(project_root))

import logging

from backend.commands import plan_config
from backend.models.records import ExperimentPlan
from backend.services.figure_service import FigureService
from backend.services.report_service import ReportService

logger = logging.getLogger(__name__)


# Function: run
def run(plan: ExperimentPlan) -> int:
    config = plan_config(plan)
    service = FigureService(config, ReportService(config), jobs=plan.jobs, quick=plan.quick)
    paths = service.reproduce(plan.target)
    for kind, path in paths.items():
        print(f"{kind:<5} {path}")
    return 0
