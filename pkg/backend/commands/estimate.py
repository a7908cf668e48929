import sys
from pathlib import Path

project_root = Path(__file__).parent.parent.parent
if str(project_root) not in sys.path:
    sys.path.insert(0, str(project_root))

import logging

from backend.commands import plan_config
from backend.models.records import ExperimentPlan
from backend.services.experiment_service import ExperimentService
from backend.services.report_service import ReportService

logger = logging.getLogger(__name__)

SUMMARY_COLUMNS = ["T_uK", "f_parallel_khz", "f_perp_khz", "n_mean", "budget_total"]


# Function: run
def run(plan: ExperimentPlan) -> int:
    """Analytic ε and 1 - ℱ terms for every scan point -> estimate.csv"""
    config = plan_config(plan)
    service = ExperimentService(config)
    reports = ReportService(config)

    frame = service.estimate(plan.scan_axes, plan.jobs)
    notes = [f"gate: {config.get('gate.kind')}"]
    notes.extend(f"scan: {axis.variable} {axis.spacing.value}" for axis in plan.scan_axes)
    notes.append("budget_* columns add up to budget_total")
    reports.write_csv(frame, "estimate", reports.metadata("estimate", notes))

    columns = [c for c in [a.variable for a in plan.scan_axes] + SUMMARY_COLUMNS if c in frame]
    print(reports.format_table(frame, columns))
    return 0
