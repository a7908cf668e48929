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

SUMMARY_COLUMNS = ["bell_fidelity", "infidelity", "budget_total", "n_max", "ledger_error"]


# Function: run
def run(plan: ExperimentPlan) -> int:
    """
    Full-dynamics fidelity per scan point

    Writes simulate.csv (one row per point, analytic columns alongside) and
    simulate.json with the FidelityReport of every point.
    """
    config = plan_config(plan)
    service = ExperimentService(config)
    reports = ReportService(config)

    frame, point_reports = service.simulate(plan.scan_axes, plan.jobs)
    notes = [f"gate: {config.get('gate.kind')}", f"mode: {config.get('solver.mode', 'axial')}"]
    metadata = reports.metadata("simulate", notes)
    reports.write_csv(frame, "simulate", metadata)
    points = [overrides for overrides, _ in service.scan_points(plan.scan_axes)]
    reports.write_json(
        [{"point": point, "report": report} for point, report in zip(points, point_reports)],
        "simulate",
        metadata,
    )

    columns = [c for c in [a.variable for a in plan.scan_axes] + SUMMARY_COLUMNS if c in frame]
    print(reports.format_table(frame, columns))
    return 0
