import sys
from pathlib import Path

project_root = Path(__file__).parent.parent.parent
if str(project_root) not in sys.path:
    sys.path.insert(0, str(project_root))

import logging

from backend.commands import plan_config
from backend.models.records import ExperimentPlan
from backend.services.errors import ValidationFailure
from backend.services.report_service import ReportService
from backend.services.validation_service import ValidationService

logger = logging.getLogger(__name__)

TABLE_COLUMNS = ["name", "target", "actual", "tolerance", "check", "passed", "informational"]


# Function: run
def run(plan: ExperimentPlan) -> int:
    """Acceptance suite; exit 0 only when every gating row passes"""
    config = plan_config(plan)
    service = ValidationService(config, ReportService(config), jobs=plan.jobs, quick=plan.quick)
    rows = service.run()
    service.write(rows)
    print(ReportService.format_table(service.frame(rows), TABLE_COLUMNS))

    failed = [row.name for row in rows if not row.passed and not row.informational]
    if failed:
        raise ValidationFailure(
            "VALIDATION_FAILED", f"{len(failed)} of {len(rows)} checks failed", {"failed": failed}
        )
    return 0
