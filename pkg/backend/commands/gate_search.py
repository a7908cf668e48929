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


# Function: run
def run(plan: ExperimentPlan) -> int:
    """Search Δ/Ω₀ and δt for the configured blockade -> gate_search.json"""
    config = plan_config(plan)
    result = ExperimentService(config).gate_search()
    reports = ReportService(config)
    reports.write_json(result, "gate_search", reports.metadata("gate-search"))

    gate = result["gate"]
    print(f"detuning ratio   {gate['detuning_ratio']:.5f}")
    print(f"delta t (us)     {gate['delta_t']:.5f}")
    print(f"phase defect     {result['defect_rad']:.3e} rad")
    print(f"margin           {result['margin']:.4f}")
    print(f"tau_a (ns)       {result['tau_a_us'] * 1e3:.1f}")
    print(f"tau_R (ns)       {result['tau_R_us'] * 1e3:.1f}")
    print(f"tau_RR (ns)      {result['tau_RR_us'] * 1e3:.4g}")
    for key, value in result["budget"].items():
        print(f"{key:<16} {value:.3e}")
    return 0
