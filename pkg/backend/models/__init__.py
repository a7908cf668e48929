from backend.models.records import (
    CheckKind,
    CommandName,
    ConvergenceRecord,
    ExperimentPlan,
    FidelityReport,
    PhaseMode,
    RunMetadata,
    ScanAxis,
    ScanSpacing,
    SimulationMode,
    ValidationRow,
)

__all__ = [
    "CheckKind",
    "CommandName",
    "ConvergenceRecord",
    "ExperimentPlan",
    "FidelityReport",
    "PhaseMode",
    "RunMetadata",
    "ScanAxis",
    "ScanSpacing",
    "SimulationMode",
    "ValidationRow",
]
