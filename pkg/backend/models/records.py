import math
from datetime import datetime, timezone
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field, field_validator, model_validator


# Class: SimulationMode
class SimulationMode(str, Enum):
    """Which motional degree of freedom a full-dynamics run resolves"""

    AXIAL = "axial"
    INTERNAL_ONLY = "internal_only"
    TRANSVERSE_RR = "transverse_rr"


# Class: PhaseMode
class PhaseMode(str, Enum):
    PER_QUBIT = "per_qubit"
    COMMON = "common"


# Class: ConvergenceRecord
class ConvergenceRecord(BaseModel):
    """Numerical settings and diagnostics attached to every full-dynamics result"""

    n_max: int = Field(ge=1)
    rtol: float
    atol: float
    weight_cutoff: float
    members: int = Field(ge=1)
    ledger_error: float = 0.0
    overflow_population: float = 0.0
    phase_converged: bool = True


# Class: FidelityReport
class FidelityReport(BaseModel):
    """Bell fidelity with the reduced qubit density matrix it was computed from"""

    bell_fidelity: float
    theta1: float
    theta2: float
    rho_0000: float
    rho_1111: float
    rho_0011: Tuple[float, float]
    reduced_density: List[List[Tuple[float, float]]] = Field(default_factory=list)
    convergence: ConvergenceRecord
    mode: SimulationMode = SimulationMode.AXIAL
    blockade_rad_us: Optional[float] = None
    blockade_source: str = "gate"
    weights: List[float] = Field(default_factory=list)
    tau_R: Optional[float] = None
    tau_RR: Optional[float] = None
    setup: Dict[str, Any] = Field(default_factory=dict)
    schedule_hash: Optional[str] = None
    config_hash: Optional[str] = None

    # Function: infidelity
    @property
    def infidelity(self) -> float:
        return 1.0 - self.bell_fidelity

    # Function: summary
    def summary(self) -> Dict[str, float]:
        return {
            "bell_fidelity": self.bell_fidelity,
            "infidelity": self.infidelity,
            "theta1": self.theta1,
            "theta2": self.theta2,
            "rho_0000": self.rho_0000,
            "rho_1111": self.rho_1111,
            "abs_rho_0011": abs(complex(*self.rho_0011)),
        }


# Class: ScanSpacing
class ScanSpacing(str, Enum):
    LINEAR = "linear"
    LOG = "log"


# Class: ScanAxis
class ScanAxis(BaseModel):
    """One scanned config key"""

    variable: str
    start: float
    stop: float
    points: int = Field(default=2, ge=2)
    spacing: ScanSpacing = ScanSpacing.LINEAR
    values: Optional[List[float]] = None

    @model_validator(mode="after")
    def _check_log_range(self):
        if self.spacing == ScanSpacing.LOG and (self.start <= 0 or self.stop <= 0):
            raise ValueError("log spacing needs positive start and stop")
        return self

    # Function: grid
    def grid(self) -> List[float]:
        if self.values:
            return list(self.values)
        if self.spacing == ScanSpacing.LOG:
            return np.geomspace(self.start, self.stop, self.points).tolist()
        return np.linspace(self.start, self.stop, self.points).tolist()

    # Function: parse
    @classmethod
    def parse(cls, text: str) -> "ScanAxis":
        """`key=start:stop:points[:log]` or `key=v1,v2,...`."""
        key, _, rhs = text.partition("=")
        if not rhs:
            raise ValueError(f"scan '{text}' must look like key=start:stop:points")
        if "," in rhs:
            values = [float(v) for v in rhs.split(",")]
            return cls(
                variable=key.strip(),
                start=values[0],
                stop=values[-1],
                points=max(2, len(values)),
                values=values,
            )
        parts = rhs.split(":")
        spacing = ScanSpacing.LOG if len(parts) > 3 and parts[3] == "log" else ScanSpacing.LINEAR
        return cls(
            variable=key.strip(),
            start=float(parts[0]),
            stop=float(parts[1]),
            points=int(parts[2]) if len(parts) > 2 else 2,
            spacing=spacing,
        )


# Class: CommandName
class CommandName(str, Enum):
    ESTIMATE = "estimate"
    SIMULATE = "simulate"
    GATE_SEARCH = "gate-search"
    REPRODUCE = "reproduce"
    VALIDATE = "validate"


# Class: ExperimentPlan
class ExperimentPlan(BaseModel):
    """A fully resolved command invocation"""

    command: CommandName
    config_path: Optional[str] = None
    gate_kind: Optional[str] = None
    scan_axes: List[ScanAxis] = Field(default_factory=list)
    solver_overrides: Dict[str, float] = Field(default_factory=dict)
    output_dir: Optional[str] = None
    jobs: int = Field(default=1, ge=1)
    quick: bool = False
    target: Optional[str] = None
    preset: Optional[str] = None
    state: Optional[str] = None

    @field_validator("solver_overrides")
    @classmethod
    def _known_solver_keys(cls, v: Dict[str, float]) -> Dict[str, float]:
        allowed = {"n_max", "rtol", "atol", "weight_cutoff"}
        unknown = set(v) - allowed
        if unknown:
            raise ValueError(f"unknown solver overrides: {sorted(unknown)}")
        return v


# Class: CheckKind
class CheckKind(str, Enum):
    """How a ValidationRow compares actual against target"""

    RELATIVE = "relative"
    ABSOLUTE = "absolute"
    FACTOR = "factor"  # |ln(actual/target)| within tolerance
    AT_LEAST = "at_least"


# Class: ValidationRow
class ValidationRow(BaseModel):
    """One acceptance check: target, computed value and tolerance"""

    name: str
    target: float
    actual: float
    tolerance: float
    check: CheckKind = CheckKind.RELATIVE
    informational: bool = False
    note: str = ""

    # Function: deviation
    @property
    def deviation(self) -> float:
        if self.check == CheckKind.FACTOR:
            if self.actual <= 0.0 or self.target <= 0.0:
                return math.inf
            return abs(math.log(self.actual / self.target))
        if self.check == CheckKind.AT_LEAST:
            return max(0.0, self.target - self.actual)
        diff = abs(self.actual - self.target)
        if self.check == CheckKind.RELATIVE and self.target != 0.0:
            return diff / abs(self.target)
        return diff

    # Function: passed
    @property
    def passed(self) -> bool:
        if math.isnan(self.actual):
            return False
        return self.deviation <= self.tolerance

    # Function: as_record
    def as_record(self) -> Dict[str, object]:
        return {
            "name": self.name,
            "target": self.target,
            "actual": self.actual,
            "tolerance": self.tolerance,
            "check": self.check.value,
            "deviation": self.deviation,
            "passed": self.passed,
            "informational": self.informational,
            "note": self.note,
        }


# Class: RunMetadata
class RunMetadata(BaseModel):
    """Provenance embedded into every CSV/JSON output"""

    command: str
    config_hash: str
    version: str
    created_at: datetime = Field(default_factory=lambda: datetime.now(timezone.utc))
    notes: List[str] = Field(default_factory=list)

    # Function: header_lines
    def header_lines(self) -> List[str]:
        """'#'-prefixed CSV header; the timestamp stays out so files are reproducible."""
        lines = [
            f"# command: {self.command}",
            f"# config_hash: {self.config_hash}",
            f"# version: {self.version}",
        ]
        lines.extend(f"# {note}" for note in self.notes)
        return lines
