import sys
from pathlib import Path

project_root = Path(__file__).parent.parent.parent
if str(project_root) not in sys.path:
    sys.path.insert(0, str(project_root))

import itertools
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import pandas as pd

from backend.models.records import ScanAxis, SimulationMode
from backend.services.config_manager import ConfigManager
from backend.services.errors import ConfigError, ConvergenceError
from physics_models.analytic import (
    KickTiming,
    adiabatic_budget,
    chi_single_2pi,
    chi_two_pi,
    doppler_asymptotics,
    eps_adiabatic,
    eps_focusing,
    eps_ho_trap_on,
    infidelity_trap_off_prediction,
    infidelity_trap_on_prediction,
    pi2pipi_budget,
)
from physics_models.kspace import tau_a
from physics_models.units import (
    PhysicalSetup,
    effective_wavevector,
    mean_occupation,
)
from physics_models.vibrational import (
    SolverSettings,
    build_run,
    rydberg_time_integrals,
    simulate_gate,
    thermal_ensemble,
)
from physics_models.vibrational.fock_basis import lamb_dicke
from pulse_processing import GateKind, GateSpec, build_adiabatic_envelope
from pulse_processing.search import AdiabaticGateSearch, SearchResult

logger = logging.getLogger(__name__)

# levels kept above the highest thermal member for the kick to spread into
KICK_HEADROOM = 8
BASIS_CAP = 120


# Function: load_setup
def load_setup(config: ConfigManager) -> PhysicalSetup:
    return PhysicalSetup.from_config(config)


# Function: load_gate
def load_gate(config: ConfigManager, setup: Optional[PhysicalSetup] = None) -> GateSpec:
    setup = setup or load_setup(config)
    blockade = setup.blockade if config.get("gate.kind") == GateKind.ADIABATIC.value else None
    return GateSpec.from_config(config, blockade=blockade)


# Function: preset_overrides
def preset_overrides(
    config: ConfigManager, gate_name: str, state: Optional[str] = None
) -> Dict[str, object]:
    """
    Config overrides selecting one reference adiabatic gate

    Args:
        gate_name: key under presets.gates
        state: Rydberg level under presets.lifetimes_us; None switches decay off
            and keeps the configured pair separation
    """
    preset = config.get(f"presets.gates.{gate_name}")
    if preset is None:
        raise ConfigError(
            "PRESET_UNKNOWN", f"No gate preset named {gate_name}", {"gate": gate_name}
        )
    overrides: Dict[str, object] = {
        "gate.kind": GateKind.ADIABATIC.value,
        "gate.adiabatic.detuning_ratio": float(preset["detuning_ratio"]),
        "gate.adiabatic.delta_t_us": float(preset["delta_t_us"]),
        "rydberg.blockade_rad_s": float(preset["blockade_rad_s"]),
        "rydberg.lifetime_us": None,
    }
    if state is not None:
        lifetime = config.get(f"presets.lifetimes_us.{state}")
        if lifetime is None:
            raise ConfigError("PRESET_UNKNOWN", f"No lifetime for {state}", {"state": state})
        overrides["rydberg.lifetime_us"] = float(lifetime)
        overrides["rydberg.r12_um"] = float(preset["r12_um"][state])
    return overrides


# Function: gate_timing
def gate_timing(
    setup: PhysicalSetup, gate: GateSpec, settings: Optional[SolverSettings] = None
) -> KickTiming:
    """
    Exposure times of a gate

    π-2π-π: τ₁ and τ₂ = δt₂/2 from the gate itself. Adiabatic: τ_a from the δE = 0
    two-level problem, τ_R and τ_RR from the loss-free internal-state run.
    """
    if gate.kind == GateKind.PI_2PI_PI:
        return KickTiming(tau1=gate.tau1, tau2=gate.tau2)
    settings = settings or SolverSettings()
    internal, schedule, _, _ = build_run(
        setup.replace(rydberg_lifetime_us=None), gate, SimulationMode.INTERNAL_ONLY, settings
    )
    times = rydberg_time_integrals(internal, schedule, settings)
    return KickTiming(
        tau_a=tau_a(build_adiabatic_envelope(gate)),
        tau_R=times["tau_R"],
        tau_RR=times["tau_RR"],
    )


# Function: basis_size
def basis_size(setup: PhysicalSetup, omega: float, settings: SolverSettings, k_kick: float = 0.0) -> int:
    """Fock levels needed for the thermal members plus room for the kick."""
    members = thermal_ensemble(setup, omega, settings.weight_cutoff)
    top = max(max(m.n1, m.n2) for m in members)
    eta = abs(lamb_dicke(setup, k_kick, omega))
    headroom = KICK_HEADROOM + int(math.ceil(4.0 * eta * math.sqrt(top + 1)))
    size = max(settings.n_max, top + headroom)
    if size > BASIS_CAP:
        logger.warning("basis of %d levels requested, capped at %d", size, BASIS_CAP)
        size = BASIS_CAP
    return size


# Function: estimate_point
def estimate_point(config_data: dict) -> Dict[str, float]:
    """Every applicable analytic ε and 1 - ℱ term for one configuration."""
    config = ConfigManager(config=config_data)
    setup = load_setup(config)
    gate = load_gate(config, setup)
    settings = SolverSettings.from_config(config)
    timing = gate_timing(setup, gate, settings)

    row: Dict[str, float] = {
        "T_uK": setup.temperature_k * 1e6,
        "f_parallel_khz": setup.trap_freq_parallel_hz * 1e-3,
        "f_perp_khz": setup.trap_freq_perp_hz * 1e-3,
        "n_mean": mean_occupation(setup, setup.omega_parallel),
        "K_rad_um": effective_wavevector(setup)["K"],
    }
    focusing = eps_focusing(setup)
    row["focusing_full"] = focusing["eps_full"]
    row["focusing_transverse_only"] = focusing["eps_transverse_only"]

    if gate.kind == GateKind.PI_2PI_PI:
        row.update(
            {
                "tau1_us": timing.tau1,
                "tau2_us": timing.tau2,
                "eps1": chi_two_pi(setup, timing.tau1).epsilon,
                "eps2": chi_single_2pi(setup, timing.tau2).epsilon,
                "eps_ho": eps_ho_trap_on(setup, timing.tau1).epsilon_leading,
                "eps1_coth": doppler_asymptotics(setup, timing.tau1)["exact"],
                "infidelity_trap_off": infidelity_trap_off_prediction(
                    setup, timing.tau1, timing.tau2
                ),
                "infidelity_trap_on": infidelity_trap_on_prediction(
                    setup, timing.tau1, timing.tau2
                ),
            }
        )
        budget = pi2pipi_budget(setup, timing, include_focusing=True)
    else:
        row.update(
            {
                "tau_a_us": timing.tau_a,
                "tau_R_us": timing.tau_R,
                "tau_RR_us": timing.tau_RR,
                "eps_a": eps_adiabatic(setup, timing.tau_a).epsilon,
                "eps_R": eps_adiabatic(setup, timing.tau_R).epsilon,
                "eps_R_minus_a": eps_adiabatic(setup, abs(timing.tau_R - timing.tau_a)).epsilon,
            }
        )
        budget = adiabatic_budget(setup, timing)
    row.update({f"budget_{key}": value for key, value in budget.items()})
    return row


# Function: simulate_point
def simulate_point(config_data: dict) -> Tuple[Dict[str, float], dict]:
    """Full-dynamics fidelity of one configuration, with the analytic columns alongside."""
    config = ConfigManager(config=config_data)
    setup = load_setup(config)
    gate = load_gate(config, setup)
    settings = SolverSettings.from_config(config)
    mode = SimulationMode(config.get("solver.mode", SimulationMode.AXIAL.value))
    if mode == SimulationMode.AXIAL:
        settings.n_max = basis_size(
            setup, setup.omega_parallel, settings, effective_wavevector(setup)["K"]
        )
    elif mode == SimulationMode.TRANSVERSE_RR:
        settings.n_max = basis_size(setup, setup.omega_perp, settings)

    report = simulate_gate(setup, gate, mode, settings)
    row = estimate_point(config_data)
    row.update(report.summary())
    row["n_max"] = report.convergence.n_max
    row["members"] = report.convergence.members
    row["ledger_error"] = report.convergence.ledger_error
    return row, report.model_copy(update={"config_hash": config.hash()}).model_dump(mode="json")


# Function: simulate_scan_point
def simulate_scan_point(point: Tuple[Dict[str, float], dict]) -> Tuple[Dict[str, float], dict]:
    """simulate_point for one (overrides, config) pair; failures carry the scan point."""
    overrides, config_data = point
    try:
        return simulate_point(config_data)
    except ConvergenceError as e:
        raise e.__class__(e.code, e.message, {"point": overrides, **_as_dict(e.details)})


# Function: run_points
def run_points(worker: Callable, payloads: Sequence, jobs: int = 1) -> List:
    """Map `worker` over payloads, in input order, on up to `jobs` processes."""
    if jobs <= 1 or len(payloads) <= 1:
        return [worker(p) for p in payloads]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(worker, payloads))


# Class: ExperimentService
class ExperimentService:
    """Turns a configuration plus scan axes into analytic and simulated result tables"""

    # Function: __init__
    def __init__(self, config: ConfigManager):
        self.config = config

    # Function: setup
    def setup(self) -> PhysicalSetup:
        return load_setup(self.config)

    # Function: gate
    def gate(self) -> GateSpec:
        return load_gate(self.config)

    # Function: settings
    def settings(self) -> SolverSettings:
        return SolverSettings.from_config(self.config)

    # Function: scan_points
    def scan_points(self, axes: Sequence[ScanAxis]) -> List[Tuple[Dict[str, float], dict]]:
        """
        Cartesian product of the scan axes

        Returns:
            list of (overrides, resolved config dict); a single point when no axes
        """
        for axis in axes:
            if not self.config.has(axis.variable):
                raise ConfigError(
                    "CONFIG_UNKNOWN_KEY",
                    f"Scan variable does not name a config key: {axis.variable}",
                    {"key": axis.variable},
                )
        names = [axis.variable for axis in axes]
        points = []
        for values in itertools.product(*(axis.grid() for axis in axes)):
            overrides = dict(zip(names, values))
            points.append((overrides, self.config.with_overrides(overrides).get_all()))
        return points

    # Function: estimate
    def estimate(self, axes: Sequence[ScanAxis] = (), jobs: int = 1) -> pd.DataFrame:
        points = self.scan_points(axes)
        rows = run_points(estimate_point, [data for _, data in points], jobs)
        return self._frame(points, rows)

    # Function: simulate
    def simulate(
        self, axes: Sequence[ScanAxis] = (), jobs: int = 1
    ) -> Tuple[pd.DataFrame, List[dict]]:
        points = self.scan_points(axes)
        results = run_points(simulate_scan_point, points, jobs)
        rows = [row for row, _ in results]
        reports = [report for _, report in results]
        return self._frame(points, rows), reports

    # Function: _frame
    def _frame(self, points, rows) -> pd.DataFrame:
        records = []
        for (overrides, _), row in zip(points, rows):
            record = {key: value for key, value in overrides.items()}
            record.update(row)
            records.append(record)
        return pd.DataFrame.from_records(records)

    # Function: searcher
    def searcher(self) -> AdiabaticGateSearch:
        """Gate search configured from the search section and Ω₀."""
        omega0 = self.config.get("gate.adiabatic.omega0_rad_us")
        if not omega0 or omega0 <= 0:
            raise ConfigError("SEARCH_INPUT", "Ω₀ must be positive", {"omega0": omega0})
        return AdiabaticGateSearch(
            self.setup().blockade,
            float(omega0),
            detuning_bounds=tuple(self.config.get("search.detuning_bounds", [-1.2, -0.1])),
            grid_points=int(self.config.get("search.grid_points", 41)),
            margin_weight=float(self.config.get("search.margin_weight", 1e-3)),
            window_factor=float(self.config.get("gate.adiabatic.window_factor", 4.0)),
            phase_model=self.config.get("search.phase_model", "propagated"),
            max_defect=float(self.config.get("search.max_defect_rad", 1e-2)),
        )

    # Function: search
    def search(self) -> SearchResult:
        bounds = tuple(float(b) for b in self.config.get("search.delta_t_bounds_us", [0.2, 0.2]))
        ratio = self.config.get("search.detuning_ratio")
        return self.searcher().run(bounds, detuning_ratio=None if ratio is None else float(ratio))

    # Function: gate_search
    def gate_search(self) -> Dict[str, object]:
        """
        Adiabatic C_Z parameters for the configured blockade and Ω₀

        Returns:
            found gate, phase defect, margin, τ_a, τ_R, τ_RR and the error budget
        """
        setup = self.setup()
        result = self.search()
        timing = gate_timing(setup, result.gate, self.settings())
        return {
            "gate": result.gate.model_dump(mode="json"),
            "defect_rad": result.defect,
            "margin": result.margin,
            "phases": result.phases,
            "discarded_roots": result.discarded,
            "tau_a_us": timing.tau_a,
            "tau_R_us": timing.tau_R,
            "tau_RR_us": timing.tau_RR,
            "budget": adiabatic_budget(setup, timing),
        }


# Function: _as_dict
def _as_dict(details) -> dict:
    if isinstance(details, dict):
        return details
    return {} if details is None else {"details": details}
