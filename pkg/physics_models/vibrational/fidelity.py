"""
Bell-state fidelity of a simulated gate and the end-to-end simulation driver.

After the gate a phase θⱼ is put on |1⟩ of each qubit, a Hadamard is applied to
qubit 2 and the vibrational indices are traced out. The figure of merit is
ℱ = (ρ₀₀₀₀ + ρ₁₁₁₁)/2 + |ρ₀₀₁₁|, maximized over the phases.
"""

import sys
from pathlib import Path

project_root = Path(__file__).parent.parent.parent
if str(project_root) not in sys.path:
    sys.path.insert(0, str(project_root))

import hashlib
import json
import logging
import math
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import optimize

from backend.models.records import (
    ConvergenceRecord,
    FidelityReport,
    PhaseMode,
    SimulationMode,
)
from backend.services.errors import LinearizationError
from physics_models.units import PhysicalSetup, effective_wavevector, position_variance
from physics_models.vibrational.evolution import (
    EnsembleMember,
    EvolutionState,
    SolverSettings,
    evolve_ensemble,
    rydberg_time_integrals,
    thermal_ensemble,
)
from physics_models.vibrational.fock_basis import FockBasis
from physics_models.vibrational.hamiltonian import DARK, GateHamiltonian, GateSchedule
from pulse_processing.envelopes import GateKind, GateSpec, gate_envelopes

logger = logging.getLogger(__name__)

PHASE_GRID = 64
MAX_REFINE_PASSES = 20
FIDELITY_SLACK = 1e-9
LINEARIZATION_LIMIT = 0.1

_HADAMARD = np.array([[1.0, 1.0], [1.0, -1.0]]) / math.sqrt(2.0)
# Hadamard on qubit 2 in the (|00⟩, |01⟩, |10⟩, |11⟩) order
_READOUT = np.kron(np.eye(2), _HADAMARD)


# Function: qubit_block_from_amplitudes
def qubit_block_from_amplitudes(amplitudes: np.ndarray, n: int) -> np.ndarray:
    """4x4 qubit block Σ_v ψ_{ab,v} ψ*_{a'b',v} of one two-atom wave function."""
    internal = amplitudes.shape[0] // n
    psi = amplitudes.reshape(internal, n, internal, n)[:2, :, :2, :]
    flat = psi.transpose(0, 2, 1, 3).reshape(4, n * n)
    return flat @ flat.conj().T


# Function: qubit_block_from_states
def qubit_block_from_states(states: Sequence[EvolutionState], n: int) -> np.ndarray:
    """Weighted qubit block of an ensemble, summed in member order."""
    sigma = np.zeros((4, 4), dtype=complex)
    for state in states:
        sigma += state.weight * qubit_block_from_amplitudes(state.amplitudes, n)
    return sigma


# Function: qubit_block_from_density
def qubit_block_from_density(rho: np.ndarray, n: int, internal: int = DARK + 1) -> np.ndarray:
    """Qubit block of a dense two-atom density matrix with vibration traced out."""
    shaped = rho.reshape(internal, n, internal, n, internal, n, internal, n)
    sub = shaped[:2, :, :2, :, :2, :, :2, :]
    return np.einsum("aibjcidj->abcd", sub).reshape(4, 4)


# Function: fidelity_at
def fidelity_at(sigma: np.ndarray, theta1, theta2) -> np.ndarray:
    """ℱ(θ₁, θ₂) for broadcastable phase arrays."""
    theta1, theta2 = np.broadcast_arrays(np.asarray(theta1, float), np.asarray(theta2, float))
    shape = theta1.shape
    t1, t2 = theta1.ravel(), theta2.ravel()
    phases = np.exp(1j * np.stack([np.zeros_like(t1), t2, t1, t1 + t2], axis=1))
    rotated = sigma[None, :, :] * phases[:, :, None] * phases.conj()[:, None, :]
    rho = _READOUT @ rotated @ _READOUT.T
    value = 0.5 * (rho[:, 0, 0].real + rho[:, 3, 3].real) + np.abs(rho[:, 0, 3])
    return value.reshape(shape)


# Function: _reduced_at
def _reduced_at(sigma: np.ndarray, theta1: float, theta2: float) -> np.ndarray:
    phases = np.exp(1j * np.array([0.0, theta2, theta1, theta1 + theta2]))
    rotated = sigma * phases[:, None] * phases.conj()[None, :]
    return _READOUT @ rotated @ _READOUT.T


# Function: optimize_phases
def optimize_phases(sigma: np.ndarray, phase_mode: str = "per_qubit") -> Tuple[float, float, float, bool]:
    """
    Maximize ℱ over the correction phases

    A 64-point grid per axis seeds Brent (golden-section with parabolic steps)
    refinement along one axis at a time.

    Returns:
        (fidelity, theta1, theta2, converged)
    """
    mode = PhaseMode(phase_mode)
    grid = np.linspace(0.0, 2.0 * math.pi, PHASE_GRID, endpoint=False)
    step = grid[1] - grid[0]

    if mode == PhaseMode.COMMON:
        values = fidelity_at(sigma, grid, grid)
        k = int(np.argmax(values))
        theta, best = float(grid[k]), float(values[k])
        res = optimize.minimize_scalar(
            lambda x: -float(fidelity_at(sigma, x, x)),
            bounds=(theta - step, theta + step),
            method="bounded",
            options={"xatol": 1e-12},
        )
        if not res.success:
            logger.warning("phase optimization did not converge; reporting grid best")
        elif -res.fun > best:
            theta, best = float(res.x), float(-res.fun)
        theta %= 2 * math.pi
        return best, theta, theta, bool(res.success)

    t1, t2 = np.meshgrid(grid, grid, indexing="ij")
    values = fidelity_at(sigma, t1, t2)
    i, j = np.unravel_index(int(np.argmax(values)), values.shape)
    theta = [grid[i], grid[j]]
    best = float(values[i, j])

    converged = False
    for _ in range(MAX_REFINE_PASSES):
        previous = best
        for axis in range(2):

            def objective(x, axis=axis):
                trial = list(theta)
                trial[axis] = x
                return -float(fidelity_at(sigma, trial[0], trial[1]))

            res = optimize.minimize_scalar(
                objective,
                bounds=(theta[axis] - step, theta[axis] + step),
                method="bounded",
                options={"xatol": 1e-12},
            )
            if -res.fun > best:
                best = -res.fun
                theta[axis] = float(res.x)
        if best - previous < 1e-15:
            converged = True
            break
    if not converged:
        logger.warning("phase optimization did not converge; reporting best point found")
    return float(best), theta[0] % (2 * math.pi), theta[1] % (2 * math.pi), converged


# Function: fidelity_from_block
def fidelity_from_block(sigma: np.ndarray, phase_mode: str = "per_qubit") -> Dict[str, object]:
    """Optimal phases and the readout density-matrix entries for a qubit block."""
    fidelity, theta1, theta2, converged = optimize_phases(sigma, phase_mode)
    if fidelity > 1.0 + FIDELITY_SLACK:
        logger.warning(
            "Bell fidelity %.12f exceeds 1 (qubit block trace %.12f)",
            fidelity,
            float(np.trace(sigma).real),
        )
    rho = _reduced_at(sigma, theta1, theta2)
    return {
        "bell_fidelity": fidelity,
        "theta1": theta1,
        "theta2": theta2,
        "rho": rho,
        "converged": converged,
    }


# Function: bell_fidelity
def bell_fidelity(
    states: Sequence[EvolutionState],
    n: int,
    settings: Optional[SolverSettings] = None,
    mode: SimulationMode = SimulationMode.AXIAL,
) -> FidelityReport:
    """
    FidelityReport of an evolved ensemble

    Args:
        states: members evolved over the same schedule
        n: Fock levels per atom used in the run
    """
    settings = settings or SolverSettings()
    sigma = qubit_block_from_states(states, n)
    result = fidelity_from_block(sigma, settings.phase_mode)
    rho = result["rho"]
    convergence = ConvergenceRecord(
        n_max=n,
        rtol=settings.rtol,
        atol=settings.atol,
        weight_cutoff=settings.weight_cutoff,
        members=len(states),
        ledger_error=max(s.ledger_error() for s in states),
        overflow_population=max(s.overflow for s in states),
        phase_converged=result["converged"],
    )
    return FidelityReport(
        bell_fidelity=result["bell_fidelity"],
        theta1=result["theta1"],
        theta2=result["theta2"],
        rho_0000=float(rho[0, 0].real),
        rho_1111=float(rho[3, 3].real),
        rho_0011=(float(rho[0, 3].real), float(rho[0, 3].imag)),
        reduced_density=[[(float(v.real), float(v.imag)) for v in row] for row in rho],
        convergence=convergence,
        mode=mode,
        weights=[s.weight for s in states],
    )


# Function: _blockade
def _blockade(setup: PhysicalSetup, gate: GateSpec) -> Tuple[float, str]:
    if gate.blockade is not None:
        return gate.blockade, "gate"
    if gate.kind == GateKind.PI_2PI_PI:
        logger.warning(
            "π-2π-π run uses the configured blockade B = %.6g rad/µs (rydberg.blockade_rad_s)",
            setup.blockade,
        )
    return setup.blockade, "setup"


# Function: build_run
def build_run(
    setup: PhysicalSetup,
    gate: GateSpec,
    mode: SimulationMode = SimulationMode.AXIAL,
    settings: Optional[SolverSettings] = None,
    include_gradient: bool = True,
) -> Tuple[GateHamiltonian, GateSchedule, List[EnsembleMember], str]:
    """Basis, Hamiltonian, schedule and thermal members for one simulation mode."""
    settings = settings or SolverSettings()
    mode = SimulationMode(mode)
    envelopes = gate_envelopes(gate)
    schedule = GateSchedule.from_envelopes(envelopes)
    blockade, source = _blockade(setup, gate)
    gradient = 0.0

    if mode == SimulationMode.INTERNAL_ONLY:
        basis = FockBasis.internal_only()
        members = [EnsembleMember(0, 0, 1.0)]
    elif mode == SimulationMode.AXIAL:
        omega = setup.omega_parallel
        k_kick = effective_wavevector(setup)["K"]
        basis = FockBasis.for_setup(setup, settings.n_max, omega, k_kick)
        members = thermal_ensemble(setup, omega, settings.weight_cutoff, settings.n_max)
    else:
        omega = setup.omega_perp
        spread = math.sqrt(position_variance(setup, omega))
        if spread / setup.r12_um > LINEARIZATION_LIMIT:
            raise LinearizationError(
                "RR_LINEARIZATION",
                "Transverse spread too large for the linear pair-interaction gradient",
                {"rms_y_um": spread, "r12_um": setup.r12_um},
            )
        basis = FockBasis.for_setup(setup, settings.n_max, omega)
        members = thermal_ensemble(setup, omega, settings.weight_cutoff, settings.n_max)
        if include_gradient:
            gradient = settings.rr_phase_sign * 6.0 * blockade * basis.x_zpf / setup.r12_um

    hamiltonian = GateHamiltonian(
        basis,
        envelopes,
        blockade,
        decay_rate=setup.decay_rate,
        trap_on=setup.trap_on,
        rr_gradient=gradient,
    )
    return hamiltonian, schedule, members, source


# Function: schedule_hash
def schedule_hash(gate: GateSpec, schedule: GateSchedule) -> str:
    """SHA-256 of the gate parameters and the integration window they run on."""
    payload = {
        "gate": gate.model_dump(mode="json"),
        "t0": schedule.t0,
        "tf": schedule.tf,
        "max_step": schedule.max_step,
    }
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


# Function: simulate_gate
def simulate_gate(
    setup: PhysicalSetup,
    gate: GateSpec,
    mode: SimulationMode = SimulationMode.AXIAL,
    settings: Optional[SolverSettings] = None,
    include_gradient: bool = True,
    with_time_integrals: bool = False,
) -> FidelityReport:
    """
    Full two-atom dynamics of one gate

    Args:
        mode: axial (kick along the beams, ω∥ basis), internal_only (no motion) or
            transverse_rr (pair-interaction gradient along y, ω⊥ basis)
        with_time_integrals: also run the |11⟩ internal problem for τ_R, τ_RR
    """
    settings = settings or SolverSettings()
    mode = SimulationMode(mode)
    hamiltonian, schedule, members, source = build_run(
        setup, gate, mode, settings, include_gradient
    )
    logger.info(
        "simulate %s (%s): n_max=%d members=%d B=%.6g rad/µs",
        gate.kind.value,
        mode.value,
        hamiltonian.n,
        len(members),
        hamiltonian.blockade,
    )
    states = evolve_ensemble(members, hamiltonian, schedule, settings)
    report = bell_fidelity(states, hamiltonian.n, settings, mode)
    update = {
        "blockade_rad_us": hamiltonian.blockade,
        "blockade_source": source,
        "setup": setup.model_dump(mode="json"),
        "schedule_hash": schedule_hash(gate, schedule),
    }

    if with_time_integrals:
        internal, internal_schedule, _, _ = build_run(
            setup.replace(rydberg_lifetime_us=None), gate, SimulationMode.INTERNAL_ONLY, settings
        )
        update.update(rydberg_time_integrals(internal, internal_schedule, settings))
    return report.model_copy(update=update)


# Function: rr_kick_run
def rr_kick_run(
    setup: PhysicalSetup,
    gate: GateSpec,
    settings: Optional[SolverSettings] = None,
    include_gradient: bool = True,
) -> FidelityReport:
    """Transverse run with the Rydberg-Rydberg force linearized in y₂ - y₁."""
    return simulate_gate(
        setup, gate, SimulationMode.TRANSVERSE_RR, settings, include_gradient=include_gradient
    )
