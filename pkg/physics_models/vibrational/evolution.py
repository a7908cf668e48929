"""
Pure-state ensemble evolution under the non-Hermitian gate Hamiltonian.

A thermal two-atom state is a weighted mixture of Fock-product states; each member
is evolved as a wave function under H - iΓ/2 Σⱼ|Rⱼ⟩⟨Rⱼ|. Decayed population
goes to |d⟩, which never couples back, so the qubit block of the density matrix
is reproduced exactly.
"""

import sys
from pathlib import Path

project_root = Path(__file__).parent.parent.parent
if str(project_root) not in sys.path:
    sys.path.insert(0, str(project_root))

import logging
from dataclasses import dataclass, field
from typing import Dict, List, NamedTuple, Optional, Sequence

import numpy as np
from scipy import integrate

from backend.services.errors import ConvergenceError, DimensionError
from physics_models.units import PhysicalSetup
from physics_models.vibrational.hamiltonian import (
    ACTIVE_INTERNAL,
    DARK,
    QUBIT,
    RYDBERG,
    GateHamiltonian,
    GateSchedule,
)

logger = logging.getLogger(__name__)

# ledger entries carried next to the amplitudes: loss, ∫P_R1, ∫P_1R, ∫P_RR
AUX = 4


# Class: SolverSettings
@dataclass
class SolverSettings:
    method: str = "DOP853"
    rtol: float = 1e-10
    atol: float = 1e-13
    n_max: int = 11
    weight_cutoff: float = 1e-4
    phase_mode: str = "per_qubit"
    rr_phase_sign: int = 1
    overflow_threshold: float = 1e-6
    batch_size: int = 64

    # Function: from_config
    @classmethod
    def from_config(cls, config) -> "SolverSettings":
        return cls(
            method=config.get("solver.method", "DOP853"),
            rtol=float(config.get("solver.rtol", 1e-10)),
            atol=float(config.get("solver.atol", 1e-13)),
            n_max=int(config.get("solver.n_max", 11)),
            weight_cutoff=float(config.get("solver.weight_cutoff", 1e-4)),
            phase_mode=config.get("solver.phase_mode", "per_qubit"),
            rr_phase_sign=int(config.get("solver.rr_phase_sign", 1)),
            overflow_threshold=float(config.get("solver.overflow_threshold", 1e-6)),
            batch_size=int(config.get("solver.batch_size", 64)),
        )


# Class: EnsembleMember
class EnsembleMember(NamedTuple):
    n1: int
    n2: int
    weight: float


# Class: EvolutionState
@dataclass
class EvolutionState:
    """
    Final wave function of one ensemble member

    `amplitudes` is (4n, 4n): row = atom 1 (internal, vib), column = atom 2. The
    |d⟩ blocks are zero; the decayed norm is in `loss`.
    """

    member: EnsembleMember
    amplitudes: np.ndarray
    loss: float = 0.0
    integrals: Dict[str, float] = field(default_factory=dict)
    overflow: float = 0.0

    # Function: weight
    @property
    def weight(self) -> float:
        return self.member.weight

    # Function: norm
    def norm(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2))

    # Function: ledger_error
    def ledger_error(self) -> float:
        return abs(self.norm() + self.loss - 1.0)


# Function: thermal_ensemble
def thermal_ensemble(
    setup: PhysicalSetup,
    omega: float,
    weight_cutoff: float = 1e-4,
    n_max: Optional[int] = None,
) -> List[EnsembleMember]:
    """
    Product Boltzmann members (n₁, n₂, P(n₁)P(n₂))

    Whole shells of constant n₁+n₂ are added until the kept weight reaches
    1 - weight_cutoff; the weights are then renormalized.
    """
    if not 0.0 < weight_cutoff <= 1.0:
        raise ValueError("weight_cutoff must lie in (0, 1]")
    kt = setup.kt
    if kt == 0.0:
        return [EnsembleMember(0, 0, 1.0)]

    p = np.exp(-omega / kt)
    norm = (1.0 - p) ** 2
    members: List[EnsembleMember] = []
    kept = 0.0
    shell = 0
    while kept < 1.0 - weight_cutoff:
        w = norm * p**shell
        for n1 in range(shell + 1):
            members.append(EnsembleMember(n1, shell - n1, w))
        kept += w * (shell + 1)
        shell += 1

    top = shell - 1
    if n_max is not None and top >= n_max:
        raise DimensionError(
            "BASIS_TOO_SMALL",
            "Thermal ensemble needs Fock levels beyond the basis",
            {"highest_level": top, "n_max": n_max},
        )
    return [EnsembleMember(m.n1, m.n2, m.weight / kept) for m in members]


# Function: bell_input_amplitudes
def bell_input_amplitudes() -> np.ndarray:
    """Internal amplitudes of H⊗H|11⟩ on (|0⟩, |1⟩, |R⟩)²."""
    c = np.zeros((ACTIVE_INTERNAL, ACTIVE_INTERNAL), dtype=complex)
    c[:2, :2] = 0.5 * np.array([[1.0, -1.0], [-1.0, 1.0]])
    return c


# Function: pair_input_amplitudes
def pair_input_amplitudes() -> np.ndarray:
    """Internal amplitudes of |11⟩."""
    c = np.zeros((ACTIVE_INTERNAL, ACTIVE_INTERNAL), dtype=complex)
    c[QUBIT, QUBIT] = 1.0
    return c


# Function: initial_state
def initial_state(internal: np.ndarray, n: int, member: EnsembleMember) -> np.ndarray:
    """Product of internal amplitudes with |n₁⟩|n₂⟩, as a (3n, 3n) matrix."""
    psi = np.zeros((ACTIVE_INTERNAL * n, ACTIVE_INTERNAL * n), dtype=complex)
    for a in range(ACTIVE_INTERNAL):
        for b in range(ACTIVE_INTERNAL):
            if internal[a, b] != 0:
                psi[a * n + member.n1, b * n + member.n2] = internal[a, b]
    return psi


# Function: internal_populations
def internal_populations(psi: np.ndarray, n: int) -> np.ndarray:
    """(members, 3, 3) populations of internal pairs, vibration traced out."""
    m = psi.shape[0]
    prob = np.abs(psi.reshape(m, ACTIVE_INTERNAL, n, ACTIVE_INTERNAL, n)) ** 2
    return prob.sum(axis=(2, 4))


# Function: _overflow
def _overflow(psi: np.ndarray, n: int) -> np.ndarray:
    """Population in the two highest Fock levels of either atom."""
    if n <= 2:
        return np.zeros(psi.shape[0])
    m = psi.shape[0]
    prob = np.abs(psi.reshape(m, ACTIVE_INTERNAL, n, ACTIVE_INTERNAL, n)) ** 2
    atom1 = prob[:, :, n - 2 :, :, :].sum(axis=(1, 2, 3, 4))
    atom2 = prob[:, :, :, :, n - 2 :].sum(axis=(1, 2, 3, 4))
    return np.maximum(atom1, atom2)


# Function: _embed_dark
def _embed_dark(psi: np.ndarray, n: int) -> np.ndarray:
    full = np.zeros(((DARK + 1) * n, (DARK + 1) * n), dtype=complex)
    full[: ACTIVE_INTERNAL * n, : ACTIVE_INTERNAL * n] = psi
    return full


# Function: _evolve_batch
def _evolve_batch(
    batch: Sequence[EnsembleMember],
    hamiltonian: GateHamiltonian,
    schedule: GateSchedule,
    settings: SolverSettings,
    internal: np.ndarray,
) -> List[EvolutionState]:
    n = hamiltonian.n
    dim = ACTIVE_INTERNAL * n
    m = len(batch)
    size = m * dim * dim
    gamma = hamiltonian.decay_rate

    psi0 = np.stack([initial_state(internal, n, member) for member in batch])
    y0 = np.concatenate([psi0.ravel(), np.zeros(m * AUX, dtype=complex)])

    def rhs(t, y):
        psi = y[:size].reshape(m, dim, dim)
        d_psi = -1j * hamiltonian.apply(t, psi)
        pops = internal_populations(psi, n)
        aux = np.empty((m, AUX), dtype=complex)
        aux[:, 0] = gamma * (pops[:, RYDBERG, :].sum(axis=1) + pops[:, :, RYDBERG].sum(axis=1))
        aux[:, 1] = pops[:, RYDBERG, QUBIT]
        aux[:, 2] = pops[:, QUBIT, RYDBERG]
        aux[:, 3] = pops[:, RYDBERG, RYDBERG]
        return np.concatenate([d_psi.ravel(), aux.ravel()])

    sol = integrate.solve_ivp(
        rhs,
        (schedule.t0, schedule.tf),
        y0,
        method=settings.method,
        rtol=settings.rtol,
        atol=settings.atol,
        max_step=schedule.max_step,
    )
    if not sol.success:
        raise ConvergenceError(
            "STEP_SIZE_UNDERFLOW",
            sol.message,
            {"members": [tuple(member[:2]) for member in batch], "t": float(sol.t[-1])},
        )

    final = sol.y[:, -1]
    psi = final[:size].reshape(m, dim, dim)
    aux = final[size:].reshape(m, AUX).real
    overflow = _overflow(psi, n)

    states = []
    for i, member in enumerate(batch):
        if overflow[i] > settings.overflow_threshold:
            logger.warning(
                "basis overflow: member (%d, %d) has %.2e in the top two Fock levels of n_max=%d",
                member.n1,
                member.n2,
                overflow[i],
                n,
            )
        states.append(
            EvolutionState(
                member=member,
                amplitudes=_embed_dark(psi[i], n),
                loss=float(aux[i, 0]),
                integrals={
                    "P_R1": float(aux[i, 1]),
                    "P_1R": float(aux[i, 2]),
                    "P_RR": float(aux[i, 3]),
                },
                overflow=float(overflow[i]),
            )
        )
    return states


# Function: evolve_ensemble
def evolve_ensemble(
    members: Sequence[EnsembleMember],
    hamiltonian: GateHamiltonian,
    schedule: GateSchedule,
    settings: Optional[SolverSettings] = None,
    internal: Optional[np.ndarray] = None,
) -> List[EvolutionState]:
    """
    Evolve every member over the same schedule, batched into shared solves

    Args:
        internal: initial internal amplitudes (default H⊗H|11⟩)

    Returns:
        one EvolutionState per member, in input order
    """
    settings = settings or SolverSettings()
    internal = bell_input_amplitudes() if internal is None else internal
    for member in members:
        if max(member.n1, member.n2) >= hamiltonian.n:
            raise DimensionError(
                "BASIS_TOO_SMALL",
                "Ensemble member outside the Fock basis",
                {"member": tuple(member), "n_max": hamiltonian.n},
            )
    states: List[EvolutionState] = []
    step = max(1, settings.batch_size)
    for start in range(0, len(members), step):
        states.extend(
            _evolve_batch(members[start : start + step], hamiltonian, schedule, settings, internal)
        )
    logger.debug("evolved %d members on n_max=%d", len(states), hamiltonian.n)
    return states


# Function: evolve_member
def evolve_member(
    member: EnsembleMember,
    hamiltonian: GateHamiltonian,
    schedule: GateSchedule,
    settings: Optional[SolverSettings] = None,
    internal: Optional[np.ndarray] = None,
) -> EvolutionState:
    return evolve_ensemble([member], hamiltonian, schedule, settings, internal)[0]


# Function: rydberg_time_integrals
def rydberg_time_integrals(
    hamiltonian: GateHamiltonian,
    schedule: GateSchedule,
    settings: Optional[SolverSettings] = None,
) -> Dict[str, float]:
    """
    τ_R = ½∫(P_R1 + P_1R + 2P_RR) dt and τ_RR = ∫P_RR dt from |11⟩ (µs)

    Meant for internal-state runs (n_max = 1, no kick).
    """
    state = evolve_member(
        EnsembleMember(0, 0, 1.0), hamiltonian, schedule, settings, pair_input_amplitudes()
    )
    p = state.integrals
    return {
        "tau_R": 0.5 * (p["P_R1"] + p["P_1R"] + 2.0 * p["P_RR"]),
        "tau_RR": p["P_RR"],
    }
