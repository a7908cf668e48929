import sys
from pathlib import Path

project_root = Path(__file__).parent.parent.parent
if str(project_root) not in sys.path:
    sys.path.insert(0, str(project_root))

import logging
from typing import Optional, Sequence

import numpy as np
from scipy import integrate

from backend.services.errors import ConvergenceError, DimensionError
from physics_models.vibrational.evolution import (
    EnsembleMember,
    SolverSettings,
    bell_input_amplitudes,
)
from physics_models.vibrational.hamiltonian import DARK, GateHamiltonian, GateSchedule

logger = logging.getLogger(__name__)

LINDBLAD_MAX_LEVELS = 3
FULL_INTERNAL = DARK + 1


# Function: ensemble_density
def ensemble_density(
    members: Sequence[EnsembleMember], n: int, internal: Optional[np.ndarray] = None
) -> np.ndarray:
    """Σ w |ψ⟩⟨ψ| over product states on the full (0, 1, R, d) layout."""
    internal = bell_input_amplitudes() if internal is None else internal
    dim = FULL_INTERNAL * n
    rho = np.zeros((dim * dim, dim * dim), dtype=complex)
    for member in members:
        psi = np.zeros((dim, dim), dtype=complex)
        for a in range(internal.shape[0]):
            for b in range(internal.shape[1]):
                psi[a * n + member.n1, b * n + member.n2] = internal[a, b]
        vec = psi.ravel()
        rho += member.weight * np.outer(vec, vec.conj())
    return rho


# Function: lindblad_reference
def lindblad_reference(
    rho0: np.ndarray,
    hamiltonian: GateHamiltonian,
    schedule: GateSchedule,
    settings: Optional[SolverSettings] = None,
) -> np.ndarray:
    """
    Dense master-equation oracle, dρ/dt = -i[H, ρ] + Σⱼ LⱼρLⱼ† - ½{Lⱼ†Lⱼ, ρ}

    Lⱼ = √Γ|d⟩⟨R| on atom j. Only small bases are allowed.
    """
    if hamiltonian.n > LINDBLAD_MAX_LEVELS:
        raise DimensionError(
            "LINDBLAD_TOO_LARGE",
            "Dense Lindblad reference is limited to small bases",
            {"n_max": hamiltonian.n, "limit": LINDBLAD_MAX_LEVELS},
        )
    settings = settings or SolverSettings()
    jumps = hamiltonian.jump_operators()
    drain = sum(j.conj().T @ j for j in jumps)
    dim = rho0.shape[0]

    def rhs(t, y):
        rho = y.reshape(dim, dim)
        h_eff = hamiltonian.dense(t) - 0.5j * drain
        out = -1j * (h_eff @ rho - rho @ h_eff.conj().T)
        for jump in jumps:
            out += jump @ rho @ jump.conj().T
        return out.ravel()

    sol = integrate.solve_ivp(
        rhs,
        (schedule.t0, schedule.tf),
        rho0.ravel().astype(complex),
        method=settings.method,
        rtol=settings.rtol,
        atol=settings.atol,
        max_step=schedule.max_step,
    )
    if not sol.success:
        raise ConvergenceError("LINDBLAD_INTEGRATION", sol.message, {"t": float(sol.t[-1])})
    rho = sol.y[:, -1].reshape(dim, dim)
    logger.debug("lindblad trace drift %.2e", abs(np.trace(rho) - np.trace(rho0)))
    return rho
