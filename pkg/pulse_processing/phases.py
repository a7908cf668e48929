"""
Adiabatic and propagated phases of the single-pulse C_Z gate.

Rotating-frame convention used throughout: |1⟩ sits at zero, |R⟩ at +Δ and
|RR⟩ at 2Δ + B. Table-I style parameters (Δ/Ω₀ < 0, B > 0) put the Rydberg
level below the laser and the pair level above it.
"""

import sys
from pathlib import Path

project_root = Path(__file__).parent.parent
if str(project_root) not in sys.path:
    sys.path.insert(0, str(project_root))

import logging
import math
from typing import Callable, Dict, Optional

import numpy as np
from scipy import integrate

from backend.services.errors import BranchTrackingError, ConvergenceError
from pulse_processing.envelopes import PulseEnvelope

logger = logging.getLogger(__name__)

MIN_OVERLAP = 0.9
MAX_HALVINGS = 12
MARGIN_SENTINEL = sys.float_info.max
RTOL = 1e-10
ATOL = 1e-12


# Function: cz_phase_defect
def cz_phase_defect(phi01: float, phi10: float, phi11: float, rule: str = "sum") -> float:
    """
    Distance (rad) from the nearest odd multiple of π

    The default rule="sum" measures φ₀₁ + φ₁₀ + φ₁₁. It depends on where the
    |1⟩ level sits in the rotating frame (shifting it by ε moves the sum by
    4εT), so it only means something for phases quoted in a fixed frame.

    rule="entangling" measures φ₁₁ - φ₀₁ - φ₁₀, the combination left after the
    single-qubit phase corrections. It is frame independent and is what the
    parameter search and the validation rows use.
    """
    if rule == "sum":
        combo = phi01 + phi10 + phi11
    elif rule == "entangling":
        combo = phi11 - phi01 - phi10
    else:
        raise ValueError(f"unknown rule {rule}")
    r = (combo - math.pi) % (2.0 * math.pi)
    return min(r, 2.0 * math.pi - r)


# Function: signed_phase_residual
def signed_phase_residual(phi01: float, phi10: float, phi11: float) -> float:
    """Entangling combination minus π, wrapped to (-π, π]."""
    r = (phi11 - phi01 - phi10 - math.pi) % (2.0 * math.pi)
    return r - 2.0 * math.pi if r > math.pi else r


# Function: one_atom_hamiltonian
def one_atom_hamiltonian(rabi: np.ndarray, detuning: float) -> np.ndarray:
    """Stack of 2x2 matrices in (|1⟩, |R⟩)."""
    h = np.zeros((len(rabi), 2, 2))
    h[:, 0, 1] = h[:, 1, 0] = 0.5 * rabi
    h[:, 1, 1] = detuning
    return h


# Function: two_atom_hamiltonian
def two_atom_hamiltonian(rabi: np.ndarray, detuning: float, blockade: float) -> np.ndarray:
    """Stack of 3x3 matrices in (|11⟩, (|1R⟩+|R1⟩)/√2, |RR⟩)."""
    h = np.zeros((len(rabi), 3, 3))
    coupling = rabi / math.sqrt(2.0)
    h[:, 0, 1] = h[:, 1, 0] = coupling
    h[:, 1, 2] = h[:, 2, 1] = coupling
    h[:, 1, 1] = detuning
    h[:, 2, 2] = 2.0 * detuning + blockade
    return h


# Function: _follow
def _follow(
    build: Callable[[np.ndarray], np.ndarray],
    t_a: float,
    t_b: float,
    vec: np.ndarray,
    depth: int,
) -> np.ndarray:
    """Carry an eigenvector from t_a to t_b, halving the step while the overlap is ambiguous."""
    _, vecs = np.linalg.eigh(build(np.array([t_b]))[0])
    overlaps = np.abs(vec.conj() @ vecs)
    j = int(np.argmax(overlaps))
    if overlaps[j] >= MIN_OVERLAP:
        return vecs[:, j]
    if depth == 0:
        raise BranchTrackingError(
            "BRANCH_TRACKING",
            "Eigenvector overlap between steps below threshold",
            {"t_a": t_a, "t_b": t_b, "overlap": float(overlaps[j])},
        )
    t_m = 0.5 * (t_a + t_b)
    mid = _follow(build, t_a, t_m, vec, depth - 1)
    return _follow(build, t_m, t_b, mid, depth - 1)


# Function: track_branch
def track_branch(
    build: Callable[[np.ndarray], np.ndarray], times: np.ndarray, start_index: int = 0
) -> np.ndarray:
    """
    Eigenvalue branch continuously connected to basis state `start_index` at times[0]

    Args:
        build: maps a time array to a stack of real symmetric Hamiltonians

    Returns:
        eigenvalue along the branch at every time
    """
    vals, vecs = np.linalg.eigh(build(times))
    j = int(np.argmax(np.abs(vecs[0][start_index, :])))
    branch = np.empty(len(times))
    branch[0] = vals[0, j]
    vec = vecs[0][:, j]

    for i in range(1, len(times)):
        overlaps = np.abs(vec.conj() @ vecs[i])
        j = int(np.argmax(overlaps))
        if overlaps[j] < MIN_OVERLAP:
            vec = _follow(build, times[i - 1], times[i], vec, MAX_HALVINGS)
            overlaps = np.abs(vec.conj() @ vecs[i])
            j = int(np.argmax(overlaps))
        branch[i] = vals[i, j]
        vec = vecs[i][:, j]
    return branch


# Function: dynamical_phases
def dynamical_phases(
    envelope: PulseEnvelope, blockade: float, n_points: int = 4001
) -> Dict[str, float]:
    """
    Adiabatic dynamical phases φ = ∫λ dt of the |1⟩ and |11⟩ branches

    Args:
        envelope: pulse applied to both atoms (detuning taken from it)
        blockade: B in rad/µs

    Returns:
        phi01, phi10 (= phi01), phi11, and the entangling combination
    """
    t0, tf = envelope.window()
    times = np.linspace(t0, tf, n_points)
    delta = envelope.detuning

    lam1 = track_branch(lambda t: one_atom_hamiltonian(envelope.rabi(t), delta), times)
    lam2 = track_branch(
        lambda t: two_atom_hamiltonian(envelope.rabi(t), delta, blockade), times
    )
    phi01 = float(integrate.simpson(lam1, x=times))
    phi11 = float(integrate.simpson(lam2, x=times))
    return {
        "phi01": phi01,
        "phi10": phi01,
        "phi11": phi11,
        "entangling": phi11 - 2.0 * phi01,
    }


# Function: propagated_phases
def propagated_phases(
    envelope: PulseEnvelope, blockade: float, rtol: float = RTOL, atol: float = ATOL
) -> Dict[str, float]:
    """
    Gate phases from the time-dependent Schrödinger equation

    Same frame and sign as dynamical_phases (φ = -arg c at the end of the
    window), so the two agree in the adiabatic limit. Non-adiabatic
    corrections and imperfect return to the qubit states are included.

    Args:
        envelope: pulse applied to both atoms (detuning taken from it)
        blockade: B in rad/µs

    Returns:
        phi01, phi10 (= phi01), phi11, entangling, and the return
        probabilities p01 and p11
    """
    t0, tf = envelope.window()
    delta = envelope.detuning
    pair = 2.0 * delta + blockade
    root2 = math.sqrt(2.0)

    # (c1, cR) for one atom, (c11, cW, cRR) for the pair
    def rhs(t, y):
        rabi = float(envelope.rabi(t))
        half, coupling = 0.5 * rabi, rabi / root2
        return -1j * np.array(
            [
                half * y[1],
                half * y[0] + delta * y[1],
                coupling * y[3],
                coupling * (y[2] + y[4]) + delta * y[3],
                coupling * y[3] + pair * y[4],
            ]
        )

    y0 = np.array([1.0, 0.0, 1.0, 0.0, 0.0], dtype=complex)
    sol = integrate.solve_ivp(
        rhs,
        (t0, tf),
        y0,
        method="DOP853",
        rtol=rtol,
        atol=atol,
        max_step=(tf - t0) / 200.0,
    )
    if not sol.success:
        raise ConvergenceError(
            "PHASE_INTEGRATION", sol.message, {"blockade": blockade, "detuning": delta}
        )
    c1, c11 = sol.y[0, -1], sol.y[2, -1]
    phi01 = -float(np.angle(c1))
    phi11 = -float(np.angle(c11))
    return {
        "phi01": phi01,
        "phi10": phi01,
        "phi11": phi11,
        "entangling": phi11 - 2.0 * phi01,
        "p01": float(abs(c1) ** 2),
        "p11": float(abs(c11) ** 2),
    }


# Function: adiabaticity_margin
def adiabaticity_margin(
    envelope: PulseEnvelope, detuning: Optional[float] = None, n_points: int = 4001
) -> float:
    """
    min_t √(Δ²+Ω²)/|dθ/dt| with tan 2θ = Ω/Δ

    Returns MARGIN_SENTINEL when the mixing angle never moves.
    """
    delta = envelope.detuning if detuning is None else detuning
    t0, tf = envelope.window()
    times = np.linspace(t0, tf, n_points)
    rabi = envelope.rabi(times)
    d_rabi = envelope.derivative(times)
    gap2 = delta**2 + rabi**2
    with np.errstate(divide="ignore", invalid="ignore"):
        theta_dot = np.abs(0.5 * delta * d_rabi / gap2)
        ratio = np.sqrt(gap2) / theta_dot
    ratio = ratio[np.isfinite(ratio) & (theta_dot > 0)]
    if ratio.size == 0:
        return MARGIN_SENTINEL
    return float(ratio.min())
