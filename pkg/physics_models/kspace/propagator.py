"""
Free-atom momentum-space propagation of the excitation pulses.

Each grid momentum k carries an independent two- (or three-) level problem. The
amplitudes are integrated in the frame rotating with E(k), so the stored
kernel value is directly 𝒦₁₁(k) = e^{iE(k)(tf-t0)}U₁₁(k).
"""

import sys
from pathlib import Path

project_root = Path(__file__).parent.parent.parent
if str(project_root) not in sys.path:
    sys.path.insert(0, str(project_root))

import cmath
import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate

from backend.services.errors import (
    ConvergenceError,
    GridCoverageError,
    NonAdiabaticReturnError,
)
from physics_models.kspace.grid import KGrid, thermal_density
from physics_models.units import PhysicalSetup
from pulse_processing.envelopes import PulseEnvelope, PulseFamily

logger = logging.getLogger(__name__)

RTOL = 1e-10
ATOL = 1e-13
COVERAGE_MIN = 0.999
RETURN_THRESHOLD = 1e-4


# Class: KKernel
@dataclass
class KKernel:
    grid: KGrid
    values: np.ndarray
    rydberg_population: np.ndarray
    norm_error: float = 0.0


# Class: ThermalOverlap
@dataclass(frozen=True)
class ThermalOverlap:
    chi: complex
    epsilon: float
    phase: float
    epsilon_motional: float
    coverage: float


# Function: recoil_shift
def recoil_shift(grid: KGrid, k_kick: float, setup: PhysicalSetup) -> np.ndarray:
    """δE(k) = E(k+K) - E(k) in rad/µs."""
    k = grid.k_values()
    return setup.hbar_over_mass * (k_kick * k + 0.5 * k_kick**2)


# Function: _two_level_step
def _two_level_step(c1, cr, rabi: float, shift: np.ndarray, dt: float):
    """Exact propagator of H = [[0, Ω/2], [Ω/2, d]] over dt, vectorized in k."""
    a = 0.5 * rabi
    w = np.sqrt(0.25 * shift**2 + a**2)
    cos = np.cos(w * dt)
    # sin(w t)/w with the w -> 0 limit
    sinc = dt * np.sinc(w * dt / math.pi)
    phase = np.exp(-0.5j * shift * dt)
    new1 = phase * ((cos + 0.5j * shift * sinc) * c1 - 1j * a * sinc * cr)
    newr = phase * ((cos - 0.5j * shift * sinc) * cr - 1j * a * sinc * c1)
    return new1, newr


# Function: _piecewise_kernel
def _piecewise_kernel(envelope, shift, detuning, t0, tf):
    c1 = np.ones_like(shift, dtype=complex)
    cr = np.zeros_like(shift, dtype=complex)
    d = shift + detuning

    if envelope.family == PulseFamily.DELTA_TRAIN:
        now = t0
        for t_kick, area in sorted(envelope.kicks):
            cr = cr * np.exp(-1j * d * (t_kick - now))
            cos, sin = math.cos(0.5 * area), math.sin(0.5 * area)
            c1, cr = cos * c1 - 1j * sin * cr, cos * cr - 1j * sin * c1
            now = t_kick
        cr = cr * np.exp(-1j * d * (tf - now))
        return c1, cr

    edges = sorted({t0, tf, *[p for p in envelope.breakpoints() if t0 < p < tf]})
    for start, stop in zip(edges[:-1], edges[1:]):
        rabi = float(envelope.rabi(0.5 * (start + stop)))
        c1, cr = _two_level_step(c1, cr, rabi, d, stop - start)
    return c1, cr


# Function: _max_step
def _max_step(envelopes: Sequence[PulseEnvelope], t0: float, tf: float) -> float:
    widths = [e.width or e.sigma for e in envelopes if (e.width or e.sigma)]
    step = (tf - t0) / 200.0
    if widths:
        step = min(step, min(widths) / 20.0)
    return step


# Function: _locate_failure
def _locate_failure(rhs_for_index, y0_for_index, nk, t0, tf, max_step, rtol, atol) -> int:
    for i in range(nk):
        sol = integrate.solve_ivp(
            rhs_for_index(i), (t0, tf), y0_for_index(i), method="RK45",
            rtol=rtol, atol=atol, max_step=max_step,
        )
        if not sol.success:
            return i
    return -1


# Function: propagate_two_level
def propagate_two_level(
    grid: KGrid,
    envelope: PulseEnvelope,
    k_kick: float,
    setup: PhysicalSetup,
    t0: Optional[float] = None,
    tf: Optional[float] = None,
    detuning: Optional[float] = None,
    rtol: float = RTOL,
    atol: float = ATOL,
) -> KKernel:
    """
    Return kernel of one pulse sequence for every grid momentum

    Flat-top and delta-train envelopes use the exact two-level propagator on each
    constant segment; smooth envelopes are integrated with RK45.

    Args:
        envelope: Ω(t); its detuning is used unless `detuning` is given
        k_kick: net photon wave number K (rad/µm)
    """
    win0, winf = envelope.window()
    t0 = win0 if t0 is None else t0
    tf = winf if tf is None else tf
    delta = envelope.detuning if detuning is None else detuning
    shift = recoil_shift(grid, k_kick, setup)

    if envelope.is_piecewise_constant:
        c1, cr = _piecewise_kernel(envelope, shift, delta, t0, tf)
    else:
        diag = shift + delta

        def rhs(t, y):
            c1, cr = y[: grid.nk], y[grid.nk :]
            half = 0.5 * float(envelope.rabi(t))
            return np.concatenate([-1j * half * cr, -1j * (diag * cr + half * c1)])

        y0 = np.concatenate([np.ones(grid.nk), np.zeros(grid.nk)]).astype(complex)
        max_step = _max_step([envelope], t0, tf)
        sol = integrate.solve_ivp(
            rhs, (t0, tf), y0, method="RK45", rtol=rtol, atol=atol, max_step=max_step
        )
        if not sol.success:

            def rhs_i(i):
                def f(t, y):
                    half = 0.5 * float(envelope.rabi(t))
                    return np.array([-1j * half * y[1], -1j * (diag[i] * y[1] + half * y[0])])

                return f

            bad = _locate_failure(
                rhs_i, lambda i: np.array([1.0, 0.0], dtype=complex),
                grid.nk, t0, tf, max_step, rtol, atol,
            )
            raise ConvergenceError(
                "KSPACE_INTEGRATION", sol.message, {"k_index": bad, "k": float(grid.k_values()[bad])}
            )
        final = sol.y[:, -1]
        c1, cr = final[: grid.nk], final[grid.nk :]

    norm_error = float(np.max(np.abs(np.abs(c1) ** 2 + np.abs(cr) ** 2 - 1.0)))
    return KKernel(grid=grid, values=c1, rydberg_population=np.abs(cr) ** 2, norm_error=norm_error)


# Function: propagate_delta_kicks
def propagate_delta_kicks(
    grid: KGrid,
    k_kick: float,
    setup: PhysicalSetup,
    kick_times: Sequence[float],
    areas: Sequence[float],
    t0: Optional[float] = None,
    tf: Optional[float] = None,
) -> KKernel:
    """Sudden pulses of the given areas at the given times."""
    envelope = PulseEnvelope(
        family=PulseFamily.DELTA_TRAIN, kicks=list(zip(kick_times, areas))
    )
    return propagate_two_level(grid, envelope, k_kick, setup, t0, tf)


# Function: propagate_stirap
def propagate_stirap(
    grid: KGrid,
    envelope_1: PulseEnvelope,
    envelope_r: PulseEnvelope,
    delta_1: float,
    delta_r: float,
    k1: float,
    k_r: float,
    setup: PhysicalSetup,
    t0: float,
    tf: float,
    rtol: float = RTOL,
    atol: float = ATOL,
) -> KKernel:
    """
    Ladder |1⟩ → |p⟩ → |R⟩ per momentum

    Diagonal (frame of E(k)): |1⟩ at Δ₁, |p⟩ at E(k+K₁)-E(k), |R⟩ at
    E(k+K₁-K_R)-E(k)-Δ_R. Any pulse ordering is accepted.
    """
    k = grid.k_values()
    h_m = setup.hbar_over_mass
    e_k = 0.5 * h_m * k**2
    d1 = np.full(grid.nk, delta_1)
    dp = 0.5 * h_m * (k + k1) ** 2 - e_k
    dr = 0.5 * h_m * (k + k1 - k_r) ** 2 - e_k - delta_r
    n = grid.nk

    def rhs(t, y):
        c1, cp, cr = y[:n], y[n : 2 * n], y[2 * n :]
        a1 = 0.5 * float(envelope_1.rabi(t))
        ar = 0.5 * float(envelope_r.rabi(t))
        return -1j * np.concatenate(
            [d1 * c1 + a1 * cp, dp * cp + a1 * c1 + ar * cr, dr * cr + ar * cp]
        )

    y0 = np.concatenate([np.ones(n), np.zeros(2 * n)]).astype(complex)
    max_step = _max_step([envelope_1, envelope_r], t0, tf)
    sol = integrate.solve_ivp(
        rhs, (t0, tf), y0, method="RK45", rtol=rtol, atol=atol, max_step=max_step
    )
    if not sol.success:
        raise ConvergenceError("KSPACE_INTEGRATION", sol.message, {"k_index": None})
    final = sol.y[:, -1]
    c1, cp, cr = final[:n], final[n : 2 * n], final[2 * n :]
    norm_error = float(
        np.max(np.abs(np.abs(c1) ** 2 + np.abs(cp) ** 2 + np.abs(cr) ** 2 - 1.0))
    )
    return KKernel(grid=grid, values=c1, rydberg_population=np.abs(cr) ** 2, norm_error=norm_error)


# Function: chi_thermal
def chi_thermal(
    kernel: KKernel, setup: PhysicalSetup, omega: Optional[float] = None
) -> ThermalOverlap:
    """
    χ = Σ δk ρ(k,k) 𝒦₁₁(k) over the thermal momentum distribution

    The discrete ρ sum is renormalized to 1; coverage below 0.999 is an error.
    """
    rho = thermal_density(kernel.grid, setup, omega)
    weights = kernel.grid.dk * rho
    coverage = float(np.sum(weights))
    if coverage < COVERAGE_MIN:
        raise GridCoverageError(
            "KSPACE_GRID_COVERAGE",
            "Momentum grid does not cover the thermal distribution",
            {"coverage": coverage},
        )
    weights = weights / coverage
    chi = complex(np.sum(weights * kernel.values))
    magnitude_mean = float(np.sum(weights * np.abs(kernel.values)))
    return ThermalOverlap(
        chi=chi,
        epsilon=1.0 - abs(chi),
        phase=cmath.phase(chi),
        epsilon_motional=1.0 - abs(chi) / magnitude_mean if magnitude_mean > 0 else 0.0,
        coverage=coverage,
    )


# Function: tau_a
def tau_a(
    envelope: PulseEnvelope,
    detuning: Optional[float] = None,
    threshold: float = RETURN_THRESHOLD,
    rtol: float = RTOL,
    atol: float = ATOL,
) -> float:
    """
    Time-integrated Rydberg population ∫P_R dt (µs) of the δE = 0 problem

    Raises NonAdiabaticReturnError when the pulse leaves more than `threshold`
    population in |R⟩.
    """
    delta = envelope.detuning if detuning is None else detuning
    t0, tf = envelope.window()

    def rhs(t, y):
        half = 0.5 * float(envelope.rabi(t))
        c1, cr = y[0], y[1]
        return np.array([-1j * half * cr, -1j * (delta * cr + half * c1), abs(cr) ** 2])

    sol = integrate.solve_ivp(
        rhs,
        (t0, tf),
        np.array([1.0, 0.0, 0.0], dtype=complex),
        method="RK45",
        rtol=rtol,
        atol=atol,
        max_step=_max_step([envelope], t0, tf),
    )
    if not sol.success:
        raise ConvergenceError("KSPACE_INTEGRATION", sol.message, {"k_index": 0})
    final = sol.y[:, -1]
    residual = abs(final[1]) ** 2
    if residual > threshold:
        raise NonAdiabaticReturnError(
            "NON_ADIABATIC_RETURN",
            "Pulse does not return the population from |R⟩",
            {"final_rydberg_population": float(residual)},
        )
    return float(final[2].real)


# Function: tau_a_adiabatic
def tau_a_adiabatic(envelope: PulseEnvelope, detuning: Optional[float] = None, n_points: int = 4001) -> float:
    """½∫[1 - |Δ|/√(Δ²+Ω²)] dt for adiabatic following."""
    delta = envelope.detuning if detuning is None else detuning
    t0, tf = envelope.window()
    t = np.linspace(t0, tf, n_points)
    rabi = envelope.rabi(t)
    return float(
        integrate.simpson(0.5 * (1.0 - abs(delta) / np.sqrt(delta**2 + rabi**2)), x=t)
    )


# Function: adiabatic_phase_check
def adiabatic_phase_check(
    envelope: PulseEnvelope,
    delta_e: float,
    detuning: Optional[float] = None,
    n_points: int = 4001,
) -> float:
    """
    Recoil-induced phase α of the adiabatic kernel, 𝒦₁₁(δE) = 𝒦₁₁(0)e^{-iα}

    Integrates the difference of adiabatic eigenvalues with and without the
    recoil shift; α ≈ δE·τ_a in the linear regime.
    """
    delta = envelope.detuning if detuning is None else detuning
    t0, tf = envelope.window()
    t = np.linspace(t0, tf, n_points)
    rabi = envelope.rabi(t)
    sign = math.copysign(1.0, delta)
    shifted = np.sqrt((delta + delta_e) ** 2 + rabi**2)
    bare = np.sqrt(delta**2 + rabi**2)
    integrand = -0.5 * sign * (shifted - bare) + 0.5 * delta_e
    return float(integrate.simpson(integrand, x=t))
