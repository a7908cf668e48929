"""
Bell-state infidelity estimates and their additive error budgets.
"""

import sys
from pathlib import Path

project_root = Path(__file__).parent.parent.parent
if str(project_root) not in sys.path:
    sys.path.insert(0, str(project_root))

import math
from typing import Dict, Optional

from physics_models.analytic.focusing import eps_focusing
from physics_models.analytic.overlaps import (
    KickTiming,
    chi_single_2pi,
    eps_ho_trap_on,
    kick_rate,
)
from physics_models.units import (
    PhysicalSetup,
    UnitSystem,
    effective_temperature,
    effective_wavevector,
    recoil_energy,
)


# Function: infidelity_pi2pipi_kick
def infidelity_pi2pipi_kick(setup: PhysicalSetup, tau1: float, tau2: float) -> float:
    """1 - F = (K²k_BT_eff/2M)(τ₁²/2 + 3τ₂²/8) for axial kicks of the π-2π-π gate."""
    return kick_rate(setup) * (0.5 * tau1**2 + 0.375 * tau2**2)


# Function: infidelity_radiative
def infidelity_radiative(gamma: float, tau1: float, tau2: float) -> float:
    """1 - F = Γ(τ₁/2 + τ₂/4); gamma in 1/µs."""
    return gamma * (0.5 * tau1 + 0.25 * tau2)


# Function: infidelity_adiabatic_kick
def infidelity_adiabatic_kick(setup: PhysicalSetup, tau_a: float, tau_R: float) -> float:
    return kick_rate(setup) * (0.5 * tau_a**2 + 0.5 * tau_R**2 + 0.25 * (tau_R - tau_a) ** 2)


# Function: infidelity_adiabatic_radiative
def infidelity_adiabatic_radiative(gamma: float, tau_a: float, tau_R: float) -> float:
    """Photon-count estimate Γ(τ_a + τ_R)/2 for the single-pulse gate from |in⟩."""
    return 0.5 * gamma * (tau_a + tau_R)


# Function: infidelity_rydberg_kick
def infidelity_rydberg_kick(setup: PhysicalSetup, tau_RR: float) -> float:
    """
    Transverse impulse from the pair interaction gradient

    1 - F = 27 B² k_BT_eff τ_RR² / (2 M ω⊥² r12²), T_eff taken at ω⊥.
    """
    omega = setup.omega_perp
    kt_eff = effective_temperature(setup, omega)
    b = setup.blockade
    return (
        27.0
        * b**2
        * kt_eff
        * setup.hbar_over_mass
        * tau_RR**2
        / (2.0 * omega**2 * setup.r12_um**2)
    )


# Function: infidelity_trap_off_prediction
def infidelity_trap_off_prediction(setup: PhysicalSetup, tau1: float, tau2: float) -> float:
    return infidelity_pi2pipi_kick(setup, tau1, tau2)


# Function: infidelity_trap_on_prediction
def infidelity_trap_on_prediction(setup: PhysicalSetup, tau1: float, tau2: float) -> float:
    """ε^(HO)(τ₁)/2 + 3ε^(2)/8 with the trap kept on between the π pulses."""
    return 0.5 * eps_ho_trap_on(setup, tau1).epsilon_leading + 0.375 * (
        chi_single_2pi(setup, tau2).epsilon_leading
    )


# Function: doppler_asymptotics
def doppler_asymptotics(setup: PhysicalSetup, tau1: float) -> Dict[str, float]:
    """
    Temperature dependence of ε^(1)

    Returns:
        exact (coth form), low_T, high_T, high_T_leading (bracket correction
        dropped) and the fractional errors of the two high-T forms against exact.
    """
    omega = setup.omega_parallel
    k_net = effective_wavevector(setup)["K"]
    scale = k_net**2 * tau1**2 * setup.hbar_over_mass
    kt = setup.kt

    if kt == 0.0:
        exact = 0.25 * scale * omega
        return {
            "exact": exact,
            "low_T": exact,
            "high_T": 0.0,
            "high_T_leading": 0.0,
            "high_T_error": float("nan"),
            "high_T_leading_error": float("nan"),
        }

    x = omega / kt
    exact = 0.25 * scale * omega / math.tanh(0.5 * x)
    low_t = 0.25 * scale * omega * (1.0 + 2.0 * math.exp(-x))
    leading = 0.5 * scale * kt
    high_t = leading * (1.0 + x**2 / 12.0)
    return {
        "exact": exact,
        "low_T": low_t,
        "high_T": high_t,
        "high_T_leading": leading,
        "high_T_error": abs(high_t - exact) / exact,
        "high_T_leading_error": abs(leading - exact) / exact,
    }


# Function: heating_estimates
def heating_estimates(
    setup: PhysicalSetup, tau1: float, tau_off: float, n_gates: int
) -> Dict[str, float]:
    """
    Heating per kick with the trap on, and after N trap release cycles

    Args:
        tau1: time between the kicks (µs)
        tau_off: trap-off duration per gate (µs)
        n_gates: number of gates N
    """
    omega = setup.omega_parallel
    e_rec = recoil_energy(setup)["E_rec"]
    d_e = e_rec * (omega * tau1) ** 2
    factor = math.exp(0.5 * n_gates * (omega * tau_off) ** 2)
    t_eff = UnitSystem.temperature_to_si(effective_temperature(setup, omega))
    return {
        "dE_per_kick": d_e,
        "dE_over_kb_nk": UnitSystem.temperature_to_si(d_e) * 1e9,
        "T_eff_k": t_eff,
        "T_after_N_k": t_eff * factor,
        "T_ratio": factor,
    }


# Function: pi2pipi_budget
def pi2pipi_budget(
    setup: PhysicalSetup, timing: KickTiming, include_focusing: bool = False
) -> Dict[str, float]:
    """Additive error budget of the π-2π-π gate."""
    kick = (
        infidelity_trap_on_prediction(setup, timing.tau1, timing.tau2)
        if setup.trap_on
        else infidelity_pi2pipi_kick(setup, timing.tau1, timing.tau2)
    )
    budget = {
        "kick": kick,
        "radiative": infidelity_radiative(setup.decay_rate, timing.tau1, timing.tau2),
    }
    if include_focusing:
        budget["focusing"] = eps_focusing(setup)["eps_full"]
    budget["total"] = sum(budget.values())
    return budget


# Function: adiabatic_budget
def adiabatic_budget(
    setup: PhysicalSetup, timing: KickTiming, intrinsic: Optional[float] = None
) -> Dict[str, float]:
    """Additive error budget of the single-pulse adiabatic gate."""
    budget = {
        "kick": infidelity_adiabatic_kick(setup, timing.tau_a, timing.tau_R),
        "radiative": infidelity_adiabatic_radiative(
            setup.decay_rate, timing.tau_a, timing.tau_R
        ),
        "rydberg_force": infidelity_rydberg_kick(setup, timing.tau_RR),
    }
    if intrinsic is not None:
        budget["intrinsic"] = intrinsic
    budget["total"] = sum(budget.values())
    return budget
