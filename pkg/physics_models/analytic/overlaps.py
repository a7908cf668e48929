"""
Closed-form motional overlaps χ and decoherence ε = 1 - |χ|.

Every function is pure in (setup, timing). The leading-order Taylor value is
kept alongside the exact modulus so that callers can see when a formula is
being used outside its regime.
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
from typing import Optional

from physics_models.units import (
    PhysicalSetup,
    effective_temperature,
    effective_wavevector,
)

logger = logging.getLogger(__name__)

LEADING_ORDER_LIMIT = 0.1


# Class: KickTiming
@dataclass(frozen=True)
class KickTiming:
    """Exposure times of a gate (µs)."""

    tau1: float = 0.0
    tau2: float = 0.0
    tau_a: float = 0.0
    tau_R: float = 0.0
    tau_RR: float = 0.0

    # Function: __post_init__
    def __post_init__(self):
        for name in ("tau1", "tau2", "tau_a", "tau_R", "tau_RR"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")


# Class: OverlapResult
@dataclass(frozen=True)
class OverlapResult:
    chi: complex
    epsilon: float
    phase: float
    epsilon_leading: float
    valid: bool

    # Function: from_modulus
    @classmethod
    def from_modulus(cls, modulus: float, phase: float, epsilon_leading: float) -> "OverlapResult":
        chi = modulus * cmath.exp(1j * phase)
        valid = epsilon_leading <= LEADING_ORDER_LIMIT
        if not valid:
            logger.warning("epsilon %.3g outside the leading-order regime", epsilon_leading)
        return cls(
            chi=chi,
            epsilon=1.0 - abs(chi),
            phase=phase,
            epsilon_leading=epsilon_leading,
            valid=valid,
        )


# Function: kick_rate
def kick_rate(
    setup: PhysicalSetup, omega: Optional[float] = None, k_net: Optional[float] = None
) -> float:
    """K² k_B T_eff / 2M in 1/µs²; ε = kick_rate·τ² for a sudden pair of kicks."""
    if omega is None:
        omega = setup.omega_parallel
    if k_net is None:
        k_net = effective_wavevector(setup)["K"]
    return 0.5 * k_net**2 * setup.hbar_over_mass * effective_temperature(setup, omega)


# Function: _sudden_overlap
def _sudden_overlap(
    setup: PhysicalSetup, tau: float, sign: float, k_net: Optional[float] = None
) -> OverlapResult:
    if k_net is None:
        k_net = effective_wavevector(setup)["K"]
    eps = kick_rate(setup, k_net=k_net) * tau**2
    e_rec = 0.5 * setup.hbar_over_mass * k_net**2
    phase = -e_rec * tau + (math.pi if sign < 0 else 0.0)
    return OverlapResult.from_modulus(math.exp(-eps), phase, eps)


# Function: chi_single_2pi
def chi_single_2pi(setup: PhysicalSetup, tau2: float) -> OverlapResult:
    """Flat 2π pulse in the sudden regime: χ = -e^{-iE_rec τ₂} e^{-(δx/2Δx)²}."""
    return _sudden_overlap(setup, tau2, sign=-1.0)


# Function: chi_two_pi
def chi_two_pi(setup: PhysicalSetup, tau1: float) -> OverlapResult:
    """Two π pulses separated by τ₁; same closed form as the single 2π pulse."""
    return _sudden_overlap(setup, tau1, sign=-1.0)


# Function: eps_adiabatic
def eps_adiabatic(setup: PhysicalSetup, tau_x: float) -> OverlapResult:
    """ε^(ad) for a precomputed Rydberg time τ_a, τ_R or τ_R - τ_a."""
    return _sudden_overlap(setup, tau_x, sign=1.0)


# Function: eps_stirap
def eps_stirap(setup: PhysicalSetup, k1: float, k_r: float, tau: float) -> OverlapResult:
    """
    Ladder STIRAP: only the net momentum K₁ - K_R is left on the atom.

    Args:
        k1: lower-transition wave number (rad/µm, signed)
        k_r: upper-transition wave number (rad/µm, signed)
    """
    return _sudden_overlap(setup, tau, sign=1.0, k_net=abs(k1 - k_r))


# Function: eps_ho_trap_on
def eps_ho_trap_on(setup: PhysicalSetup, tau: float) -> OverlapResult:
    """
    Two kicks separated by τ with the trap on (leading order in K²)

    The imaginary K² term is returned as the phase; |χ| = 1 - ε^(HO).
    """
    omega = setup.omega_parallel
    k_net = effective_wavevector(setup)["K"]
    x = omega * tau
    eps = 2.0 * kick_rate(setup, omega, k_net) * (1.0 - math.cos(x)) / omega**2
    eta2 = setup.hbar_over_mass * k_net**2 / (2.0 * omega)
    return OverlapResult.from_modulus(abs(1.0 - eps), -eta2 * math.sin(x), eps)


# Function: chi_ho_ground_exact
def chi_ho_ground_exact(setup: PhysicalSetup, tau: float) -> OverlapResult:
    """Ground-state oscillator: χ = e^{-iη² sin ωτ} e^{-η²(1 - cos ωτ)}, η² = ħK²/2Mω."""
    omega = setup.omega_parallel
    k_net = effective_wavevector(setup)["K"]
    x = omega * tau
    eta2 = setup.hbar_over_mass * k_net**2 / (2.0 * omega)
    exponent = eta2 * (1.0 - math.cos(x))
    return OverlapResult.from_modulus(math.exp(-exponent), -eta2 * math.sin(x), exponent)
