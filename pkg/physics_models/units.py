"""
Physical constants, internal units and the PhysicalSetup record.

Internal units: time in µs, length in µm, angular frequency in rad/µs, energies
expressed as angular frequencies (ħ = 1) and temperatures as k_B T/ħ in rad/µs.
All configuration I/O stays in the SI-style units named by the field names.
"""

import sys
from pathlib import Path

project_root = Path(__file__).parent.parent
if str(project_root) not in sys.path:
    sys.path.insert(0, str(project_root))

import contextlib
import dataclasses
import logging
import math
from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional

import numpy as np
from pydantic import BaseModel, Field, ValidationError, field_validator

from backend.services.errors import ConfigError

logger = logging.getLogger(__name__)


# Class: Constants
@dataclass(frozen=True)
class Constants:
    """CODATA 2018 values (SI)."""

    hbar: float = 1.054571817e-34
    k_b: float = 1.380649e-23
    amu: float = 1.66053906660e-27


_CONSTANTS = Constants()


# Function: constants
def constants() -> Constants:
    return _CONSTANTS


# Function: override_constants
@contextlib.contextmanager
def override_constants(**values: float) -> Iterator[Constants]:
    """Temporarily replace entries of the constants table (test hook)."""
    global _CONSTANTS
    saved = _CONSTANTS
    _CONSTANTS = dataclasses.replace(saved, **values)
    try:
        yield _CONSTANTS
    finally:
        _CONSTANTS = saved


# Class: UnitSystem
class UnitSystem:
    """SI <-> internal conversions (µs, µm, rad/µs, ħ = 1)."""

    TIME = 1e-6
    LENGTH = 1e-6

    # Function: time_to_internal
    @staticmethod
    def time_to_internal(seconds: float) -> float:
        return seconds / UnitSystem.TIME

    # Function: time_to_si
    @staticmethod
    def time_to_si(us: float) -> float:
        return us * UnitSystem.TIME

    # Function: length_to_internal
    @staticmethod
    def length_to_internal(meters: float) -> float:
        return meters / UnitSystem.LENGTH

    # Function: length_to_si
    @staticmethod
    def length_to_si(um: float) -> float:
        return um * UnitSystem.LENGTH

    # Function: angular_to_internal
    @staticmethod
    def angular_to_internal(rad_per_s: float) -> float:
        return rad_per_s * UnitSystem.TIME

    # Function: angular_to_si
    @staticmethod
    def angular_to_si(rad_per_us: float) -> float:
        return rad_per_us / UnitSystem.TIME

    # Function: frequency_to_internal
    @staticmethod
    def frequency_to_internal(hz: float) -> float:
        """Hz -> angular frequency in rad/µs."""
        return 2.0 * math.pi * hz * UnitSystem.TIME

    # Function: energy_to_internal
    @staticmethod
    def energy_to_internal(joules: float) -> float:
        return joules / constants().hbar * UnitSystem.TIME

    # Function: energy_to_si
    @staticmethod
    def energy_to_si(rad_per_us: float) -> float:
        return rad_per_us * constants().hbar / UnitSystem.TIME

    # Function: temperature_to_internal
    @staticmethod
    def temperature_to_internal(kelvin: float) -> float:
        """k_B T/ħ in rad/µs."""
        c = constants()
        return kelvin * c.k_b / c.hbar * UnitSystem.TIME

    # Function: temperature_to_si
    @staticmethod
    def temperature_to_si(rad_per_us: float) -> float:
        c = constants()
        return rad_per_us * c.hbar / c.k_b / UnitSystem.TIME

    # Function: hbar_over_mass
    @staticmethod
    def hbar_over_mass(mass_amu: float) -> float:
        """ħ/M in µm²/µs; E(k) = (ħ/M) k²/2 for k in rad/µm."""
        c = constants()
        return c.hbar / (mass_amu * c.amu) / UnitSystem.LENGTH**2 * UnitSystem.TIME


# Class: Beam
class Beam(BaseModel):
    wavelength_nm: float = Field(gt=0)
    direction: int = 1
    waist_um: float = Field(gt=0)

    @field_validator("direction")
    @classmethod
    def _unit_direction(cls, v: int) -> int:
        if v not in (-1, 1):
            raise ValueError("direction must be +1 or -1")
        return v

    # Function: wavenumber
    def wavenumber(self) -> float:
        """Signed wave number in rad/µm."""
        return self.direction * 2.0 * math.pi / (self.wavelength_nm * 1e-3)

    # Function: rayleigh_range
    def rayleigh_range(self) -> float:
        """x_R = π w0²/λ in µm."""
        return math.pi * self.waist_um**2 / (self.wavelength_nm * 1e-3)


# Class: PhysicalSetup
class PhysicalSetup(BaseModel):
    """Single source of every physical symbol; derived values are never stored."""

    mass_amu: float = Field(default=132.91, gt=0)
    temperature_k: float = Field(default=0.0, ge=0)
    trap_freq_parallel_hz: float = Field(default=10e3, gt=0)
    trap_freq_perp_hz: float = Field(default=50e3, gt=0)
    trap_on: bool = True
    beams: List[Beam] = Field(min_length=1)
    rydberg_lifetime_us: Optional[float] = Field(default=None, gt=0)
    blockade_rad_s: float = Field(default=2.0 * math.pi * 600e6, ge=0)
    r12_um: float = Field(default=2.6, gt=0)
    misalign_x0_um: float = 0.0
    misalign_y0_um: float = 0.0

    model_config = {"frozen": True}

    # Function: from_config
    @classmethod
    def from_config(cls, config) -> "PhysicalSetup":
        """Build from the atom/trap/beams/rydberg/focus sections."""
        data = {
            "mass_amu": config.get("atom.mass_amu", 132.91),
            "temperature_k": config.get("atom.temperature_k", 0.0),
            "trap_freq_parallel_hz": config.get("trap.freq_parallel_hz", 10e3),
            "trap_freq_perp_hz": config.get("trap.freq_perp_hz", 50e3),
            "trap_on": config.get("trap.trap_on", True),
            "beams": config.get("beams", []),
            "rydberg_lifetime_us": config.get("rydberg.lifetime_us"),
            "blockade_rad_s": config.get("rydberg.blockade_rad_s", 2.0 * math.pi * 600e6),
            "r12_um": config.get("rydberg.r12_um", 2.6),
            "misalign_x0_um": config.get("focus.misalign_x0_um", 0.0),
            "misalign_y0_um": config.get("focus.misalign_y0_um", 0.0),
        }
        try:
            return cls(**data)
        except ValidationError as e:
            raise ConfigError(
                "SETUP_INVALID", "Physical setup failed validation", e.errors(include_url=False)
            )

    # Function: omega_parallel
    @property
    def omega_parallel(self) -> float:
        return UnitSystem.frequency_to_internal(self.trap_freq_parallel_hz)

    # Function: omega_perp
    @property
    def omega_perp(self) -> float:
        return UnitSystem.frequency_to_internal(self.trap_freq_perp_hz)

    # Function: kt
    @property
    def kt(self) -> float:
        """Bath k_B T in rad/µs."""
        return UnitSystem.temperature_to_internal(self.temperature_k)

    # Function: hbar_over_mass
    @property
    def hbar_over_mass(self) -> float:
        return UnitSystem.hbar_over_mass(self.mass_amu)

    # Function: decay_rate
    @property
    def decay_rate(self) -> float:
        """Γ in 1/µs; zero when no lifetime is configured."""
        if self.rydberg_lifetime_us is None:
            return 0.0
        return 1.0 / self.rydberg_lifetime_us

    # Function: blockade
    @property
    def blockade(self) -> float:
        """B in rad/µs."""
        return UnitSystem.angular_to_internal(self.blockade_rad_s)

    # Function: replace
    def replace(self, **changes) -> "PhysicalSetup":
        return self.model_copy(update=changes)


# Function: effective_wavevector
def effective_wavevector(setup: PhysicalSetup) -> Dict[str, float]:
    """
    Net wave number of the (possibly two-photon) drive

    Returns:
        {"K": rad/µm, "lambda_eff_nm": nm (inf when K = 0)}
    """
    k_net = abs(sum(beam.wavenumber() for beam in setup.beams))
    if k_net == 0.0:
        return {"K": 0.0, "lambda_eff_nm": math.inf}
    return {"K": k_net, "lambda_eff_nm": 2.0 * math.pi / k_net * 1e3}


# Function: effective_beam_geometry
def effective_beam_geometry(setup: PhysicalSetup) -> Dict[str, object]:
    """Effective waist and Rayleigh range from the inverse-square sums."""
    ranges = [beam.rayleigh_range() for beam in setup.beams]
    inv_w2 = sum(1.0 / beam.waist_um**2 for beam in setup.beams)
    inv_xr2 = sum(1.0 / xr**2 for xr in ranges)
    return {
        "w0_eff": 1.0 / math.sqrt(inv_w2),
        "xR_eff": 1.0 / math.sqrt(inv_xr2),
        "xR": ranges,
    }


# Function: effective_temperature
def effective_temperature(setup: PhysicalSetup, omega: float) -> float:
    """
    k_B T_eff = ħω(1/2 + 1/(e^{ħω/k_BT} - 1)) in rad/µs

    Args:
        omega: trap angular frequency in rad/µs
    """
    kt = setup.kt
    if kt == 0.0:
        return 0.5 * omega
    x = omega / kt
    # expm1 keeps the classical limit accurate
    return omega * (0.5 + 1.0 / math.expm1(x)) if x < 700.0 else 0.5 * omega


# Function: temperature_from_effective
def temperature_from_effective(kt_eff: float, omega: float) -> float:
    """Bath temperature in kelvin whose effective temperature at omega is kt_eff (rad/µs)."""
    excess = kt_eff / omega - 0.5
    if excess < 0.0:
        raise ConfigError(
            "T_EFF_BELOW_ZERO_POINT",
            "Effective temperature below the zero-point value ħω/2",
            {"kt_eff": kt_eff, "omega": omega},
        )
    if excess == 0.0:
        return 0.0
    kt = omega / math.log1p(1.0 / excess)
    return UnitSystem.temperature_to_si(kt)


# Function: mean_occupation
def mean_occupation(setup: PhysicalSetup, omega: float) -> float:
    kt = setup.kt
    if kt == 0.0:
        return 0.0
    return 1.0 / math.expm1(omega / kt)


# Function: recoil_energy
def recoil_energy(setup: PhysicalSetup, tau: float = 0.0) -> Dict[str, float]:
    """
    Recoil energy and per-kick length scales

    Args:
        tau: time between kicks (µs) for the displacement δx

    Returns:
        E_rec (rad/µs), E_rec_over_kb_nk, delta_x_thermal (Δx, µm), delta_x_kick (δx, µm)
    """
    k_net = effective_wavevector(setup)["K"]
    h_m = setup.hbar_over_mass
    e_rec = 0.5 * h_m * k_net**2
    kt_eff = effective_temperature(setup, setup.omega_parallel)
    # Δx = ħ/sqrt(2 k_B T_eff M) = sqrt((ħ/M) / (2 k_B T_eff/ħ))
    spread = math.sqrt(h_m / (2.0 * kt_eff))
    return {
        "E_rec": e_rec,
        "E_rec_over_kb_nk": UnitSystem.temperature_to_si(e_rec) * 1e9,
        "delta_x_thermal": spread,
        "delta_x_kick": h_m * k_net * tau,
    }


# Function: thermal_rms_extent
def thermal_rms_extent(setup: PhysicalSetup, omega: float, use_effective: bool = False) -> float:
    """sqrt(k_B T / M ω²) in µm."""
    kt = effective_temperature(setup, omega) if use_effective else setup.kt
    return math.sqrt(kt * setup.hbar_over_mass) / omega


# Function: position_variance
def position_variance(setup: PhysicalSetup, omega: float) -> float:
    """⟨x²⟩ = k_B T_eff / M ω² in µm² (zero-point spread included)."""
    return effective_temperature(setup, omega) * setup.hbar_over_mass / omega**2


# Function: boltzmann_weights
def boltzmann_weights(setup: PhysicalSetup, omega: float, n_levels: int) -> np.ndarray:
    """Normalized P(n) for n < n_levels of the infinite oscillator (not renormalized)."""
    n = np.arange(n_levels)
    kt = setup.kt
    if kt == 0.0:
        weights = np.zeros(n_levels)
        weights[0] = 1.0
        return weights
    x = omega / kt
    return np.exp(-n * x) * -np.expm1(-x)
