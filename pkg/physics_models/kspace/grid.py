import sys
from pathlib import Path

project_root = Path(__file__).parent.parent.parent
if str(project_root) not in sys.path:
    sys.path.insert(0, str(project_root))

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from physics_models.units import PhysicalSetup, effective_temperature


# Class: KGrid
@dataclass(frozen=True)
class KGrid:
    """Uniform momentum grid k_i = k0 + i·dk (rad/µm)."""

    k0: float
    dk: float
    nk: int

    # Function: __post_init__
    def __post_init__(self):
        if self.dk <= 0 or self.nk < 2:
            raise ValueError("KGrid needs dk > 0 and at least two points")

    # Function: k_values
    def k_values(self) -> np.ndarray:
        return self.k0 + self.dk * np.arange(self.nk)

    # Function: half_span
    @property
    def half_span(self) -> float:
        return min(-self.k0, self.k0 + self.dk * (self.nk - 1))

    # Function: for_setup
    @classmethod
    def for_setup(
        cls,
        setup: PhysicalSetup,
        k_kick: float,
        nk: int = 512,
        span_factor: float = 8.0,
        omega: Optional[float] = None,
    ) -> "KGrid":
        """
        Symmetric grid spanning ±(span_factor·k_thermal + 2K)

        When K > 0 the spacing is shrunk so that K is an integer number of steps,
        and the point count grown to keep the span.
        """
        k_th = thermal_wavenumber(setup, omega)
        half = span_factor * k_th + 2.0 * k_kick
        dk = 2.0 * half / (nk - 1)
        if k_kick > 0.0:
            steps = math.ceil(k_kick / dk)
            dk = k_kick / steps
            nk = 2 * math.ceil(half / dk) + 1
        return cls(k0=-0.5 * (nk - 1) * dk, dk=dk, nk=nk)

    # Function: refined
    def refined(self) -> "KGrid":
        """Half the spacing over the same span."""
        return KGrid(k0=self.k0, dk=0.5 * self.dk, nk=2 * self.nk - 1)


# Function: thermal_wavenumber
def thermal_wavenumber(setup: PhysicalSetup, omega: Optional[float] = None) -> float:
    """k_thermal = √(2Mk_BT_eff)/ħ in rad/µm."""
    omega = setup.omega_parallel if omega is None else omega
    return math.sqrt(2.0 * effective_temperature(setup, omega) / setup.hbar_over_mass)


# Function: thermal_density
def thermal_density(grid: KGrid, setup: PhysicalSetup, omega: Optional[float] = None) -> np.ndarray:
    """Diagonal ρ(k,k) = ħ/√(2πMk_BT_eff) exp(-ħ²k²/2Mk_BT_eff)."""
    omega = setup.omega_parallel if omega is None else omega
    variance = effective_temperature(setup, omega) / setup.hbar_over_mass
    k = grid.k_values()
    return np.exp(-0.5 * k**2 / variance) / math.sqrt(2.0 * math.pi * variance)
