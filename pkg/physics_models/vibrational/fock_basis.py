import sys
from pathlib import Path

project_root = Path(__file__).parent.parent.parent
if str(project_root) not in sys.path:
    sys.path.insert(0, str(project_root))

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import special

from physics_models.units import PhysicalSetup


# Function: annihilation
def annihilation(n_max: int) -> np.ndarray:
    """Truncated a on levels 0..n_max-1."""
    return np.diag(np.sqrt(np.arange(1, n_max, dtype=float)), k=1)


# Function: number_operator
def number_operator(n_max: int) -> np.ndarray:
    return np.diag(np.arange(n_max, dtype=float))


# Function: position_quadrature
def position_quadrature(n_max: int) -> np.ndarray:
    """X = a + a†, so that x = x_zpf·X."""
    a = annihilation(n_max)
    return a + a.T


# Function: zero_point_length
def zero_point_length(setup: PhysicalSetup, omega: float) -> float:
    """x_zpf = √(ħ/2Mω) in µm."""
    return math.sqrt(0.5 * setup.hbar_over_mass / omega)


# Function: lamb_dicke
def lamb_dicke(setup: PhysicalSetup, k_kick: float, omega: float) -> float:
    """η = K·√(ħ/2Mω)."""
    return k_kick * zero_point_length(setup, omega)


# Function: build_displacement
def build_displacement(n_max: int, eta: float) -> np.ndarray:
    """
    ⟨m|e^{iη(a+a†)}|n⟩ from the associated-Laguerre closed form

    Element (m, n) = √(n_<!/n_>!) (iη)^{|m-n|} e^{-η²/2} L_{n_<}^{|m-n|}(η²).
    The truncated matrix is the exact upper-left block of the infinite operator.
    """
    m, n = np.meshgrid(np.arange(n_max), np.arange(n_max), indexing="ij")
    low = np.minimum(m, n)
    diff = np.abs(m - n)
    x = eta**2
    log_ratio = 0.5 * (special.gammaln(low + 1) - special.gammaln(low + diff + 1))
    magnitude = np.exp(log_ratio - 0.5 * x) * special.eval_genlaguerre(low, diff, x)
    power = np.where(diff == 0, 1.0, np.abs(eta) ** diff)
    phase = (1j ** (diff % 4)) * np.where(eta < 0, (-1.0) ** diff, 1.0)
    return magnitude * power * phase


# Function: build_displacement_taylor
def build_displacement_taylor(n_max: int, eta: float, order: int = 10) -> np.ndarray:
    """
    Power series of e^{iηX} to `order`

    The series is built on n_max + order levels and cut back, so the only error in
    the returned block is the series truncation.
    """
    big = n_max + order
    generator = 1j * eta * position_quadrature(big)
    term = np.eye(big, dtype=complex)
    total = term.copy()
    for j in range(1, order + 1):
        term = term @ generator / j
        total = total + term
    return total[:n_max, :n_max]


# Function: displacement_by_quadrature
def displacement_by_quadrature(n_max: int, eta: float, points: int = 4001) -> np.ndarray:
    """Brute-force ⟨m|e^{iηX}|n⟩ on a dimensionless position grid (test oracle)."""
    # HO eigenfunctions in ξ = x/(√2 x_zpf), so ηX = √2 η ξ
    half_span = math.sqrt(2.0 * n_max + 1.0) + 10.0
    xi = np.linspace(-half_span, half_span, points)
    psi = np.empty((n_max, points))
    psi[0] = math.pi**-0.25 * np.exp(-0.5 * xi**2)
    if n_max > 1:
        psi[1] = math.sqrt(2.0) * xi * psi[0]
    for n in range(2, n_max):
        psi[n] = math.sqrt(2.0 / n) * xi * psi[n - 1] - math.sqrt((n - 1) / n) * psi[n - 2]
    kernel = np.exp(1j * math.sqrt(2.0) * eta * xi)
    weights = np.gradient(xi)
    return (psi * kernel * weights) @ psi.T


# Class: FockBasis
@dataclass
class FockBasis:
    """
    One-dimensional oscillator basis for one atom

    n_max counts states (levels 0..n_max-1).
    """

    n_max: int
    omega: float
    eta: float = 0.0
    x_zpf: float = 0.0
    displacement: Optional[np.ndarray] = field(default=None, repr=False)

    # Function: __post_init__
    def __post_init__(self):
        if self.n_max < 1:
            raise ValueError("n_max must be at least 1")
        if self.displacement is None:
            self.displacement = build_displacement(self.n_max, self.eta)

    # Function: for_setup
    @classmethod
    def for_setup(
        cls, setup: PhysicalSetup, n_max: int, omega: float, k_kick: float = 0.0
    ) -> "FockBasis":
        return cls(
            n_max=n_max,
            omega=omega,
            eta=lamb_dicke(setup, k_kick, omega),
            x_zpf=zero_point_length(setup, omega),
        )

    # Function: internal_only
    @classmethod
    def internal_only(cls) -> "FockBasis":
        return cls(n_max=1, omega=0.0)

    # Function: trap_hamiltonian
    def trap_hamiltonian(self, trap_on: bool = True) -> np.ndarray:
        """
        Motional Hamiltonian in rad/µs

        Trap on: ω(n + ½). Trap off: kinetic energy only, p²/2M =
        (ω/4)(2a†a + 1 - a² - a†²) in the basis of the trap that was switched off.
        """
        if self.n_max == 1 or self.omega == 0.0:
            return np.zeros((self.n_max, self.n_max))
        n = number_operator(self.n_max)
        if trap_on:
            return self.omega * (n + 0.5 * np.eye(self.n_max))
        a = annihilation(self.n_max)
        a2 = a @ a
        return 0.25 * self.omega * (2.0 * n + np.eye(self.n_max) - a2 - a2.T)

    # Function: unitarity_error
    def unitarity_error(self, keep: Optional[int] = None) -> float:
        """max |D†D - I| over the lowest `keep` states (default n_max//2)."""
        keep = max(1, self.n_max // 2) if keep is None else keep
        d = self.displacement
        product = (d.conj().T @ d)[:keep, :keep]
        return float(np.max(np.abs(product - np.eye(keep))))
