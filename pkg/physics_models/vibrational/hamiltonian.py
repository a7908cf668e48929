"""
Two-atom gate Hamiltonian on internal ⊗ vibrational states.

Internal order per atom: |0⟩, |1⟩, |R⟩, |d⟩. The pure-state solver works on the
first three (the dark state only receives population, it never feeds back); the
dense Lindblad oracle uses all four. Rotating frame as in pulse_processing.phases:
|R⟩ at +Δ, |RR⟩ at 2Δ + B.
"""

import sys
from pathlib import Path

project_root = Path(__file__).parent.parent.parent
if str(project_root) not in sys.path:
    sys.path.insert(0, str(project_root))

import logging
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from physics_models.vibrational.fock_basis import FockBasis, position_quadrature
from pulse_processing.envelopes import PulseEnvelope

logger = logging.getLogger(__name__)

GROUND, QUBIT, RYDBERG, DARK = 0, 1, 2, 3
ACTIVE_INTERNAL = 3


# Class: GateSchedule
@dataclass(frozen=True)
class GateSchedule:
    """Integration window of a gate and the step cap that resolves its pulses."""

    t0: float
    tf: float
    max_step: float

    # Function: from_envelopes
    @classmethod
    def from_envelopes(
        cls, envelopes: Sequence[PulseEnvelope], steps_per_width: float = 10.0
    ) -> "GateSchedule":
        windows = [e.window() for e in envelopes]
        t0 = min(w[0] for w in windows)
        tf = max(w[1] for w in windows)
        widths = [e.width or e.sigma for e in envelopes if (e.width or e.sigma)]
        cap = (tf - t0) / 100.0
        if widths:
            cap = min(cap, min(widths) / steps_per_width)
        return cls(t0=t0, tf=tf, max_step=cap)

    # Function: duration
    @property
    def duration(self) -> float:
        return self.tf - self.t0


# Class: GateHamiltonian
class GateHamiltonian:
    """
    H = H₁⊗I + I⊗H₁ + H₂ with H₂ = B|RR⟩⟨RR| (optionally with the linear
    transverse gradient B·6(y₂-y₁)/r₁₂) and decay Γ out of |R⟩.

    Args:
        basis: per-atom vibrational basis (identical for both atoms)
        envelopes: (atom 1, atom 2) pulses; each carries its own detuning
        blockade: B in rad/µs
        decay_rate: Γ in 1/µs
        trap_on: magic trap kept on during the gate
        rr_gradient: g = sign·6B·y_zpf/r₁₂ coupling the pair level to y₂ - y₁
    """

    # Function: __init__
    def __init__(
        self,
        basis: FockBasis,
        envelopes: Tuple[PulseEnvelope, PulseEnvelope],
        blockade: float,
        decay_rate: float = 0.0,
        trap_on: bool = True,
        rr_gradient: float = 0.0,
    ):
        self.basis = basis
        self.envelopes = tuple(envelopes)
        self.blockade = blockade
        self.decay_rate = decay_rate
        self.trap_on = trap_on
        self.rr_gradient = rr_gradient
        self.n = basis.n_max
        self.quadrature = position_quadrature(self.n)
        self._motion = basis.trap_hamiltonian(trap_on)
        self._static = [self._static_part(env.detuning) for env in self.envelopes]
        self._coupling = self._coupling_part()

    # Function: _embed
    def _embed(self, internal: int, blocks) -> np.ndarray:
        n = self.n
        out = np.zeros((internal * n, internal * n), dtype=complex)
        for (i, j), block in blocks.items():
            out[i * n : (i + 1) * n, j * n : (j + 1) * n] = block
        return out

    # Function: _static_part
    def _static_part(self, detuning: float, internal: int = ACTIVE_INTERNAL, hermitian: bool = False):
        eye = np.eye(self.n)
        rydberg = self._motion + detuning * eye
        if not hermitian:
            rydberg = rydberg - 0.5j * self.decay_rate * eye
        blocks = {(GROUND, GROUND): self._motion, (QUBIT, QUBIT): self._motion, (RYDBERG, RYDBERG): rydberg}
        if internal > DARK:
            blocks[(DARK, DARK)] = self._motion
        return self._embed(internal, blocks)

    # Function: _coupling_part
    def _coupling_part(self, internal: int = ACTIVE_INTERNAL) -> np.ndarray:
        """Ω-independent coupling: e^{iKx}|R⟩⟨1|/2 + h.c."""
        d = self.basis.displacement
        return self._embed(
            internal, {(RYDBERG, QUBIT): 0.5 * d, (QUBIT, RYDBERG): 0.5 * d.conj().T}
        )

    # Function: rabi
    def rabi(self, t: float) -> Tuple[float, float]:
        return float(self.envelopes[0].rabi(t)), float(self.envelopes[1].rabi(t))

    # Function: one_atom
    def one_atom(self, t: float) -> Tuple[np.ndarray, np.ndarray]:
        """Non-Hermitian H₁ - iΓ/2|R⟩⟨R| for each atom on the active internal states."""
        om1, om2 = self.rabi(t)
        return (
            self._static[0] + om1 * self._coupling,
            self._static[1] + om2 * self._coupling,
        )

    # Function: apply
    def apply(self, t: float, psi: np.ndarray) -> np.ndarray:
        """
        H_eff ψ for a stack of two-atom states

        Args:
            psi: (members, 3n, 3n), row index atom 1, column index atom 2
        """
        h1, h2 = self.one_atom(t)
        out = h1 @ psi + psi @ h2.T
        lo, hi = RYDBERG * self.n, (RYDBERG + 1) * self.n
        pair = psi[:, lo:hi, lo:hi]
        extra = self.blockade * pair
        if self.rr_gradient:
            x = self.quadrature
            extra = extra - self.rr_gradient * (pair @ x.T - x @ pair)
        out[:, lo:hi, lo:hi] += extra
        return out

    # Function: dense
    def dense(self, t: float, internal: int = DARK + 1, hermitian: bool = True) -> np.ndarray:
        """Full two-atom matrix on (internal·n)² states, atom 1 as the slow index."""
        om1, om2 = self.rabi(t)
        h_a = self._static_part(self.envelopes[0].detuning, internal, hermitian)
        h_b = self._static_part(self.envelopes[1].detuning, internal, hermitian)
        coupling = self._coupling_part(internal)
        h_a = h_a + om1 * coupling
        h_b = h_b + om2 * coupling
        dim = internal * self.n
        eye = np.eye(dim)
        total = np.kron(h_a, eye) + np.kron(eye, h_b)

        proj = np.diag(np.eye(internal)[RYDBERG])
        rydberg = np.kron(proj, np.eye(self.n))
        total = total + self.blockade * np.kron(rydberg, rydberg)
        if self.rr_gradient:
            x = self.quadrature
            y1 = np.kron(np.kron(proj, x), np.kron(proj, np.eye(self.n)))
            y2 = np.kron(np.kron(proj, np.eye(self.n)), np.kron(proj, x))
            total = total - self.rr_gradient * (y2 - y1)
        return total

    # Function: jump_operators
    def jump_operators(self, internal: int = DARK + 1):
        """√Γ|d⟩⟨R| on each atom."""
        one = np.zeros((internal, internal))
        one[DARK, RYDBERG] = np.sqrt(self.decay_rate)
        local = np.kron(one, np.eye(self.n))
        eye = np.eye(internal * self.n)
        return [np.kron(local, eye), np.kron(eye, local)]
