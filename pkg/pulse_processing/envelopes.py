import sys
from pathlib import Path

project_root = Path(__file__).parent.parent
if str(project_root) not in sys.path:
    sys.path.insert(0, str(project_root))

import logging
import math
from enum import Enum
from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field, ValidationError, model_validator
from scipy import integrate, special

from backend.services.errors import ConfigError

logger = logging.getLogger(__name__)

# e^{-t^6/δt^6} is below 1e-27 outside ±2δt
SUPER_GAUSSIAN_HALF_WIDTH = 2.0


# Class: PulseFamily
class PulseFamily(str, Enum):
    """Parametric envelope families"""

    FLAT_TOP = "flat_top"
    GAUSSIAN_PAIR = "gaussian_pair"
    SUPER_GAUSSIAN_PAIR = "super_gaussian_pair"
    SUPER_GAUSSIAN_SINGLE = "super_gaussian_single"
    GAUSSIAN = "gaussian"
    OFFSET_GAUSSIAN = "offset_gaussian"
    DELTA_TRAIN = "delta_train"


# Class: PulseEnvelope
class PulseEnvelope(BaseModel):
    """
    Rabi frequency Ω(t) ≥ 0 and constant detuning Δ, both in rad/µs

    Times are in µs. `width` is δt (δt₁, δt₂), `separation` the lobe spacing τ,
    `sigma`/`duration` parameterize the offset Gaussian on [0, T_pulse].
    """

    family: PulseFamily
    omega_max: float = Field(default=0.0, ge=0)
    detuning: float = 0.0
    width: Optional[float] = Field(default=None, gt=0)
    separation: float = Field(default=0.0, ge=0)
    center: float = 0.0
    sigma: Optional[float] = Field(default=None, gt=0)
    duration: Optional[float] = Field(default=None, gt=0)
    segments: List[Tuple[float, float, float]] = Field(default_factory=list)
    kicks: List[Tuple[float, float]] = Field(default_factory=list)
    window_factor: float = Field(default=4.0, gt=0)
    mirrored: bool = False

    model_config = {"frozen": True}

    @model_validator(mode="after")
    def _check_family_parameters(self):
        needs_width = {
            PulseFamily.GAUSSIAN_PAIR,
            PulseFamily.SUPER_GAUSSIAN_PAIR,
            PulseFamily.SUPER_GAUSSIAN_SINGLE,
            PulseFamily.GAUSSIAN,
        }
        if self.family in needs_width and self.width is None:
            raise ValueError(f"{self.family.value} needs width")
        if self.family == PulseFamily.FLAT_TOP and not self.segments and self.width is None:
            raise ValueError("flat_top needs width or segments")
        if self.family == PulseFamily.OFFSET_GAUSSIAN and (
            self.sigma is None or self.duration is None
        ):
            raise ValueError("offset_gaussian needs sigma and duration")
        return self

    # Function: _raw_segments
    def _raw_segments(self) -> List[Tuple[float, float, float]]:
        if self.segments:
            return sorted(self.segments)
        half = 0.5 * self.width
        return [(self.center - half, self.center + half, self.omega_max)]

    # Function: flat_segments
    def flat_segments(self) -> List[Tuple[float, float, float]]:
        """(start, stop, Ω) for a flat-top envelope, in time order."""
        segs = self._raw_segments()
        if self.mirrored:
            t0, tf = self.window()
            segs = sorted((t0 + tf - b, t0 + tf - a, om) for a, b, om in segs)
        return segs

    # Function: _lobe_centers
    def _lobe_centers(self) -> List[float]:
        if self.family in (PulseFamily.GAUSSIAN_PAIR, PulseFamily.SUPER_GAUSSIAN_PAIR):
            half = 0.5 * self.separation
            return [self.center - half, self.center + half]
        return [self.center]

    # Function: shape
    def shape(self, t) -> np.ndarray:
        """Dimensionless envelope; each lobe peaks at 1."""
        t = np.asarray(t, dtype=float)
        if self.family == PulseFamily.FLAT_TOP:
            out = np.zeros_like(t)
            for start, stop, om in self.flat_segments():
                out = np.where((t >= start) & (t < stop), 1.0 if om > 0 else 0.0, out)
            return out
        if self.mirrored:
            t0, tf = self.window()
            t = t0 + tf - t
        if self.family == PulseFamily.DELTA_TRAIN:
            return np.zeros_like(t)
        if self.family == PulseFamily.OFFSET_GAUSSIAN:
            half = 0.5 * self.duration
            offset = math.exp(-(half**2) / self.sigma**2)
            inside = (t >= 0.0) & (t <= self.duration)
            value = (np.exp(-((t - half) ** 2) / self.sigma**2) - offset) / (1.0 - offset)
            return np.where(inside, np.clip(value, 0.0, None), 0.0)

        power = 6 if self.family in (
            PulseFamily.SUPER_GAUSSIAN_PAIR,
            PulseFamily.SUPER_GAUSSIAN_SINGLE,
        ) else 2
        out = np.zeros_like(t)
        for c in self._lobe_centers():
            out = out + np.exp(-(((t - c) / self.width) ** power))
        return out

    # Function: rabi
    def rabi(self, t) -> np.ndarray:
        if self.family == PulseFamily.FLAT_TOP:
            t = np.asarray(t, dtype=float)
            out = np.zeros_like(t)
            for start, stop, om in self.flat_segments():
                out = np.where((t >= start) & (t < stop), om, out)
            return out
        return self.omega_max * self.shape(t)

    # Function: window
    def window(self) -> Tuple[float, float]:
        """Integration interval [t0, tf] covering the pulse."""
        if self.family == PulseFamily.FLAT_TOP:
            segs = self._raw_segments()
            return segs[0][0], max(s[1] for s in segs)
        if self.family == PulseFamily.DELTA_TRAIN:
            times = [k[0] for k in self.kicks] or [self.center]
            return min(times), max(times)
        if self.family == PulseFamily.OFFSET_GAUSSIAN:
            return 0.0, self.duration
        if self.family in (PulseFamily.SUPER_GAUSSIAN_PAIR, PulseFamily.SUPER_GAUSSIAN_SINGLE):
            half = SUPER_GAUSSIAN_HALF_WIDTH * self.width
        else:
            half = self.window_factor * self.width
        centers = self._lobe_centers()
        return min(centers) - half, max(centers) + half

    # Function: breakpoints
    def breakpoints(self) -> List[float]:
        if self.family == PulseFamily.FLAT_TOP:
            return sorted({p for a, b, _ in self.flat_segments() for p in (a, b)})
        if self.family == PulseFamily.DELTA_TRAIN:
            return sorted(k[0] for k in self.kicks)
        return list(self.window())

    # Function: is_piecewise_constant
    @property
    def is_piecewise_constant(self) -> bool:
        return self.family in (PulseFamily.FLAT_TOP, PulseFamily.DELTA_TRAIN)

    # Function: lobe_integral
    def lobe_integral(self) -> float:
        """∫ shape dt over one lobe (numerical quadrature)."""
        if self.family == PulseFamily.FLAT_TOP:
            seg = self.flat_segments()[0]
            return seg[1] - seg[0]
        if self.family == PulseFamily.DELTA_TRAIN:
            return 1.0
        if self.family in (PulseFamily.GAUSSIAN_PAIR, PulseFamily.SUPER_GAUSSIAN_PAIR):
            single = self.model_copy(
                update={
                    "family": PulseFamily.GAUSSIAN
                    if self.family == PulseFamily.GAUSSIAN_PAIR
                    else PulseFamily.SUPER_GAUSSIAN_SINGLE,
                    "separation": 0.0,
                    "mirrored": False,
                }
            )
            return single.lobe_integral()
        t0, tf = self.window()
        value, _ = integrate.quad(lambda t: float(self.shape(t)), t0, tf, limit=200)
        return value

    # Function: area
    def area(self) -> float:
        """Total pulse area ∫Ω dt."""
        if self.family == PulseFamily.DELTA_TRAIN:
            return sum(k[1] for k in self.kicks)
        if self.family == PulseFamily.FLAT_TOP:
            return sum((b - a) * om for a, b, om in self.flat_segments())
        lobes = len(self._lobe_centers())
        return self.omega_max * self.lobe_integral() * lobes

    # Function: derivative
    def derivative(self, t) -> np.ndarray:
        """dΩ/dt by central differences on the smooth families."""
        t = np.asarray(t, dtype=float)
        h = 1e-6 * (self.width or self.sigma or 1.0)
        return (self.rabi(t + h) - self.rabi(t - h)) / (2.0 * h)

    # Function: with_amplitude
    def with_amplitude(self, omega_max: float) -> "PulseEnvelope":
        return self.model_copy(update={"omega_max": omega_max})

    # Function: time_reversed
    def time_reversed(self) -> "PulseEnvelope":
        return self.model_copy(update={"mirrored": not self.mirrored})

    # Function: sigma_equivalent
    def sigma_equivalent(self) -> Optional[float]:
        """Informational σ of the offset-Gaussian form matching a plain Gaussian δt."""
        if self.family == PulseFamily.GAUSSIAN:
            return self.width
        return self.sigma


# Class: GateKind
class GateKind(str, Enum):
    PI_2PI_PI = "pi_2pi_pi"
    ADIABATIC = "adiabatic"


# Class: GateSpec
class GateSpec(BaseModel):
    """
    A named gate protocol

    π-2π-π: tau1 (lobe spacing of the control π pulses), delta_t1, delta_t2 and
    optionally explicit amplitudes (otherwise calibrated to π / 2π areas).
    Adiabatic: omega0 (rad/µs), detuning_ratio Δ/Ω₀, delta_t, blockade B (rad/µs).
    """

    kind: GateKind
    tau1: Optional[float] = Field(default=None, gt=0)
    delta_t1: Optional[float] = Field(default=None, gt=0)
    delta_t2: Optional[float] = Field(default=None, gt=0)
    omega1_max: Optional[float] = Field(default=None, gt=0)
    omega2_max: Optional[float] = Field(default=None, gt=0)
    omega0: Optional[float] = Field(default=None, gt=0)
    detuning_ratio: Optional[float] = None
    delta_t: Optional[float] = Field(default=None, gt=0)
    blockade: Optional[float] = Field(default=None, ge=0)
    window_factor: float = Field(default=4.0, gt=0)

    model_config = {"frozen": True}

    @model_validator(mode="after")
    def _check_timing(self):
        if self.kind == GateKind.PI_2PI_PI:
            if None in (self.tau1, self.delta_t1, self.delta_t2):
                raise ValueError("pi_2pi_pi needs tau1, delta_t1, delta_t2")
            if self.tau1 <= 2.0 * self.delta_t1:
                raise ValueError("tau1 must exceed 2*delta_t1")
        else:
            if None in (self.omega0, self.detuning_ratio, self.delta_t):
                raise ValueError("adiabatic needs omega0, detuning_ratio, delta_t")
        return self

    # Function: from_config
    @classmethod
    def from_config(cls, config, blockade: Optional[float] = None) -> "GateSpec":
        kind = config.get("gate.kind", "pi_2pi_pi")
        try:
            if kind == GateKind.PI_2PI_PI.value:
                return cls(
                    kind=kind,
                    tau1=config.get("gate.pi_2pi_pi.tau1_us"),
                    delta_t1=config.get("gate.pi_2pi_pi.delta_t1_us"),
                    delta_t2=config.get("gate.pi_2pi_pi.delta_t2_us"),
                    blockade=blockade,
                )
            return cls(
                kind=kind,
                omega0=config.get("gate.adiabatic.omega0_rad_us"),
                detuning_ratio=config.get("gate.adiabatic.detuning_ratio"),
                delta_t=config.get("gate.adiabatic.delta_t_us"),
                window_factor=config.get("gate.adiabatic.window_factor", 4.0),
                blockade=blockade,
            )
        except ValidationError as e:
            raise ConfigError(
                "GATE_INVALID", "Gate section failed validation", e.errors(include_url=False)
            )

    # Function: tau2
    @property
    def tau2(self) -> float:
        """τ₂ = δt₂/2 for the target 2π pulse."""
        return 0.5 * self.delta_t2 if self.delta_t2 else 0.0

    # Function: detuning
    @property
    def detuning(self) -> float:
        if self.kind == GateKind.ADIABATIC:
            return self.detuning_ratio * self.omega0
        return 0.0


# Function: calibrate_pulse_area
def calibrate_pulse_area(envelope: PulseEnvelope, target_area: float) -> float:
    """
    Ω_max giving `target_area` per lobe

    Args:
        envelope: envelope whose shape (not amplitude) is used
        target_area: π, 2π, ...

    Returns:
        Ω_max in rad/µs
    """
    integral = envelope.lobe_integral()
    if integral <= 0.0:
        raise ConfigError("PULSE_EMPTY", "Envelope has zero area", {"family": envelope.family})
    return target_area / integral


# Function: super_gaussian_integral
def super_gaussian_integral(width: float) -> float:
    """∫ e^{-t⁶/δt⁶} dt = 2δt Γ(7/6)."""
    return 2.0 * width * special.gamma(7.0 / 6.0)


# Function: build_pi2pipi_envelopes
def build_pi2pipi_envelopes(gate: GateSpec) -> Tuple[PulseEnvelope, PulseEnvelope]:
    """Control (π, π) and target (2π) envelopes, centered on t = 0, resonant."""
    control = PulseEnvelope(
        family=PulseFamily.SUPER_GAUSSIAN_PAIR,
        width=gate.delta_t1,
        separation=gate.tau1,
    )
    target = PulseEnvelope(family=PulseFamily.SUPER_GAUSSIAN_SINGLE, width=gate.delta_t2)
    omega1 = gate.omega1_max or calibrate_pulse_area(control, math.pi)
    omega2 = gate.omega2_max or calibrate_pulse_area(target, 2.0 * math.pi)
    return control.with_amplitude(omega1), target.with_amplitude(omega2)


# Function: build_adiabatic_envelope
def build_adiabatic_envelope(gate: GateSpec) -> PulseEnvelope:
    """Ω₀e^{-t²/δt²} with constant detuning, the same pulse on both atoms."""
    return PulseEnvelope(
        family=PulseFamily.GAUSSIAN,
        omega_max=gate.omega0,
        detuning=gate.detuning,
        width=gate.delta_t,
        window_factor=gate.window_factor,
    )


# Function: gate_envelopes
def gate_envelopes(gate: GateSpec) -> Tuple[PulseEnvelope, PulseEnvelope]:
    """(atom 1, atom 2) envelopes of a gate."""
    if gate.kind == GateKind.PI_2PI_PI:
        return build_pi2pipi_envelopes(gate)
    envelope = build_adiabatic_envelope(gate)
    return envelope, envelope


# Function: gate_window
def gate_window(gate: GateSpec) -> Tuple[float, float]:
    first, second = gate_envelopes(gate)
    a0, af = first.window()
    b0, bf = second.window()
    return min(a0, b0), max(af, bf)
