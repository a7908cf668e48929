import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from backend.services.errors import ConfigError
from pulse_processing import (
    GateKind,
    GateSpec,
    PulseEnvelope,
    PulseFamily,
    adiabaticity_margin,
    build_adiabatic_envelope,
    build_pi2pipi_envelopes,
    calibrate_pulse_area,
    cz_phase_defect,
    dynamical_phases,
    gate_window,
    propagated_phases,
    super_gaussian_integral,
)
from pulse_processing.phases import signed_phase_residual

angles = st.floats(min_value=-20.0, max_value=20.0, allow_nan=False)


def _pi_gate() -> GateSpec:
    return GateSpec(kind=GateKind.PI_2PI_PI, tau1=1.0044, delta_t1=0.14, delta_t2=0.22)


def _adiabatic_gate(ratio=-0.3, delta_t=0.5, blockade=2.0 * math.pi * 4.0) -> GateSpec:
    return GateSpec(
        kind=GateKind.ADIABATIC,
        omega0=2.0 * math.pi * 17.0,
        detuning_ratio=ratio,
        delta_t=delta_t,
        blockade=blockade,
    )


# Function: test_pi2pipi_areas
def test_pi2pipi_areas():
    control, target = build_pi2pipi_envelopes(_pi_gate())
    assert control.area() == pytest.approx(2.0 * math.pi, rel=1e-8)
    assert target.area() == pytest.approx(2.0 * math.pi, rel=1e-8)
    assert control.family == PulseFamily.SUPER_GAUSSIAN_PAIR


# Function: test_super_gaussian_lobe_integral
def test_super_gaussian_lobe_integral():
    envelope = PulseEnvelope(family=PulseFamily.SUPER_GAUSSIAN_SINGLE, width=0.22)
    assert envelope.lobe_integral() == pytest.approx(super_gaussian_integral(0.22), rel=1e-8)


# Function: test_calibrated_gaussian_area
def test_calibrated_gaussian_area():
    envelope = PulseEnvelope(family=PulseFamily.GAUSSIAN, width=0.2)
    omega = calibrate_pulse_area(envelope, math.pi)
    assert omega == pytest.approx(math.pi / (0.2 * math.sqrt(math.pi)), rel=1e-6)


# Function: test_empty_envelope_rejected
def test_empty_envelope_rejected():
    envelope = PulseEnvelope(family=PulseFamily.FLAT_TOP, segments=[(0.0, 0.0, 1.0)])
    with pytest.raises(ConfigError):
        calibrate_pulse_area(envelope, math.pi)


# Function: test_flat_top_segments_area
def test_flat_top_segments_area():
    envelope = PulseEnvelope(
        family=PulseFamily.FLAT_TOP, segments=[(0.0, 0.5, 2.0), (0.5, 1.5, 1.0)]
    )
    assert envelope.area() == pytest.approx(2.0)
    assert envelope.is_piecewise_constant
    assert envelope.breakpoints() == [0.0, 0.5, 1.5]


# Function: test_time_reversal
@given(st.floats(min_value=-1.0, max_value=1.0))
def test_time_reversal(t):
    envelope = PulseEnvelope(
        family=PulseFamily.GAUSSIAN_PAIR, omega_max=3.0, width=0.1, separation=0.4, center=0.05
    )
    reversed_envelope = envelope.time_reversed()
    t0, tf = envelope.window()
    assert float(reversed_envelope.rabi(t)) == pytest.approx(float(envelope.rabi(t0 + tf - t)))
    assert reversed_envelope.time_reversed().rabi(t) == pytest.approx(envelope.rabi(t))


# Function: test_time_reversed_flat_top
def test_time_reversed_flat_top():
    envelope = PulseEnvelope(
        family=PulseFamily.FLAT_TOP, segments=[(0.0, 0.5, 2.0), (0.5, 1.5, 1.0)]
    )
    assert envelope.time_reversed().flat_segments() == [(0.0, 1.0, 1.0), (1.0, 1.5, 2.0)]


# Function: test_gate_timing_constraint
def test_gate_timing_constraint():
    with pytest.raises(ValueError):
        GateSpec(kind=GateKind.PI_2PI_PI, tau1=0.2, delta_t1=0.14, delta_t2=0.22)


# Function: test_gate_from_bad_config
def test_gate_from_bad_config(config):
    bad = config.with_overrides({"gate.kind": "adiabatic", "gate.adiabatic.delta_t_us": -1.0})
    with pytest.raises(ConfigError) as exc:
        GateSpec.from_config(bad)
    assert exc.value.code == "GATE_INVALID"


# Function: test_gate_window_covers_both_atoms
def test_gate_window_covers_both_atoms():
    gate = _pi_gate()
    t0, tf = gate_window(gate)
    assert t0 < -0.5 * gate.tau1 and tf > 0.5 * gate.tau1
    assert gate.tau2 == pytest.approx(0.11)


# Function: test_phase_defect_values
def test_phase_defect_values():
    assert cz_phase_defect(0.0, 0.0, 0.0) == pytest.approx(math.pi)
    assert cz_phase_defect(0.0, 0.0, math.pi) == pytest.approx(0.0)
    assert cz_phase_defect(0.5, 0.5, 0.0) == pytest.approx(math.pi - 1.0)
    assert cz_phase_defect(0.5, 0.5, 0.0, rule="entangling") == pytest.approx(math.pi - 1.0)
    assert cz_phase_defect(0.5, 0.5, math.pi, rule="entangling") == pytest.approx(1.0)
    with pytest.raises(ValueError):
        cz_phase_defect(0.0, 0.0, 0.0, rule="other")


# Function: test_phase_defect_cz_diagonal
def test_phase_defect_cz_diagonal():
    """diag(1, i, i, 1) is C_Z up to local S gates: phases sum to π"""
    half = 0.5 * math.pi
    assert cz_phase_defect(half, half, 0.0) == pytest.approx(0.0, abs=1e-12)
    assert cz_phase_defect(half, half, 0.0, rule="entangling") == pytest.approx(0.0, abs=1e-12)


# Function: test_sum_rule_depends_on_frame
def test_sum_rule_depends_on_frame():
    """Moving |1⟩ by ε for a time T adds εT per excitation; only the sum notices"""
    shift = 0.3
    phases = (0.2, 0.2, math.pi + 0.4)
    moved = (phases[0] + shift, phases[1] + shift, phases[2] + 2.0 * shift)
    assert cz_phase_defect(*moved, rule="entangling") == pytest.approx(
        cz_phase_defect(*phases, rule="entangling"), abs=1e-12
    )
    assert cz_phase_defect(*moved) != pytest.approx(cz_phase_defect(*phases), abs=1e-3)


# Function: test_phase_defect_local_phase_invariance
@given(angles, angles)
def test_phase_defect_local_phase_invariance(a, b):
    defect = cz_phase_defect(a, b, math.pi + a + b, rule="entangling")
    assert defect == pytest.approx(0.0, abs=1e-9)


# Function: test_phase_defect_periodic
@given(angles, angles, angles, st.integers(min_value=-3, max_value=3))
def test_phase_defect_periodic(a, b, c, k):
    shifted = cz_phase_defect(a, b, c + 2.0 * math.pi * k)
    assert shifted == pytest.approx(cz_phase_defect(a, b, c), abs=1e-9)
    assert 0.0 <= shifted <= math.pi + 1e-12


# Function: test_one_atom_phase_matches_closed_form
def test_one_atom_phase_matches_closed_form():
    """The |1⟩ branch is Δ/2 + √(Δ² + Ω²)/2 for Δ < 0"""
    envelope = build_adiabatic_envelope(_adiabatic_gate())
    delta = envelope.detuning
    t0, tf = envelope.window()
    expected, _ = integrate.quad(
        lambda t: 0.5 * delta + 0.5 * math.sqrt(delta**2 + float(envelope.rabi(t)) ** 2),
        t0,
        tf,
        limit=200,
    )
    phases = dynamical_phases(envelope, 2.0 * math.pi * 4.0)
    assert phases["phi01"] == pytest.approx(expected, rel=1e-6)
    assert phases["phi10"] == phases["phi01"]


# Function: test_strong_blockade_pair_phase
def test_strong_blockade_pair_phase():
    """With B far above Ω the pair branch sees the √2-enhanced coupling only"""
    envelope = build_adiabatic_envelope(_adiabatic_gate(ratio=-0.5, delta_t=0.2))
    delta = envelope.detuning
    t0, tf = envelope.window()
    expected, _ = integrate.quad(
        lambda t: 0.5 * delta + 0.5 * math.sqrt(delta**2 + 2.0 * float(envelope.rabi(t)) ** 2),
        t0,
        tf,
        limit=200,
    )
    phases = dynamical_phases(envelope, 1e8)
    assert phases["phi11"] == pytest.approx(expected, rel=1e-4)


# Function: test_propagated_phases_vanish_without_light
def test_propagated_phases_vanish_without_light():
    envelope = PulseEnvelope(family=PulseFamily.GAUSSIAN, omega_max=0.0, detuning=-5.0, width=0.2)
    phases = propagated_phases(envelope, 2.0 * math.pi * 4.0)
    assert phases["phi01"] == pytest.approx(0.0, abs=1e-12)
    assert phases["phi11"] == pytest.approx(0.0, abs=1e-12)
    assert phases["p11"] == pytest.approx(1.0, abs=1e-12)


# Function: test_propagated_phases_follow_adiabatic_for_slow_pulse
def test_propagated_phases_follow_adiabatic_for_slow_pulse():
    envelope = build_adiabatic_envelope(_adiabatic_gate(delta_t=1.0))
    exact = propagated_phases(envelope, 2.0 * math.pi * 4.0)
    adiabatic = dynamical_phases(envelope, 2.0 * math.pi * 4.0)
    gap = signed_phase_residual(0.0, 0.0, exact["entangling"] - adiabatic["entangling"] + math.pi)
    assert abs(gap) < 0.05
    assert exact["p01"] > 1.0 - 1e-6
    assert exact["p11"] > 1.0 - 1e-6


# Function: test_propagated_residual_at_listed_gate3
def test_propagated_residual_at_listed_gate3():
    """B/2π = 4 MHz, Δ/Ω₀ = -0.3, δt = 0.5 µs leaves about 14 mrad of entangling phase"""
    envelope = build_adiabatic_envelope(_adiabatic_gate())
    phases = propagated_phases(envelope, 2.0 * math.pi * 4.0)
    residual = signed_phase_residual(phases["phi01"], phases["phi10"], phases["phi11"])
    assert residual == pytest.approx(0.01441, abs=5e-4)
    assert cz_phase_defect(
        phases["phi01"], phases["phi10"], phases["phi11"], rule="entangling"
    ) == pytest.approx(abs(residual))


# Function: test_adiabaticity_margin
def test_adiabaticity_margin():
    envelope = build_adiabatic_envelope(_adiabatic_gate())
    margin = adiabaticity_margin(envelope)
    assert margin > 1.0
    slow = build_adiabatic_envelope(_adiabatic_gate(delta_t=1.0))
    assert adiabaticity_margin(slow) > margin


# Function: test_margin_sentinel_without_motion
def test_margin_sentinel_without_motion():
    envelope = PulseEnvelope(family=PulseFamily.GAUSSIAN, omega_max=0.0, detuning=-1.0, width=0.2)
    assert adiabaticity_margin(envelope) > 1e300
    assert np.all(envelope.rabi(np.linspace(-1, 1, 5)) == 0.0)
