import dataclasses
import logging
import math

import numpy as np
import pytest

from backend.models.records import SimulationMode
from backend.services.errors import DimensionError, LinearizationError
from backend.services.experiment_service import load_gate, preset_overrides
from physics_models.units import Beam, PhysicalSetup
from physics_models.vibrational import (
    EnsembleMember,
    FockBasis,
    SolverSettings,
    build_displacement,
    build_displacement_taylor,
    build_run,
    ensemble_density,
    evolve_ensemble,
    evolve_member,
    fidelity_from_block,
    lindblad_reference,
    qubit_block_from_density,
    qubit_block_from_states,
    rr_kick_run,
    rydberg_time_integrals,
    simulate_gate,
    thermal_ensemble,
)
from physics_models.vibrational.fock_basis import displacement_by_quadrature


def _no_decay(setup):
    return setup.replace(rydberg_lifetime_us=None)


# Function: test_displacement_matches_quadrature
def test_displacement_matches_quadrature():
    closed = build_displacement(12, 0.3)
    assert np.max(np.abs(closed - displacement_by_quadrature(12, 0.3))) < 1e-8


# Function: test_displacement_matches_power_series
def test_displacement_matches_power_series():
    closed = build_displacement(6, 0.5)
    series = build_displacement_taylor(6, 0.5, order=30)
    assert np.max(np.abs(closed - series)) < 1e-10


# Function: test_displacement_low_elements
def test_displacement_low_elements():
    eta = 0.7
    d = build_displacement(4, eta)
    assert d[0, 0] == pytest.approx(math.exp(-0.5 * eta**2))
    assert d[1, 0] == pytest.approx(1j * eta * math.exp(-0.5 * eta**2))


# Function: test_displacement_sign_of_eta
def test_displacement_sign_of_eta():
    assert np.allclose(build_displacement(5, -0.4), build_displacement(5, 0.4).conj(), atol=1e-14)


# Function: test_truncated_displacement_unitary_on_low_levels
def test_truncated_displacement_unitary_on_low_levels():
    basis = FockBasis(n_max=30, omega=1.0, eta=0.2)
    assert basis.unitarity_error() < 1e-9


# Function: test_trap_off_kinetic_energy
def test_trap_off_kinetic_energy():
    basis = FockBasis(n_max=6, omega=2.0)
    assert basis.trap_hamiltonian(trap_on=False)[0, 0] == pytest.approx(0.5)
    assert basis.trap_hamiltonian(trap_on=True)[2, 2] == pytest.approx(5.0)
    assert np.all(FockBasis.internal_only().trap_hamiltonian() == 0.0)


# Function: test_zero_temperature_ensemble
def test_zero_temperature_ensemble(setup):
    assert thermal_ensemble(setup, setup.omega_parallel) == [EnsembleMember(0, 0, 1.0)]


# Function: test_thermal_ensemble_weights
def test_thermal_ensemble_weights(setup):
    warm = setup.replace(temperature_k=2e-6)
    members = thermal_ensemble(warm, warm.omega_parallel, weight_cutoff=1e-3)
    assert sum(m.weight for m in members) == pytest.approx(1.0)
    assert members[0] == EnsembleMember(0, 0, members[0].weight)
    assert members[1].weight == pytest.approx(members[2].weight)
    assert members[0].weight > members[1].weight


# Function: test_thermal_ensemble_outgrows_basis
def test_thermal_ensemble_outgrows_basis(setup):
    warm = setup.replace(temperature_k=2e-6)
    with pytest.raises(DimensionError) as exc:
        thermal_ensemble(warm, warm.omega_parallel, n_max=3)
    assert exc.value.exit_code == 2


# Function: test_bad_weight_cutoff
def test_bad_weight_cutoff(setup):
    with pytest.raises(ValueError):
        thermal_ensemble(setup, setup.omega_parallel, weight_cutoff=0.0)


# Function: test_member_outside_basis_rejected
def test_member_outside_basis_rejected(config, setup):
    settings = dataclasses.replace(SolverSettings(), n_max=3)
    hamiltonian, schedule, _, _ = build_run(setup, load_gate(config, setup), SimulationMode.AXIAL, settings)
    with pytest.raises(DimensionError):
        evolve_ensemble([EnsembleMember(5, 0, 1.0)], hamiltonian, schedule, settings)


# Function: test_internal_only_gate_is_near_perfect
def test_internal_only_gate_is_near_perfect(config, setup):
    clean = _no_decay(setup)
    report = simulate_gate(clean, load_gate(config, clean), SimulationMode.INTERNAL_ONLY)
    assert report.bell_fidelity > 0.999
    assert report.convergence.ledger_error < 1e-8
    assert report.convergence.phase_converged


# Function: test_decay_is_booked_in_ledger
def test_decay_is_booked_in_ledger(config, setup):
    hamiltonian, schedule, members, _ = build_run(
        setup, load_gate(config, setup), SimulationMode.INTERNAL_ONLY
    )
    (state,) = evolve_ensemble(members, hamiltonian, schedule)
    assert state.loss > 0.0
    assert state.ledger_error() < 1e-8


# Function: test_balanced_beams_decouple_motion
def test_balanced_beams_decouple_motion(config, setup):
    balanced = _no_decay(setup).replace(
        beams=[
            Beam(wavelength_nm=800.0, direction=1, waist_um=2.0),
            Beam(wavelength_nm=800.0, direction=-1, waist_um=2.0),
        ]
    )
    gate = load_gate(config, balanced)
    settings = dataclasses.replace(SolverSettings(), n_max=3)
    axial = simulate_gate(balanced, gate, SimulationMode.AXIAL, settings)
    internal = simulate_gate(balanced, gate, SimulationMode.INTERNAL_ONLY, settings)
    assert axial.bell_fidelity == pytest.approx(internal.bell_fidelity, abs=1e-8)


# Function: test_ideal_cz_block_is_bell
def test_ideal_cz_block_is_bell():
    v = 0.5 * np.array([1.0, -1.0, -1.0, -1.0], dtype=complex)
    result = fidelity_from_block(np.outer(v, v.conj()))
    assert result["bell_fidelity"] == pytest.approx(1.0, abs=1e-9)


# Function: test_fidelity_above_one_is_reported
def test_fidelity_above_one_is_reported(caplog):
    v = 0.5 * np.array([1.0, -1.0, -1.0, -1.0], dtype=complex)
    with caplog.at_level(logging.WARNING, logger="physics_models.vibrational.fidelity"):
        result = fidelity_from_block(1.01 * np.outer(v, v.conj()))
    assert result["bell_fidelity"] == pytest.approx(1.01, abs=1e-9)
    assert "exceeds 1" in caplog.text


# Function: test_product_block_caps_at_half
def test_product_block_caps_at_half():
    v = 0.5 * np.array([1.0, -1.0, -1.0, 1.0], dtype=complex)
    for mode in ("per_qubit", "common"):
        result = fidelity_from_block(np.outer(v, v.conj()), mode)
        assert result["bell_fidelity"] == pytest.approx(0.5, abs=1e-6)


# Function: test_ensemble_density_trace
def test_ensemble_density_trace(setup):
    warm = setup.replace(temperature_k=0.3e-6)
    members = thermal_ensemble(warm, warm.omega_parallel, weight_cutoff=0.05, n_max=3)
    rho = ensemble_density(members, 3)
    assert np.trace(rho).real == pytest.approx(1.0)
    assert np.allclose(rho, rho.conj().T)


# Function: test_lindblad_rejects_large_basis
def test_lindblad_rejects_large_basis(config, setup):
    settings = dataclasses.replace(SolverSettings(), n_max=4)
    hamiltonian, schedule, members, _ = build_run(
        setup, load_gate(config, setup), SimulationMode.AXIAL, settings
    )
    with pytest.raises(DimensionError) as exc:
        lindblad_reference(ensemble_density(members, 4), hamiltonian, schedule, settings)
    assert exc.value.code == "LINDBLAD_TOO_LARGE"


# Function: test_ensemble_matches_master_equation
@pytest.mark.slow
def test_ensemble_matches_master_equation(config):
    """Pure-state ensemble with booked loss agrees with the dense Lindblad solution"""
    overrides = preset_overrides(config, "gate3", "66S")
    gate_config = config.with_overrides(overrides)
    setup = PhysicalSetup.from_config(gate_config)
    settings = dataclasses.replace(SolverSettings.from_config(gate_config), n_max=2)
    hamiltonian, schedule, members, _ = build_run(
        setup, load_gate(gate_config, setup), SimulationMode.AXIAL, settings
    )
    states = evolve_ensemble(members, hamiltonian, schedule, settings)
    rho = lindblad_reference(ensemble_density(members, 2), hamiltonian, schedule, settings)
    difference = qubit_block_from_states(states, 2) - qubit_block_from_density(rho, 2)
    assert np.max(np.abs(difference)) < 1e-8


# Function: test_axial_result_converged_in_basis
@pytest.mark.slow
def test_axial_result_converged_in_basis(config, setup):
    clean = _no_decay(setup)
    gate = load_gate(config, clean)
    small = simulate_gate(clean, gate, SimulationMode.AXIAL, dataclasses.replace(SolverSettings(), n_max=8))
    large = simulate_gate(clean, gate, SimulationMode.AXIAL, dataclasses.replace(SolverSettings(), n_max=12))
    assert small.bell_fidelity == pytest.approx(large.bell_fidelity, abs=1e-6)
    assert large.bell_fidelity < 1.0


def _gate3(config):
    gate_config = config.with_overrides(preset_overrides(config, "gate3", "66S"))
    setup = PhysicalSetup.from_config(gate_config)
    return gate_config, setup, load_gate(gate_config, setup)


# Function: test_evolve_member_matches_batch
def test_evolve_member_matches_batch(config, setup):
    warm = setup.replace(temperature_k=0.3e-6)
    settings = dataclasses.replace(SolverSettings(), n_max=4, weight_cutoff=0.05)
    hamiltonian, schedule, members, _ = build_run(
        warm, load_gate(config, warm), SimulationMode.AXIAL, settings
    )
    batch = evolve_ensemble(members, hamiltonian, schedule, settings)
    single = evolve_member(members[1], hamiltonian, schedule, settings)
    assert np.allclose(single.amplitudes, batch[1].amplitudes, atol=1e-8)


# Function: test_gate3_rydberg_time_integrals
def test_gate3_rydberg_time_integrals(config):
    _, setup, gate = _gate3(config)
    hamiltonian, schedule, _, _ = build_run(
        setup.replace(rydberg_lifetime_us=None), gate, SimulationMode.INTERNAL_ONLY
    )
    times = rydberg_time_integrals(hamiltonian, schedule)
    assert times["tau_R"] == pytest.approx(0.416, abs=0.003)
    assert times["tau_RR"] == pytest.approx(0.157, rel=0.05)
    assert 0.0 < times["tau_RR"] < times["tau_R"]


# Function: test_pair_force_needs_small_spread
def test_pair_force_needs_small_spread(config):
    _, setup, gate = _gate3(config)
    crowded = setup.replace(temperature_k=5e-6, r12_um=0.2)
    with pytest.raises(LinearizationError) as exc:
        rr_kick_run(crowded, gate)
    assert exc.value.code == "RR_LINEARIZATION"


# Function: test_pair_force_lowers_fidelity
@pytest.mark.slow
def test_pair_force_lowers_fidelity(config):
    _, setup, gate = _gate3(config)
    clean = setup.replace(rydberg_lifetime_us=None)
    settings = dataclasses.replace(SolverSettings(), n_max=8)
    with_force = rr_kick_run(clean, gate, settings)
    without = rr_kick_run(clean, gate, settings, include_gradient=False)
    assert with_force.bell_fidelity < without.bell_fidelity
    assert with_force.convergence.overflow_population < 1e-6


# Function: test_adiabatic_window_converged
def test_adiabatic_window_converged(config):
    """Integration window of ±4δt is wide enough for the Gaussian pulse"""
    _, setup, gate = _gate3(config)
    clean = setup.replace(rydberg_lifetime_us=None)
    narrow = simulate_gate(clean, gate, SimulationMode.INTERNAL_ONLY)
    wide = simulate_gate(clean, gate.model_copy(update={"window_factor": 5.0}), SimulationMode.INTERNAL_ONLY)
    assert wide.bell_fidelity == pytest.approx(narrow.bell_fidelity, abs=1e-7)
