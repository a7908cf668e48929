import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from backend.services.errors import ConfigError
from physics_models.units import (
    Beam,
    PhysicalSetup,
    UnitSystem,
    boltzmann_weights,
    effective_beam_geometry,
    effective_temperature,
    effective_wavevector,
    mean_occupation,
    override_constants,
    recoil_energy,
    temperature_from_effective,
    thermal_rms_extent,
)


# Function: test_frequency_conversion
def test_frequency_conversion():
    assert UnitSystem.frequency_to_internal(1e6) == pytest.approx(2.0 * math.pi)
    assert UnitSystem.angular_to_si(UnitSystem.angular_to_internal(5.0e7)) == pytest.approx(5.0e7)


# Function: test_hbar_over_mass_cesium
def test_hbar_over_mass_cesium():
    assert UnitSystem.hbar_over_mass(132.91) == pytest.approx(4.778e-4, rel=1e-3)


# Function: test_counter_propagating_beams_net_wavevector
def test_counter_propagating_beams_net_wavevector(setup):
    """459 nm against 1038 nm leaves K ≈ 7.635 rad/µm"""
    k = effective_wavevector(setup)
    assert k["K"] == pytest.approx(7.635, rel=1e-3)
    assert k["lambda_eff_nm"] == pytest.approx(2.0 * math.pi / k["K"] * 1e3)


# Function: test_balanced_beams_give_zero_wavevector
def test_balanced_beams_give_zero_wavevector(setup):
    beams = [
        Beam(wavelength_nm=800.0, direction=1, waist_um=2.0),
        Beam(wavelength_nm=800.0, direction=-1, waist_um=2.0),
    ]
    k = effective_wavevector(setup.replace(beams=beams))
    assert k["K"] == 0.0
    assert math.isinf(k["lambda_eff_nm"])


# Function: test_effective_waist_of_equal_beams
def test_effective_waist_of_equal_beams(setup):
    geom = effective_beam_geometry(setup)
    assert geom["w0_eff"] == pytest.approx(2.0 / math.sqrt(2.0))
    assert len(geom["xR"]) == 2


# Function: test_zero_temperature_is_zero_point
def test_zero_temperature_is_zero_point(setup):
    omega = setup.omega_parallel
    assert effective_temperature(setup, omega) == pytest.approx(0.5 * omega)
    assert mean_occupation(setup, omega) == 0.0


# Function: test_classical_limit
def test_classical_limit(setup):
    omega = setup.omega_parallel
    hot = setup.replace(temperature_k=UnitSystem.temperature_to_si(100.0 * omega))
    assert effective_temperature(hot, omega) == pytest.approx(100.0 * omega, rel=1e-5)


# Function: test_effective_temperature_inverse
@given(st.floats(min_value=0.51, max_value=500.0))
def test_effective_temperature_inverse(ratio):
    setup = PhysicalSetup(beams=[Beam(wavelength_nm=459.0, waist_um=2.0)])
    omega = setup.omega_parallel
    t = temperature_from_effective(ratio * omega, omega)
    assert effective_temperature(setup.replace(temperature_k=t), omega) == pytest.approx(
        ratio * omega, rel=1e-9
    )


# Function: test_effective_temperature_below_zero_point
def test_effective_temperature_below_zero_point(setup):
    with pytest.raises(ConfigError) as exc:
        temperature_from_effective(0.4 * setup.omega_parallel, setup.omega_parallel)
    assert exc.value.exit_code == 2


# Function: test_recoil_energy_cesium
def test_recoil_energy_cesium(setup):
    assert recoil_energy(setup)["E_rec_over_kb_nk"] == pytest.approx(106.0, rel=0.01)


# Function: test_kick_displacement_grows_with_time
def test_kick_displacement_grows_with_time(setup):
    short = recoil_energy(setup, tau=0.1)["delta_x_kick"]
    long = recoil_energy(setup, tau=0.2)["delta_x_kick"]
    assert long == pytest.approx(2.0 * short)


# Function: test_rms_extent_transverse
def test_rms_extent_transverse(setup):
    """Cs at 5 µK in a 50 kHz trap spreads over roughly 56 nm"""
    warm = setup.replace(temperature_k=5e-6)
    assert thermal_rms_extent(warm, warm.omega_perp) == pytest.approx(0.056, rel=0.03)


# Function: test_boltzmann_weights_normalized
def test_boltzmann_weights_normalized(setup):
    warm = setup.replace(temperature_k=2e-6)
    weights = boltzmann_weights(warm, warm.omega_parallel, 400)
    assert weights.sum() == pytest.approx(1.0, abs=1e-8)
    assert np.all(np.diff(weights) < 0)


# Function: test_invalid_setup_is_config_error
def test_invalid_setup_is_config_error(config):
    with pytest.raises(ConfigError) as exc:
        PhysicalSetup.from_config(config.with_overrides({"atom.temperature_k": -1.0}))
    assert exc.value.code == "SETUP_INVALID"


# Function: test_beam_direction_must_be_unit
def test_beam_direction_must_be_unit():
    with pytest.raises(ValueError):
        Beam(wavelength_nm=459.0, direction=2, waist_um=2.0)


# Function: test_override_constants_restores
def test_override_constants_restores():
    before = UnitSystem.hbar_over_mass(132.91)
    with override_constants(amu=2.0 * 1.66053906660e-27):
        assert UnitSystem.hbar_over_mass(132.91) == pytest.approx(0.5 * before)
    assert UnitSystem.hbar_over_mass(132.91) == before
