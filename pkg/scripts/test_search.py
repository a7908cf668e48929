import math

import pytest

from backend.services.errors import ConfigError, SearchError
from pulse_processing import cz_phase_defect, search_adiabatic_params
from pulse_processing.search import AdiabaticGateSearch

OMEGA0 = 2.0 * math.pi * 17.0

# (B/2π in MHz, listed Δ/Ω₀, listed δt in µs, δt solving the phase condition at that Δ/Ω₀)
LISTED_GATES = {
    "gate1": (600.0, -0.5, 0.2, 0.20104),
    "gate2": (60.0, -0.8635, 0.2165, 0.21642),
    "gate3": (4.0, -0.3, 0.5, 0.49769),
}


def _round_trip(name, grid_points=41):
    """Solve δt at the listed ratio, then re-solve the ratio at that δt."""
    b_mhz, ratio, width, _ = LISTED_GATES[name]
    blockade = 2.0 * math.pi * b_mhz
    by_width = search_adiabatic_params(
        blockade,
        OMEGA0,
        (0.95 * width, 1.05 * width),
        detuning_ratio=ratio,
        grid_points=grid_points,
    )
    found = by_width.gate.delta_t
    by_ratio = search_adiabatic_params(blockade, OMEGA0, (found, found), grid_points=grid_points)
    return by_width, by_ratio


# Function: test_search_rejects_non_positive_inputs
@pytest.mark.parametrize("blockade, omega0", [(0.0, OMEGA0), (25.0, 0.0)])
def test_search_rejects_non_positive_inputs(blockade, omega0):
    with pytest.raises(ConfigError) as exc:
        search_adiabatic_params(blockade, omega0, (0.5, 0.5))
    assert exc.value.exit_code == 2


# Function: test_search_rejects_bad_width
def test_search_rejects_bad_width():
    with pytest.raises(ConfigError):
        search_adiabatic_params(2.0 * math.pi * 4.0, OMEGA0, (0.0, 0.5))


# Function: test_search_rejects_unknown_phase_model
def test_search_rejects_unknown_phase_model():
    with pytest.raises(ConfigError) as exc:
        AdiabaticGateSearch(2.0 * math.pi * 4.0, OMEGA0, phase_model="sudden")
    assert exc.value.code == "SEARCH_INPUT"


# Function: test_residual_continuous_in_ratio
def test_residual_continuous_in_ratio():
    search = AdiabaticGateSearch(2.0 * math.pi * 4.0, OMEGA0, n_points=1001)
    for model in ("adiabatic", "propagated"):
        a = search.residual(-0.30, 0.5, model)
        b = search.residual(-0.30 + 1e-6, 0.5, model)
        assert abs(a - b) < 1e-3


# Function: test_unreachable_tolerance_raises
def test_unreachable_tolerance_raises():
    with pytest.raises(SearchError) as exc:
        search_adiabatic_params(
            2.0 * math.pi * 4.0,
            OMEGA0,
            (0.5, 0.5),
            detuning_bounds=(-0.12, -0.1),
            max_defect=0.0,
            grid_points=5,
            n_points=1001,
        )
    assert exc.value.exit_code == 4
    assert "defect" in exc.value.details


# Function: test_listed_point_is_not_an_exact_root
def test_listed_point_is_not_an_exact_root():
    """At the listed gate 3 parameters a defect limit below the residual rejects the point"""
    with pytest.raises(SearchError) as exc:
        search_adiabatic_params(
            2.0 * math.pi * 4.0, OMEGA0, (0.5, 0.5), detuning_ratio=-0.3, max_defect=1e-3
        )
    assert exc.value.details["defect"] == pytest.approx(0.01441, abs=5e-4)


# Function: test_gate3_round_trip
def test_gate3_round_trip():
    by_width, by_ratio = _round_trip("gate3", grid_points=21)
    assert by_width.gate.delta_t == pytest.approx(LISTED_GATES["gate3"][3], abs=2e-4)
    assert by_width.gate.detuning_ratio == -0.3
    assert by_ratio.gate.detuning_ratio == pytest.approx(-0.3, abs=5e-5)
    assert by_ratio.defect < 1e-6
    phases = by_ratio.phases
    assert by_ratio.defect == pytest.approx(
        cz_phase_defect(phases["phi01"], phases["phi10"], phases["phi11"], rule="entangling")
    )
    assert by_ratio.margin > 1.0


# Function: test_adiabatic_model_root_at_listed_width
def test_adiabatic_model_root_at_listed_width():
    result = search_adiabatic_params(
        2.0 * math.pi * 4.0, OMEGA0, (0.5, 0.5), phase_model="adiabatic"
    )
    assert result.gate.detuning_ratio == pytest.approx(-0.29969, abs=2e-4)
    assert result.gate.delta_t == 0.5


# Function: test_fast_gate_round_trip
@pytest.mark.slow
@pytest.mark.parametrize("name", ["gate1", "gate2"])
def test_fast_gate_round_trip(name):
    _, ratio, width, root = LISTED_GATES[name]
    by_width, by_ratio = _round_trip(name)
    assert by_width.gate.delta_t == pytest.approx(root, abs=2e-4)
    assert by_width.gate.delta_t == pytest.approx(width, rel=0.01)
    assert by_ratio.gate.detuning_ratio == pytest.approx(ratio, abs=5e-5)
    assert by_ratio.defect < 1e-6


# Function: test_gate2_returns_the_adiabatic_root
@pytest.mark.slow
def test_gate2_returns_the_adiabatic_root():
    """The weak-detuning root near -0.16 leaks out of |11⟩ and is dropped"""
    result = search_adiabatic_params(2.0 * math.pi * 60.0, OMEGA0, (0.2165, 0.2165))
    assert result.gate.detuning_ratio == pytest.approx(-0.86390, abs=2e-4)
    assert result.phases["p11"] > 1.0 - 1e-6
