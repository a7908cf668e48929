from pulse_processing.envelopes import (
    GateKind,
    GateSpec,
    PulseEnvelope,
    PulseFamily,
    build_adiabatic_envelope,
    build_pi2pipi_envelopes,
    calibrate_pulse_area,
    gate_envelopes,
    gate_window,
    super_gaussian_integral,
)
from pulse_processing.phases import (
    adiabaticity_margin,
    cz_phase_defect,
    dynamical_phases,
    propagated_phases,
)
from pulse_processing.search import search_adiabatic_params
