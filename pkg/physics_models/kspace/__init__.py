from physics_models.kspace.grid import KGrid, thermal_density, thermal_wavenumber
from physics_models.kspace.propagator import (
    KKernel,
    ThermalOverlap,
    adiabatic_phase_check,
    chi_thermal,
    propagate_delta_kicks,
    propagate_stirap,
    propagate_two_level,
    recoil_shift,
    tau_a,
    tau_a_adiabatic,
)
