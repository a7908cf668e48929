from physics_models.analytic.focusing import (
    eps_focusing,
    eps_focusing_quadrature,
    phase_variation_estimates,
)
from physics_models.analytic.infidelity import (
    adiabatic_budget,
    doppler_asymptotics,
    heating_estimates,
    infidelity_adiabatic_kick,
    infidelity_adiabatic_radiative,
    infidelity_pi2pipi_kick,
    infidelity_radiative,
    infidelity_rydberg_kick,
    infidelity_trap_off_prediction,
    infidelity_trap_on_prediction,
    pi2pipi_budget,
)
from physics_models.analytic.overlaps import (
    KickTiming,
    OverlapResult,
    chi_ho_ground_exact,
    chi_single_2pi,
    chi_two_pi,
    eps_adiabatic,
    eps_ho_trap_on,
    eps_stirap,
    kick_rate,
)
