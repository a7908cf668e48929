from physics_models.vibrational.evolution import (
    EnsembleMember,
    EvolutionState,
    SolverSettings,
    evolve_ensemble,
    evolve_member,
    rydberg_time_integrals,
    thermal_ensemble,
)
from physics_models.vibrational.fidelity import (
    bell_fidelity,
    build_run,
    fidelity_from_block,
    qubit_block_from_density,
    qubit_block_from_states,
    rr_kick_run,
    schedule_hash,
    simulate_gate,
)
from physics_models.vibrational.fock_basis import (
    FockBasis,
    build_displacement,
    build_displacement_taylor,
)
from physics_models.vibrational.hamiltonian import GateHamiltonian, GateSchedule
from physics_models.vibrational.lindblad import ensemble_density, lindblad_reference
