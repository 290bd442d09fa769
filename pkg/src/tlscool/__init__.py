"""Sideband cooling of a mechanical resonator with a two-level-system defect.

Simulates the dressed-basis Lindblad master equation of the coupled
resonator-TLS system, optionally interleaved with periodic sigma_z
decoupling pulses, and reproduces the residual-phonon-number figures of the
published parameter sets via the scenario runners.
"""

from ._version import __version__
from .core import (
    DensityMatrix,
    Operator,
    SpaceDims,
    build_ladder,
    build_tls_ops,
    expectation,
    number_operator,
    thermal_resonator_state,
)
from .dissipation import (
    Generator,
    TransitionTable,
    bose_occupation,
    build_polariton_generator,
    build_simple_generator,
    build_transition_table,
    cavity_rates,
)
from .polariton import (
    PolaritonBasis,
    SystemParams,
    build_polariton_basis,
    jc_hamiltonian,
    pulse_matrix,
    transition_coefficients,
)
from .propagator import (
    ConvergenceReport,
    IntegratorConfig,
    PropagationError,
    convergence_sweep,
    propagate,
)
from .pulses import (
    Observables,
    PulseSchedule,
    Trajectory,
    apply_pulse,
    evolve_pulsed,
    uniform_schedule,
)
from .scenarios import (
    RunConfig,
    emit,
    execute_run,
    load_config,
    preset_config,
    run_scenario,
    sweep,
    theta_from_temperature,
)

__all__ = [
    "__version__",
    "DensityMatrix", "Operator", "SpaceDims",
    "build_ladder", "build_tls_ops", "expectation", "number_operator",
    "thermal_resonator_state",
    "Generator", "TransitionTable", "bose_occupation",
    "build_polariton_generator", "build_simple_generator",
    "build_transition_table", "cavity_rates",
    "PolaritonBasis", "SystemParams", "build_polariton_basis",
    "jc_hamiltonian", "pulse_matrix", "transition_coefficients",
    "ConvergenceReport", "IntegratorConfig", "PropagationError",
    "convergence_sweep", "propagate",
    "Observables", "PulseSchedule", "Trajectory", "apply_pulse",
    "evolve_pulsed", "uniform_schedule",
    "RunConfig", "emit", "execute_run", "load_config", "preset_config",
    "run_scenario", "sweep", "theta_from_temperature",
]
