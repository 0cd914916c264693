"""Repeated interaction systems: reduced dynamics, van Hove generators and asymptotic states."""

from ._risim import (
    BranchCutError,
    ConfigError,
    CostGuardError,
    DefectError,
    Error,
    InputError,
    NoAsymptoticStateError,
    RISModel,
    SpinParams,
    __version__,
    asymptotic_state,
    build_spin_model,
    check_H1,
    choi_matrix,
    closed_form_deltas,
    converge_lambda,
    converge_tau,
    effective_asymptotic_state,
    effective_generator,
    gibbs_state,
    interaction_dynamics,
    reduced_map,
    restricted_dynamics,
    run_config,
    spin_asymptotic_state,
    system_evolution,
)

__all__ = [name for name in dir() if not name.startswith("_")] + ["__version__"]
