"""Sparse piecewise-constant control pulses for Heisenberg spin chains.

Synthesizes x/y control fields on the first spin of a Heisenberg chain that
realize a target gate with high fidelity while keeping the total pulse
magnitude small, and compares the robustness of penalized and unpenalized
solutions against a pulse-coupled environment qubit via Choi trace distances.
"""

from .channels import (
    ChoiMatrix,
    RobustnessReport,
    choi_distance,
    choi_of_env_channel,
    choi_of_unitary,
    robustness_experiment,
)
from .model import (
    ChainSpec,
    ControlSequence,
    TargetGate,
    bloch_trajectories,
    control_hamiltonian,
    drift_hamiltonian,
    env_hamiltonian,
    propagate,
    propagate_with_env,
    target_unitary,
)
from .objective import (
    ObjectiveConfig,
    fidelity,
    objective_gradient,
    objective_value,
    penalty,
    surrogate_abs,
    surrogate_abs_derivative,
    surrogate_objective_value,
    surrogate_penalty,
)
from .optimizer import (
    BfgsInfo,
    OptimizationResult,
    OptimizerConfig,
    bfgs_minimize,
    optimize_controls,
)

__version__ = "0.1.0"

__all__ = [
    "ChainSpec",
    "ChoiMatrix",
    "ControlSequence",
    "BfgsInfo",
    "ObjectiveConfig",
    "OptimizationResult",
    "OptimizerConfig",
    "RobustnessReport",
    "TargetGate",
    "bfgs_minimize",
    "bloch_trajectories",
    "choi_distance",
    "choi_of_env_channel",
    "choi_of_unitary",
    "control_hamiltonian",
    "drift_hamiltonian",
    "env_hamiltonian",
    "fidelity",
    "objective_gradient",
    "objective_value",
    "optimize_controls",
    "penalty",
    "propagate",
    "propagate_with_env",
    "robustness_experiment",
    "surrogate_abs",
    "surrogate_abs_derivative",
    "surrogate_objective_value",
    "surrogate_penalty",
    "target_unitary",
]
