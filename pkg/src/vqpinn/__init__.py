"""Quantum-circuit trial functions for differential equations.

A dense statevector simulator, differentiable circuit models with
re-uploaded coordinate encodings, collocation and weak-form losses over
decomposed domains, and a deterministic full-batch Adam trainer.
"""

from .decomposition import (
    Decomposition,
    Interface,
    PiecewiseModel,
    Subdomain,
    build,
    locate,
    piecewise_eval,
)
from .errors import (
    ConfigurationError,
    ContractError,
    EncodingDomainError,
    TrainingAborted,
)
from .losses import (
    LossBreakdown,
    LossWeights,
    Strategy,
    StrategyLoss,
    collocation_loss,
    ibv_loss,
    loss_and_gradients,
    parse_strategy,
    sbc_loss,
    strategy_loss,
    total_loss,
    weak_loss,
)
from .problems import (
    PROBLEM_NAMES,
    get_problem,
    weak_term,
)
from .qnn import (
    AnsatzSpec,
    CompiledQnn,
    DerivativeRequest,
    FeatureMapSpec,
    ModelParams,
    QnnLayout,
    compile_layout,
    evaluate_batch,
    model_gradients,
    model_input_derivative,
    model_value,
    model_values,
)
from .qsim import (
    Circuit,
    Gate,
    Observable,
    adjoint_gradient,
    apply_gate,
    expectation,
    run_circuit,
    shift_rule_gradient,
    zero_state,
)
from .quadrature import McConfig, monte_carlo, trapz_1d, trapz_2d, uniform_sampler
from .training import (
    TrainerConfig,
    TrainRecord,
    TrainResult,
    init_params,
    measure_of_success,
    train,
)

__all__ = [
    "AnsatzSpec",
    "Circuit",
    "CompiledQnn",
    "ConfigurationError",
    "ContractError",
    "Decomposition",
    "DerivativeRequest",
    "EncodingDomainError",
    "FeatureMapSpec",
    "Gate",
    "Interface",
    "LossBreakdown",
    "LossWeights",
    "McConfig",
    "ModelParams",
    "Observable",
    "PROBLEM_NAMES",
    "PiecewiseModel",
    "QnnLayout",
    "Strategy",
    "StrategyLoss",
    "Subdomain",
    "TrainRecord",
    "TrainResult",
    "TrainerConfig",
    "TrainingAborted",
    "adjoint_gradient",
    "apply_gate",
    "build",
    "collocation_loss",
    "compile_layout",
    "evaluate_batch",
    "expectation",
    "get_problem",
    "ibv_loss",
    "init_params",
    "locate",
    "loss_and_gradients",
    "measure_of_success",
    "model_gradients",
    "model_input_derivative",
    "model_value",
    "model_values",
    "monte_carlo",
    "parse_strategy",
    "piecewise_eval",
    "run_circuit",
    "sbc_loss",
    "shift_rule_gradient",
    "strategy_loss",
    "total_loss",
    "train",
    "trapz_1d",
    "trapz_2d",
    "uniform_sampler",
    "weak_loss",
    "weak_term",
    "zero_state",
]
