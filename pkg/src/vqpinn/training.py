"""Full-batch Adam training of piecewise models.

One optimizer instance drives the concatenation of every subdomain's
parameters, packed per subdomain as [theta..., scale, shift].  Each epoch
evaluates the strategy loss with gradients over the whole training set,
takes one Adam step, and records the loss breakdown plus the error
against the closed-form solution.  All randomness flows from a single
seeded generator, so a rerun with the same configuration is bitwise
identical.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .decomposition import Decomposition, PiecewiseModel, build, piecewise_eval
from .errors import ConfigurationError, TrainingAborted
from .losses import (
    LossBreakdown,
    LossWeights,
    Strategy,
    loss_and_gradients,
    strategy_coefficients,
)
from .qnn import CompiledQnn, ModelParams, compile_layout

__all__ = [
    "AdamState",
    "TrainRecord",
    "TrainResult",
    "TrainerConfig",
    "adam_step",
    "init_params",
    "measure_of_success",
    "pack_parameters",
    "train",
    "unpack_parameters",
]


@dataclass
class AdamState:
    """First and second moment accumulators plus the step counter."""

    m: np.ndarray
    v: np.ndarray
    t: int = 0

    @classmethod
    def zeros(cls, size: int) -> "AdamState":
        return cls(m=np.zeros(size), v=np.zeros(size))


def adam_step(state: AdamState, values: np.ndarray, grad: np.ndarray,
              learning_rate: float, beta1: float = 0.9, beta2: float = 0.999,
              eps: float = 1e-8) -> np.ndarray:
    """One bias-corrected Adam update; mutates the state, returns new values."""
    state.t += 1
    state.m = beta1 * state.m + (1.0 - beta1) * grad
    state.v = beta2 * state.v + (1.0 - beta2) * grad * grad
    m_hat = state.m / (1.0 - beta1 ** state.t)
    v_hat = state.v / (1.0 - beta2 ** state.t)
    return values - learning_rate * m_hat / (np.sqrt(v_hat) + eps)


@dataclass(frozen=True)
class TrainerConfig:
    """weights None means: use the problem's default_weights."""

    epochs: int
    learning_rate: float = 0.2
    seed: int = 0
    weights: LossWeights | None = None
    weak_include_ibv: bool = True

    def __post_init__(self) -> None:
        if self.epochs < 1:
            raise ConfigurationError(f"epochs must be >= 1, got {self.epochs}")
        if not math.isfinite(self.learning_rate) or self.learning_rate <= 0:
            raise ConfigurationError(
                f"learning_rate must be finite and > 0, got {self.learning_rate}"
            )


@dataclass(frozen=True)
class TrainRecord:
    """State after `epoch` optimizer steps."""

    epoch: int
    breakdown: LossBreakdown
    metric: float


@dataclass
class TrainResult:
    pm: PiecewiseModel
    history: list[TrainRecord]


def pack_parameters(params: list[ModelParams]) -> np.ndarray:
    blocks = []
    for p in params:
        blocks.append(np.concatenate([p.theta, [p.scale, p.shift]]))
    return np.concatenate(blocks)


def unpack_parameters(vec: np.ndarray, num_theta: int,
                      num_subdomains: int) -> list[ModelParams]:
    size = num_theta + 2
    out = []
    for sub in range(num_subdomains):
        block = vec[sub * size:(sub + 1) * size]
        out.append(ModelParams(theta=block[:num_theta].copy(),
                               scale=float(block[num_theta]),
                               shift=float(block[num_theta + 1])))
    return out


def init_params(compiled: CompiledQnn, num_subdomains: int,
                seed: int) -> list[ModelParams]:
    """Angles uniform on [0, 2pi), scale 1, shift 0, one stream for all."""
    rng = np.random.default_rng(seed)
    return [
        ModelParams(theta=rng.uniform(0.0, 2.0 * np.pi, compiled.num_theta),
                    scale=1.0, shift=0.0)
        for _ in range(num_subdomains)
    ]


def measure_of_success(problem, pm: PiecewiseModel, points=None) -> float:
    """Mean squared error against the closed-form solution."""
    X = pm.decomposition.all_points() if points is None else np.asarray(points, dtype=float)
    diff = piecewise_eval(pm, X) - problem.solution(X)
    return float(diff @ diff) / X.shape[0]


def _check_finite(breakdown: LossBreakdown, gradient: np.ndarray, epoch: int) -> None:
    for name in ("l_de", "l_ibv", "l_sbc", "l_wf", "total"):
        if not math.isfinite(getattr(breakdown, name)):
            raise TrainingAborted(f"non-finite {name} at epoch {epoch}")
    if not np.all(np.isfinite(gradient)):
        raise TrainingAborted(f"non-finite gradient at epoch {epoch}")


def train(problem, strategy: Strategy, config: TrainerConfig,
          decomposition: Decomposition | None = None,
          compiled: CompiledQnn | None = None) -> TrainResult:
    """Train one piecewise model from scratch under the given strategy."""
    if decomposition is None:
        decomposition = build(problem)
    if compiled is None:
        compiled = compile_layout(problem.layout())
    weights = config.weights
    if weights is None:
        weights = LossWeights(**getattr(problem, "default_weights", {}))
    family = None
    assembly = None
    if "l_wf" in strategy_coefficients(strategy, weights,
                                       config.weak_include_ibv):
        family = problem.test_functions()
        assembly = problem.weak_assembly(family, decomposition.regions)

    values = pack_parameters(init_params(compiled, decomposition.num_subdomains,
                                         config.seed))
    state = AdamState.zeros(values.size)
    history: list[TrainRecord] = []
    pm = None
    for epoch in range(config.epochs + 1):
        pm = PiecewiseModel(
            decomposition, compiled,
            unpack_parameters(values, compiled.num_theta,
                              decomposition.num_subdomains),
        )
        out = loss_and_gradients(
            problem, pm, strategy, weights=weights, family=family,
            assembly=assembly, weak_include_ibv=config.weak_include_ibv,
        )
        gradient = np.concatenate(out.gradients)
        _check_finite(out.breakdown, gradient, epoch)
        history.append(TrainRecord(epoch=epoch, breakdown=out.breakdown,
                                   metric=measure_of_success(problem, pm)))
        if epoch < config.epochs:
            values = adam_step(state, values, gradient, config.learning_rate)
    return TrainResult(pm=pm, history=history)
