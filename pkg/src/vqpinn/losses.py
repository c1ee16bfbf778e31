"""Loss components and training strategies.

Four scalar components: the mean squared residual over the training
points (DE), the summed per-condition mean squared boundary mismatch
(IBV), the mean squared solution jump across subdomain interfaces (SBC),
and the mean squared weak term over the test-function family (WF).  A
strategy gates which components enter the weighted total:

    coll       gamma_res * (alpha * DE + beta * IBV)
    coll_join  coll + gamma_sbc * SBC
    weak       gamma_wf * WF + beta * IBV
    both       gamma_res * (alpha * DE + beta * IBV) + gamma_wf * WF

The value-level functions accept either a piecewise model or a raw
``evaluate(region, points, req)`` callable, so closed-form oracles can be
fed through the same code path.  ``loss_and_gradients`` is the training
entry point: it shares model evaluations between components and pulls
weak-form gradients through the linear assembly instead of re-deriving
each test function.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Mapping

import numpy as np

from .decomposition import PiecewiseModel, locate
from .errors import ConfigurationError, ContractError
from .problems import FieldBundle, WeakAssembly, weak_term
from .qnn import DerivativeRequest, evaluate_batch

__all__ = [
    "LossBreakdown",
    "LossWeights",
    "Strategy",
    "StrategyLoss",
    "collocation_loss",
    "ibv_loss",
    "loss_and_gradients",
    "parse_strategy",
    "sbc_loss",
    "strategy_coefficients",
    "strategy_loss",
    "total_loss",
    "weak_loss",
]


class Strategy(Enum):
    COLL = "coll"
    COLL_JOIN = "coll_join"
    WEAK = "weak"
    BOTH = "both"


def parse_strategy(name: str) -> Strategy:
    for strategy in Strategy:
        if strategy.value == name:
            return strategy
    options = ", ".join(s.value for s in Strategy)
    raise ConfigurationError(f"unknown strategy {name!r}; choose one of {options}")


@dataclass(frozen=True)
class LossWeights:
    """Non-negative multipliers applied inside the strategy total."""

    alpha: float = 1.0
    beta: float = 1.0
    gamma_res: float = 1.0
    gamma_wf: float = 1.0
    gamma_sbc: float = 1.0

    def __post_init__(self) -> None:
        for name in ("alpha", "beta", "gamma_res", "gamma_wf", "gamma_sbc"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise ConfigurationError(f"{name} must be finite and >= 0, got {value}")


@dataclass(frozen=True)
class LossBreakdown:
    """Component values plus the strategy-gated weighted total.

    Components a strategy does not evaluate are reported as 0.0.
    """

    l_de: float
    l_ibv: float
    l_sbc: float
    l_wf: float
    total: float


def strategy_coefficients(strategy: Strategy, weights: LossWeights,
                          weak_include_ibv: bool = True) -> dict[str, float]:
    """Weight on each component in the given strategy's total."""
    res = {"l_de": weights.gamma_res * weights.alpha,
           "l_ibv": weights.gamma_res * weights.beta}
    if strategy is Strategy.COLL:
        return res
    if strategy is Strategy.COLL_JOIN:
        return {**res, "l_sbc": weights.gamma_sbc}
    if strategy is Strategy.WEAK:
        out = {"l_wf": weights.gamma_wf}
        if weak_include_ibv:
            out["l_ibv"] = weights.beta
        return out
    if strategy is Strategy.BOTH:
        return {**res, "l_wf": weights.gamma_wf}
    raise ContractError(f"unhandled strategy {strategy}")


def total_loss(strategy: Strategy, weights: LossWeights,
               components: Mapping[str, float],
               weak_include_ibv: bool = True) -> LossBreakdown:
    """Combine computed component values into the strategy total."""
    coeffs = strategy_coefficients(strategy, weights, weak_include_ibv)
    total = 0.0
    for name, coeff in coeffs.items():
        if name not in components:
            raise ContractError(f"strategy {strategy.value} needs component {name}")
        total += coeff * components[name]
    return LossBreakdown(
        l_de=float(components.get("l_de", 0.0)),
        l_ibv=float(components.get("l_ibv", 0.0)),
        l_sbc=float(components.get("l_sbc", 0.0)),
        l_wf=float(components.get("l_wf", 0.0)),
        total=float(total),
    )


# ---------------------------------------------------------------------------
# value-level components
# ---------------------------------------------------------------------------

def _region_evaluator(model):
    if isinstance(model, PiecewiseModel):
        compiled, params = model.compiled, model.params

        def evaluate(region: int, X, req=None):
            return evaluate_batch(compiled, params[region], X, req).values

        return evaluate
    return model


def _residual_bundle(problem, fetch) -> FieldBundle:
    f = fetch(None) if problem.needs_value else None
    df: dict[int, np.ndarray] = {}
    d2f: dict[int, np.ndarray] = {}
    for req in problem.residual_requests:
        target = df if req.order == 1 else d2f
        target[req.dim] = fetch(req)
    return FieldBundle(f=f, df=df, d2f=d2f)


def collocation_loss(problem, model, points=None) -> float:
    """Mean squared residual over the training points."""
    evaluate = _region_evaluator(model)
    if isinstance(model, PiecewiseModel):
        decomposition = model.decomposition
        if points is None:
            groups = [(sub.index, sub.owned_points) for sub in decomposition.subdomains]
        else:
            X = decomposition.as_points(points)
            owners = locate(decomposition, X)
            groups = [(i, X[owners == i]) for i in range(decomposition.num_subdomains)]
    else:
        if points is None:
            raise ContractError("collocation_loss needs explicit points for a raw evaluator")
        groups = [(0, np.asarray(points, dtype=float))]
    ssq = 0.0
    count = 0
    for region, X in groups:
        if X.shape[0] == 0:
            continue
        bundle = _residual_bundle(problem, lambda req: evaluate(region, X, req))
        r = problem.residual(X, bundle)
        ssq += float(r @ r)
        count += X.shape[0]
    return ssq / count


def ibv_loss(problem, model, conditions=None) -> float:
    """Summed per-condition mean squared mismatch against boundary data."""
    evaluate = _region_evaluator(model)
    if conditions is None:
        conditions = problem.boundary_conditions()
    total = 0.0
    for bc in conditions:
        X = np.asarray(bc.points, dtype=float)
        if isinstance(model, PiecewiseModel):
            owners = locate(model.decomposition, X)
            values = np.empty(X.shape[0])
            for region in np.unique(owners):
                mask = owners == region
                values[mask] = evaluate(int(region), X[mask], None)
        else:
            values = evaluate(0, X, None)
        diff = values - bc.targets
        total += float(diff @ diff) / X.shape[0]
    return total


def sbc_loss(model, decomposition=None) -> float:
    """Mean squared solution jump over all (interface, point) pairs."""
    if isinstance(model, PiecewiseModel):
        decomposition = model.decomposition
    elif decomposition is None:
        raise ContractError("sbc_loss needs a decomposition for a raw evaluator")
    evaluate = _region_evaluator(model)
    ssq = 0.0
    count = 0
    for face in decomposition.interfaces:
        lower = evaluate(face.lower, face.points, None)
        upper = evaluate(face.upper, face.points, None)
        jump = lower - upper
        ssq += float(jump @ jump)
        count += face.points.shape[0]
    if count == 0:
        return 0.0
    return ssq / count


def weak_loss(problem, model, family=None, regions=None) -> float:
    """Mean squared weak term over the test-function family."""
    evaluate = _region_evaluator(model)
    if regions is None:
        if not isinstance(model, PiecewiseModel):
            raise ContractError("weak_loss needs explicit regions for a raw evaluator")
        regions = model.decomposition.regions
    if family is None:
        family = problem.test_functions()
    terms = np.array([weak_term(problem, v, evaluate, regions) for v in family])
    return float(terms @ terms) / len(family)


def strategy_loss(problem, pm, strategy: Strategy, weights: LossWeights | None = None,
                  family=None, weak_include_ibv: bool = True) -> LossBreakdown:
    """Evaluate the components a strategy needs, values only.

    Uses the literal per-test-function weak term, so it doubles as an
    independent check on the assembled gradient path.
    """
    weights = weights or LossWeights()
    coeffs = strategy_coefficients(strategy, weights, weak_include_ibv)
    components: dict[str, float] = {}
    if "l_de" in coeffs:
        components["l_de"] = collocation_loss(problem, pm)
    if "l_ibv" in coeffs:
        components["l_ibv"] = ibv_loss(problem, pm)
    if "l_sbc" in coeffs:
        components["l_sbc"] = sbc_loss(pm)
    if "l_wf" in coeffs:
        components["l_wf"] = weak_loss(problem, pm, family=family)
    return total_loss(strategy, weights, components, weak_include_ibv)


# ---------------------------------------------------------------------------
# gradient path
# ---------------------------------------------------------------------------

@dataclass
class StrategyLoss:
    """A strategy total with its gradient, one block per subdomain.

    Each block is the concatenation [d/d theta..., d/d scale, d/d shift].
    """

    breakdown: LossBreakdown
    gradients: list[np.ndarray]


class _CachedEvaluator:
    """Deduplicates model evaluations within one loss pass."""

    def __init__(self, pm: PiecewiseModel, need_grads: bool):
        self._pm = pm
        self._need_grads = need_grads
        self._store: dict = {}

    def get(self, region: int, X: np.ndarray, req: DerivativeRequest | None = None):
        X = np.asarray(X, dtype=float)
        key = (region, req, X.shape, X.tobytes())
        if key not in self._store:
            self._store[key] = evaluate_batch(
                self._pm.compiled, self._pm.params[region], X, req,
                need_grads=self._need_grads,
            )
        return self._store[key]


def _accumulate(grads: list[np.ndarray], region: int, w: np.ndarray, result) -> None:
    block = grads[region]
    num_theta = result.dtheta.shape[1]
    block[:num_theta] += w @ result.dtheta
    block[num_theta] += w @ result.dscale
    block[num_theta + 1] += w @ result.dshift


def _de_with_grads(problem, pm, cache, grads, coeff) -> float:
    total_points = sum(sub.owned_points.shape[0] for sub in pm.decomposition.subdomains)
    ssq = 0.0
    for sub in pm.decomposition.subdomains:
        X = sub.owned_points
        if X.shape[0] == 0:
            continue
        results = {req: cache.get(sub.index, X, req) for req in problem.residual_requests}
        if problem.needs_value:
            results[None] = cache.get(sub.index, X, None)
        bundle = _residual_bundle(problem, lambda req: results[req].values)
        r = problem.residual(X, bundle)
        ssq += float(r @ r)
        for key, partial in problem.residual_partials(X, bundle).items():
            w = (2.0 * coeff / total_points) * r * partial
            _accumulate(grads, sub.index, w, results[key])
    return ssq / total_points


def _ibv_with_grads(problem, pm, cache, grads, coeff) -> float:
    total = 0.0
    for bc in problem.boundary_conditions():
        X = np.asarray(bc.points, dtype=float)
        owners = locate(pm.decomposition, X)
        for region in np.unique(owners):
            mask = owners == region
            result = cache.get(int(region), X[mask], None)
            diff = result.values - bc.targets[mask]
            total += float(diff @ diff) / X.shape[0]
            w = (2.0 * coeff / X.shape[0]) * diff
            _accumulate(grads, int(region), w, result)
    return total


def _sbc_with_grads(pm, cache, grads, coeff) -> float:
    count = sum(face.points.shape[0] for face in pm.decomposition.interfaces)
    if count == 0:
        return 0.0
    ssq = 0.0
    for face in pm.decomposition.interfaces:
        lower = cache.get(face.lower, face.points, None)
        upper = cache.get(face.upper, face.points, None)
        jump = lower.values - upper.values
        ssq += float(jump @ jump)
        w = (2.0 * coeff / count) * jump
        _accumulate(grads, face.lower, w, lower)
        _accumulate(grads, face.upper, -w, upper)
    return ssq / count


def _wf_with_grads(problem, pm, family, assembly: WeakAssembly, cache, grads, coeff) -> float:
    results = [cache.get(b.region, b.points, b.req) for b in assembly.batches]
    values = [res.values for res in results]
    terms = assembly.terms(values)
    count = len(family)
    base = (2.0 * coeff / count) * terms
    cotangents = [np.zeros(v.shape[0]) for v in values]
    for idx, w in assembly.linear:
        cotangents[idx] += base @ w
    for fi, di, u in assembly.bilinear:
        s = base @ u
        cotangents[fi] += s * values[di]
        cotangents[di] += s * values[fi]
    for batch, result, cot in zip(assembly.batches, results, cotangents):
        _accumulate(grads, batch.region, cot, result)
    return float(terms @ terms) / count


def loss_and_gradients(problem, pm: PiecewiseModel, strategy: Strategy,
                       weights: LossWeights | None = None, family=None,
                       assembly: WeakAssembly | None = None,
                       weak_include_ibv: bool = True) -> StrategyLoss:
    """One full loss pass: component values, total, and its gradient."""
    weights = weights or LossWeights()
    coeffs = strategy_coefficients(strategy, weights, weak_include_ibv)
    cache = _CachedEvaluator(pm, need_grads=True)
    size = pm.compiled.num_theta + 2
    grads = [np.zeros(size) for _ in range(pm.decomposition.num_subdomains)]
    components: dict[str, float] = {}
    if "l_de" in coeffs:
        components["l_de"] = _de_with_grads(problem, pm, cache, grads, coeffs["l_de"])
    if "l_ibv" in coeffs:
        components["l_ibv"] = _ibv_with_grads(problem, pm, cache, grads, coeffs["l_ibv"])
    if "l_sbc" in coeffs:
        components["l_sbc"] = _sbc_with_grads(pm, cache, grads, coeffs["l_sbc"])
    if "l_wf" in coeffs:
        if family is None:
            family = problem.test_functions()
        if assembly is None:
            assembly = problem.weak_assembly(family, pm.decomposition.regions)
        components["l_wf"] = _wf_with_grads(
            problem, pm, family, assembly, cache, grads, coeffs["l_wf"]
        )
    breakdown = total_loss(strategy, weights, components, weak_include_ibv)
    return StrategyLoss(breakdown=breakdown, gradients=grads)
