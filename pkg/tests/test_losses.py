"""Loss components, strategy gating, and gradients of every strategy total."""
import numpy as np
import pytest

from test_problems import default_regions, fd_truth_evaluator

from vqpinn.decomposition import PiecewiseModel, build
from vqpinn.errors import ConfigurationError, ContractError
from vqpinn.losses import (
    LossBreakdown,
    LossWeights,
    Strategy,
    collocation_loss,
    ibv_loss,
    loss_and_gradients,
    parse_strategy,
    sbc_loss,
    strategy_coefficients,
    strategy_loss,
    total_loss,
    weak_loss,
)
from vqpinn.problems import get_problem, mesh_points, weak_term
from vqpinn.qnn import ModelParams, compile_layout


def test_parse_strategy():
    assert parse_strategy("coll") is Strategy.COLL
    assert parse_strategy("coll_join") is Strategy.COLL_JOIN
    assert parse_strategy("weak") is Strategy.WEAK
    assert parse_strategy("both") is Strategy.BOTH
    with pytest.raises(ConfigurationError, match="coll_join"):
        parse_strategy("strong")


def test_loss_weights_validated():
    LossWeights()
    with pytest.raises(ConfigurationError, match="alpha"):
        LossWeights(alpha=-0.5)
    with pytest.raises(ConfigurationError, match="gamma_wf"):
        LossWeights(gamma_wf=float("nan"))


def test_total_loss_gating():
    w = LossWeights()
    out = total_loss(Strategy.COLL, w, {"l_de": 0.2, "l_ibv": 0.3})
    assert out.total == pytest.approx(0.5, abs=1e-15)
    assert out.l_sbc == 0.0 and out.l_wf == 0.0

    # a component that is supplied but not gated is logged yet excluded
    out = total_loss(Strategy.COLL, w, {"l_de": 0.2, "l_ibv": 0.3, "l_wf": 99.0})
    assert out.total == pytest.approx(0.5, abs=1e-15)
    assert out.l_wf == 99.0

    out = total_loss(Strategy.COLL_JOIN, w, {"l_de": 0.2, "l_ibv": 0.3, "l_sbc": 0.1})
    assert out.total == pytest.approx(0.6, abs=1e-15)

    out = total_loss(Strategy.WEAK, w, {"l_wf": 0.4, "l_ibv": 0.3})
    assert out.total == pytest.approx(0.7, abs=1e-15)

    out = total_loss(Strategy.WEAK, w, {"l_wf": 0.4}, weak_include_ibv=False)
    assert out.total == pytest.approx(0.4, abs=1e-15)

    out = total_loss(Strategy.BOTH, w, {"l_de": 0.2, "l_ibv": 0.3, "l_wf": 0.4})
    assert out.total == pytest.approx(0.9, abs=1e-15)

    with pytest.raises(ContractError, match="l_ibv"):
        total_loss(Strategy.COLL, w, {"l_de": 0.2})
    with pytest.raises(ContractError, match="l_wf"):
        total_loss(Strategy.BOTH, w, {"l_de": 0.2, "l_ibv": 0.3})


def test_total_matches_coefficient_sum():
    rng = np.random.default_rng(7)
    for trial in range(20):
        w = LossWeights(*rng.uniform(0.0, 3.0, 5))
        comps = {k: float(rng.uniform(0, 5))
                 for k in ("l_de", "l_ibv", "l_sbc", "l_wf")}
        for strategy in Strategy:
            include = bool(trial % 2)
            out = total_loss(strategy, w, comps, weak_include_ibv=include)
            coeffs = strategy_coefficients(strategy, w, weak_include_ibv=include)
            expected = sum(c * comps[k] for k, c in coeffs.items())
            assert abs(out.total - expected) < 1e-12


def _training_points(problem):
    if problem.input_dim == 1:
        regions = default_regions(problem)
        return np.concatenate([r.grids[0] for r in regions]).reshape(-1, 1)
    xs, ys = problem.default_axis_grids()
    return mesh_points(xs, ys)


@pytest.mark.parametrize("name", ["damped_oscillator", "burgers", "linear2d", "laplace"])
def test_collocation_loss_of_truth_vanishes(name):
    problem = get_problem(name)
    evaluate = fd_truth_evaluator(problem)
    loss = collocation_loss(problem, evaluate, points=_training_points(problem))
    assert loss < 1e-12


def test_collocation_loss_flat_model_burgers():
    problem = get_problem("burgers")

    def evaluate(region, X, req=None):
        return np.full(X.shape[0], 2.0) if req is None else np.zeros(X.shape[0])

    xs = np.linspace(-0.9, 0.9, 17).reshape(-1, 1)
    assert collocation_loss(problem, evaluate, points=xs) == 0.0


def test_collocation_loss_single_point():
    problem = get_problem("damped_oscillator")

    def evaluate(region, X, req=None):
        return np.full(X.shape[0], 0.25)

    expected = (0.25 + problem.source(np.array([0.3]))[0]) ** 2
    loss = collocation_loss(problem, evaluate, points=np.array([[0.3]]))
    assert loss == pytest.approx(expected, rel=1e-12)


def test_collocation_loss_raw_evaluator_needs_points():
    problem = get_problem("damped_oscillator")
    with pytest.raises(ContractError, match="points"):
        collocation_loss(problem, fd_truth_evaluator(problem))


@pytest.mark.parametrize("name", ["damped_oscillator", "burgers", "linear2d", "laplace"])
def test_ibv_loss_of_truth_vanishes(name):
    problem = get_problem(name)

    def evaluate(region, X, req=None):
        return problem.solution(X)

    assert ibv_loss(problem, evaluate) < 1e-24


def test_ibv_loss_zero_model_damped():
    problem = get_problem("damped_oscillator")

    def evaluate(region, X, req=None):
        return np.zeros(X.shape[0])

    assert ibv_loss(problem, evaluate) == pytest.approx(1.0, abs=1e-15)


def test_ibv_loss_zero_model_laplace():
    problem = get_problem("laplace")
    compiled = compile_layout(problem.layout())
    decomposition = build(problem)
    params = [ModelParams(theta=np.zeros(compiled.num_theta), scale=0.0, shift=0.0)
              for _ in range(decomposition.num_subdomains)]
    pm = PiecewiseModel(decomposition, compiled, params)
    ys = problem.default_axis_grids()[1]
    expected = float(np.mean(np.sin(np.pi * ys) ** 2))
    loss = ibv_loss(problem, pm)
    assert loss == pytest.approx(expected, rel=1e-12)
    assert abs(loss - 0.5) < 0.03


def test_sbc_loss_constant_models_1d():
    problem = get_problem("damped_oscillator")
    decomposition = build(problem)
    consts = {0: 1.5, 1: -0.25, 2: 4.0}

    def evaluate(region, X, req=None):
        return np.full(X.shape[0], consts[region])

    expected = np.mean([(1.5 - -0.25) ** 2, (-0.25 - 4.0) ** 2])
    loss = sbc_loss(evaluate, decomposition=decomposition)
    assert loss == pytest.approx(expected, rel=1e-12)


def test_sbc_loss_constant_models_2d():
    problem = get_problem("laplace")
    decomposition = build(problem)
    consts = {0: 0.5, 1: -1.0, 2: 2.0, 3: 0.0}

    def evaluate(region, X, req=None):
        return np.full(X.shape[0], consts[region])

    jumps = [consts[f.lower] - consts[f.upper] for f in decomposition.interfaces]
    expected = np.mean([j ** 2 for j in jumps])
    loss = sbc_loss(evaluate, decomposition=decomposition)
    assert loss == pytest.approx(expected, rel=1e-12)


def test_sbc_loss_shared_params_is_zero():
    problem = get_problem("damped_oscillator", num_qubits=2, depth=1)
    compiled = compile_layout(problem.layout())
    decomposition = build(problem)
    rng = np.random.default_rng(3)
    shared = ModelParams(theta=rng.uniform(0, 2 * np.pi, compiled.num_theta))
    pm = PiecewiseModel(decomposition, compiled, [shared] * 3)
    assert sbc_loss(pm) == 0.0


def test_sbc_loss_no_interfaces():
    problem = get_problem("damped_oscillator")
    decomposition = build(problem, splits=())

    def evaluate(region, X, req=None):
        return np.ones(X.shape[0])

    assert sbc_loss(evaluate, decomposition=decomposition) == 0.0


def test_weak_loss_matches_direct_terms():
    problem = get_problem("damped_oscillator")
    evaluate = fd_truth_evaluator(problem)
    regions = default_regions(problem)
    family = problem.test_functions()
    terms = [weak_term(problem, v, evaluate, regions) for v in family]
    expected = float(np.mean(np.square(terms)))
    loss = weak_loss(problem, evaluate, family=family, regions=regions)
    assert loss == pytest.approx(expected, rel=1e-12)
    single = weak_loss(problem, evaluate, family=family[7:8], regions=regions)
    assert single == pytest.approx(terms[7] ** 2, rel=1e-12)


def _random_pm(problem, seed=0, splits=None, points_per_subdomain=None):
    compiled = compile_layout(problem.layout())
    decomposition = build(problem, splits=splits,
                          points_per_subdomain=points_per_subdomain)
    rng = np.random.default_rng(seed)
    params = [
        ModelParams(theta=rng.uniform(0.0, 2.0 * np.pi, compiled.num_theta),
                    scale=1.0, shift=0.0)
        for _ in range(decomposition.num_subdomains)
    ]
    return PiecewiseModel(decomposition, compiled, params)


def test_breakdown_matches_value_path():
    problem = get_problem("damped_oscillator", num_qubits=2, depth=1)
    pm = _random_pm(problem, seed=11, points_per_subdomain=6)
    family = problem.test_functions()
    for strategy in Strategy:
        values = strategy_loss(problem, pm, strategy, family=family)
        graded = loss_and_gradients(problem, pm, strategy, family=family).breakdown
        for field in ("l_de", "l_ibv", "l_sbc", "l_wf", "total"):
            a, b = getattr(values, field), getattr(graded, field)
            assert abs(a - b) <= 1e-10 * max(1.0, abs(a)), (strategy, field)


def _perturbed(pm, sub, index, h):
    params = list(pm.params)
    p = params[sub]
    num_theta = p.theta.size
    theta, scale, shift = p.theta.copy(), p.scale, p.shift
    if index < num_theta:
        theta[index] += h
    elif index == num_theta:
        scale += h
    else:
        shift += h
    params[sub] = ModelParams(theta=theta, scale=scale, shift=shift)
    return PiecewiseModel(pm.decomposition, pm.compiled, params)


def _check_gradients(problem, pm, strategy, family, h=1e-4, tol=1e-4):
    result = loss_and_gradients(problem, pm, strategy, family=family)
    size = pm.compiled.num_theta + 2
    for sub in range(pm.decomposition.num_subdomains):
        for index in range(size):
            hi = strategy_loss(problem, _perturbed(pm, sub, index, h),
                               strategy, family=family).total
            lo = strategy_loss(problem, _perturbed(pm, sub, index, -h),
                               strategy, family=family).total
            fd = (hi - lo) / (2 * h)
            got = result.gradients[sub][index]
            denom = max(abs(fd), abs(got), 1e-6)
            assert abs(got - fd) / denom <= tol, (strategy, sub, index, got, fd)


@pytest.mark.parametrize("strategy", list(Strategy))
def test_strategy_gradients_shrunken_oscillator(strategy):
    problem = get_problem("damped_oscillator", num_qubits=2, depth=1)
    pm = _random_pm(problem, seed=5, splits=(0.0,), points_per_subdomain=4)
    family = problem.test_functions()[4:7]
    _check_gradients(problem, pm, strategy, family)


def test_strategy_gradients_shrunken_burgers():
    # exercises the bilinear f*f' weak rows and the value-bearing residual
    problem = get_problem("burgers", num_qubits=2, depth=1)
    pm = _random_pm(problem, seed=9, splits=(0.0,), points_per_subdomain=4)
    family = problem.test_functions()[4:7]
    _check_gradients(problem, pm, Strategy.BOTH, family)


def test_strategy_gradients_shrunken_laplace():
    # exercises 2d mesh batches, edge-derivative batches, and the constant row
    problem = get_problem("laplace", num_qubits=2, inner_depth=1, depth=1)
    problem.axis_points = (5, 5)
    pm = _random_pm(problem, seed=2)
    family = problem.test_functions()[:3]
    _check_gradients(problem, pm, Strategy.WEAK, family)


def test_gradients_breakdown_total_consistent():
    problem = get_problem("damped_oscillator", num_qubits=2, depth=1)
    pm = _random_pm(problem, seed=1, points_per_subdomain=5)
    w = LossWeights(alpha=0.7, beta=1.3, gamma_res=2.0, gamma_wf=0.5, gamma_sbc=3.0)
    family = problem.test_functions()[4:7]
    for strategy in Strategy:
        out = loss_and_gradients(problem, pm, strategy, weights=w, family=family)
        coeffs = strategy_coefficients(strategy, w)
        expected = sum(c * getattr(out.breakdown, k) for k, c in coeffs.items())
        assert abs(out.breakdown.total - expected) < 1e-12
        assert isinstance(out.breakdown, LossBreakdown)
