"""Adam optimizer, parameter packing, and the training loop."""
import numpy as np
import pytest

from vqpinn.decomposition import PiecewiseModel, build
from vqpinn.errors import ConfigurationError, TrainingAborted
from vqpinn.losses import Strategy
from vqpinn.problems import get_problem
from vqpinn.qnn import ModelParams, compile_layout
from vqpinn.training import (
    AdamState,
    TrainerConfig,
    adam_step,
    init_params,
    measure_of_success,
    pack_parameters,
    train,
    unpack_parameters,
)


def test_adam_first_step_magnitude():
    state = AdamState.zeros(3)
    values = np.array([1.0, -2.0, 0.5])
    grad = np.array([5.0, -3.0, 0.0])
    out = adam_step(state, values, grad, learning_rate=0.2)
    # after one step the update is -lr * g / (|g| + eps), so lr in magnitude
    assert out[0] == pytest.approx(1.0 - 0.2, abs=1e-8)
    assert out[1] == pytest.approx(-2.0 + 0.2, abs=1e-8)
    assert out[2] == 0.5
    assert state.t == 1


def test_adam_zero_gradient_is_identity():
    state = AdamState.zeros(4)
    values = np.array([0.3, -1.2, 7.0, 0.0])
    out = adam_step(state, values, np.zeros(4), learning_rate=0.2)
    assert np.array_equal(out, values)


def test_adam_matches_scalar_recomputation():
    rng = np.random.default_rng(12)
    state = AdamState.zeros(2)
    values = rng.normal(size=2)
    m = np.zeros(2)
    v = np.zeros(2)
    mirror = values.copy()
    for t in range(1, 51):
        grad = rng.normal(size=2)
        values = adam_step(state, values, grad, learning_rate=0.05)
        m = 0.9 * m + (1 - 0.9) * grad
        v = 0.999 * v + (1 - 0.999) * grad * grad
        mirror = mirror - 0.05 * (m / (1 - 0.9 ** t)) / (
            np.sqrt(v / (1 - 0.999 ** t)) + 1e-8)
        assert np.allclose(values, mirror, atol=0, rtol=1e-15)


def test_adam_converges_on_quadratic():
    state = AdamState.zeros(2)
    values = np.array([5.0, -4.0])
    target = np.array([1.5, 2.5])
    for _ in range(400):
        values = adam_step(state, values, 2 * (values - target), learning_rate=0.1)
    assert np.allclose(values, target, atol=1e-3)


def test_pack_unpack_roundtrip():
    rng = np.random.default_rng(4)
    params = [
        ModelParams(theta=rng.normal(size=6), scale=float(rng.normal()),
                    shift=float(rng.normal()))
        for _ in range(3)
    ]
    vec = pack_parameters(params)
    assert vec.shape == (24,)
    back = unpack_parameters(vec, 6, 3)
    for a, b in zip(params, back):
        assert np.array_equal(a.theta, b.theta)
        assert a.scale == b.scale and a.shift == b.shift


def test_init_params_stream():
    problem = get_problem("damped_oscillator", num_qubits=2, depth=1)
    compiled = compile_layout(problem.layout())
    params = init_params(compiled, 3, seed=42)
    assert len(params) == 3
    rng = np.random.default_rng(42)
    for p in params:
        assert np.array_equal(p.theta, rng.uniform(0, 2 * np.pi, compiled.num_theta))
        assert p.scale == 1.0 and p.shift == 0.0
        assert np.all((p.theta >= 0) & (p.theta < 2 * np.pi))
    other = init_params(compiled, 3, seed=43)
    assert not np.array_equal(params[0].theta, other[0].theta)


def test_trainer_config_validated():
    with pytest.raises(ConfigurationError, match="epochs"):
        TrainerConfig(epochs=-1)
    with pytest.raises(ConfigurationError, match="epochs"):
        TrainerConfig(epochs=0)
    with pytest.raises(ConfigurationError, match="learning_rate"):
        TrainerConfig(epochs=1, learning_rate=0.0)


def _shrunken_setup():
    problem = get_problem("damped_oscillator", num_qubits=2, depth=1)
    decomposition = build(problem, splits=(0.0,), points_per_subdomain=4)
    compiled = compile_layout(problem.layout())
    return problem, decomposition, compiled


def test_history_shape_and_first_record():
    problem, decomposition, compiled = _shrunken_setup()
    config = TrainerConfig(epochs=3, seed=7)
    result = train(problem, Strategy.COLL, config, decomposition, compiled)
    assert [r.epoch for r in result.history] == [0, 1, 2, 3]
    pm0 = PiecewiseModel(decomposition, compiled,
                         init_params(compiled, 2, seed=7))
    assert result.history[0].metric == pytest.approx(
        measure_of_success(problem, pm0), rel=1e-12)
    # components the strategy does not evaluate stay zero
    assert result.history[0].breakdown.l_wf == 0.0
    assert result.history[0].breakdown.l_sbc == 0.0


def test_first_record_is_the_untouched_init():
    problem, decomposition, compiled = _shrunken_setup()
    result = train(problem, Strategy.COLL, TrainerConfig(epochs=1, seed=3),
                   decomposition, compiled)
    assert len(result.history) == 2
    pm0 = PiecewiseModel(decomposition, compiled,
                         init_params(compiled, 2, seed=3))
    assert result.history[0].metric == pytest.approx(
        measure_of_success(problem, pm0), rel=1e-12)
    # the returned model has taken its one step away from the init
    expected = init_params(compiled, 2, seed=3)
    assert not np.array_equal(result.pm.params[0].theta, expected[0].theta)


def test_training_is_bitwise_deterministic():
    problem, decomposition, compiled = _shrunken_setup()
    config = TrainerConfig(epochs=10, seed=0)
    a = train(problem, Strategy.BOTH, config, decomposition, compiled)
    b = train(problem, Strategy.BOTH, config, decomposition, compiled)
    for ra, rb in zip(a.history, b.history):
        assert ra.breakdown.total == rb.breakdown.total
        assert ra.metric == rb.metric
    assert np.array_equal(pack_parameters(a.pm.params),
                          pack_parameters(b.pm.params))


def test_training_reduces_loss():
    problem, decomposition, compiled = _shrunken_setup()
    result = train(problem, Strategy.COLL, TrainerConfig(epochs=40, seed=0),
                   decomposition, compiled)
    assert result.history[-1].breakdown.total < 0.3 * result.history[0].breakdown.total


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_non_finite_loss_aborts():
    problem, decomposition, compiled = _shrunken_setup()
    config = TrainerConfig(epochs=5, seed=0, learning_rate=1e160)
    with pytest.raises(TrainingAborted, match="epoch"):
        train(problem, Strategy.COLL, config, decomposition, compiled)


def test_measure_of_success_zero_model_laplace():
    problem = get_problem("laplace")
    decomposition = build(problem)
    compiled = compile_layout(problem.layout())
    params = [ModelParams(theta=np.zeros(compiled.num_theta), scale=0.0, shift=0.0)
              for _ in range(4)]
    pm = PiecewiseModel(decomposition, compiled, params)
    X = decomposition.all_points()
    expected = float(np.mean(problem.solution(X) ** 2))
    got = measure_of_success(problem, pm)
    assert got == pytest.approx(expected, rel=1e-12)
    assert 0.07 < got < 0.09
