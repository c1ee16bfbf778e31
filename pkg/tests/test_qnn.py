"""Model layer tests.

Covers:
- compile bookkeeping (slot and gate counts, shared re-upload slots)
- encoding formulas and their domain guard
- single-qubit closed forms for both tower encodings
- shift-table input derivatives against finite differences, with and
  without re-uploading
- parameter gradients of values and of input derivatives against finite
  differences
"""
import numpy as np
import pytest

from vqpinn import qnn
from vqpinn.errors import ConfigurationError, EncodingDomainError
from vqpinn.qnn import (
    AnsatzSpec,
    DerivativeRequest,
    FeatureMapSpec,
    ModelParams,
    QnnLayout,
    compile_layout,
    encode_angles,
    evaluate_batch,
    model_gradients,
    model_input_derivative,
    model_value,
    model_values,
)


def _params(model, rng=None, scale=1.0, shift=0.0):
    if rng is None:
        theta = np.zeros(model.num_theta)
    else:
        theta = rng.uniform(0, 2 * np.pi, model.num_theta)
    return ModelParams(theta=theta, scale=scale, shift=shift)


# ---------------------------------------------------------------------------
# compilation
# ---------------------------------------------------------------------------

def test_compile_oscillator_style_layout_counts():
    layout = QnnLayout(5, (FeatureMapSpec(0, "chebyshev", rescale=0.9), AnsatzSpec(4)))
    model = compile_layout(layout)
    assert model.circuit.num_slots == 65
    assert model.num_theta == 60
    assert len(model.circuit.gates) == 5 + 60 + 4 * 4
    assert model.coords[0].slots == (0, 1, 2, 3, 4)
    assert all(len(occ) == 1 for occ in model.coords[0].occurrences)


def test_compile_two_coordinate_reupload_counts():
    # 4 qubits, x and y towers uploaded twice each around depth-1 layers,
    # then a depth-6 tail
    fx = FeatureMapSpec(0, "fourier")
    fy = FeatureMapSpec(1, "fourier")
    layout = QnnLayout(
        4,
        (fx, AnsatzSpec(1), fy, AnsatzSpec(1), fx, AnsatzSpec(1), fy, AnsatzSpec(6)),
    )
    model = compile_layout(layout)
    assert model.num_inputs == 2
    assert model.num_theta == 3 * 4 * 9
    assert model.circuit.num_slots == 8 + 108
    assert len(model.circuit.gates) == 16 + 108 + 9 * 3
    for d in (0, 1):
        assert all(len(occ) == 2 for occ in model.coords[d].occurrences)


def test_compile_mixed_depth_two_coordinate_counts():
    layout = QnnLayout(
        5,
        (FeatureMapSpec(0, "fourier"), AnsatzSpec(1), FeatureMapSpec(1, "fourier"), AnsatzSpec(8)),
    )
    model = compile_layout(layout)
    assert model.num_theta == 3 * 5 * 9
    assert model.circuit.num_slots == 10 + 135
    assert len(model.circuit.gates) == 10 + 135 + 9 * 4


def test_compile_validation():
    with pytest.raises(ConfigurationError):
        compile_layout(QnnLayout(2, (FeatureMapSpec(1, "fourier"), AnsatzSpec(1))))  # gap at 0
    with pytest.raises(ConfigurationError):
        compile_layout(QnnLayout(2, (AnsatzSpec(2),)))  # no feature map
    with pytest.raises(ConfigurationError):
        compile_layout(QnnLayout(2, (FeatureMapSpec(0, "wavelet"),)))
    with pytest.raises(ConfigurationError):
        compile_layout(QnnLayout(2, (FeatureMapSpec(0, "chebyshev", rescale=1.5),)))
    with pytest.raises(ConfigurationError):
        compile_layout(QnnLayout(2, (FeatureMapSpec(0, "fourier"), AnsatzSpec(0))))
    with pytest.raises(ConfigurationError):
        compile_layout(
            QnnLayout(
                2,
                (
                    FeatureMapSpec(0, "fourier"),
                    AnsatzSpec(1),
                    FeatureMapSpec(0, "chebyshev", rescale=0.5),
                ),
            )
        )


# ---------------------------------------------------------------------------
# encodings
# ---------------------------------------------------------------------------

def test_encode_angles_chebyshev_at_zero():
    fm = FeatureMapSpec(0, "chebyshev", rescale=0.9)
    phi, dphi, ddphi = encode_angles(fm, 0.0, num_qubits=3)
    np.testing.assert_allclose(phi, np.array([1, 2, 3]) * np.pi / 2)
    np.testing.assert_allclose(dphi, -np.array([1, 2, 3]) * 0.9)
    np.testing.assert_allclose(ddphi, 0.0, atol=1e-15)


def test_encode_angles_fourier():
    fm = FeatureMapSpec(0, "fourier", rescale=0.5)
    phi, dphi, ddphi = encode_angles(fm, np.array([0.0, 1.0, 2.0]), num_qubits=2)
    np.testing.assert_allclose(phi, [[0, 0], [0.5, 1.0], [1.0, 2.0]])
    np.testing.assert_allclose(dphi, [[0.5, 1.0]] * 3)
    np.testing.assert_allclose(ddphi, 0.0)


def test_encode_angles_chebyshev_derivative_factors():
    fm = FeatureMapSpec(0, "chebyshev", rescale=0.8, multipliers=(2,))
    x = 0.4
    phi, dphi, ddphi = encode_angles(fm, x)
    t = 0.8 * x
    assert phi[0] == pytest.approx(2 * np.arccos(t))
    assert dphi[0] == pytest.approx(-2 * 0.8 / np.sqrt(1 - t * t))
    assert ddphi[0] == pytest.approx(-2 * 0.8**3 * x / (1 - t * t) ** 1.5)


def test_chebyshev_domain_guard():
    fm = FeatureMapSpec(0, "chebyshev", rescale=1.0)
    with pytest.raises(EncodingDomainError):
        encode_angles(fm, 1.0, num_qubits=2)
    model = compile_layout(QnnLayout(2, (FeatureMapSpec(0, "chebyshev", rescale=1.0), AnsatzSpec(1))))
    with pytest.raises(EncodingDomainError):
        model_value(model, _params(model), 1.0)
    # a rescale below 1 keeps the closed interval [-1, 1] valid
    safe = compile_layout(QnnLayout(2, (FeatureMapSpec(0, "chebyshev", rescale=0.9), AnsatzSpec(1))))
    model_value(safe, _params(safe), 1.0)


# ---------------------------------------------------------------------------
# single-qubit closed forms
# ---------------------------------------------------------------------------

def test_single_qubit_fourier_closed_forms():
    s = 0.7
    model = compile_layout(QnnLayout(1, (FeatureMapSpec(0, "fourier", rescale=s),)))
    params = _params(model)
    xs = np.linspace(0.0, 1.0, 50)
    values = model_values(model, params, xs)
    d1 = evaluate_batch(model, params, xs, DerivativeRequest(0, 1)).values
    d2 = evaluate_batch(model, params, xs, DerivativeRequest(0, 2)).values
    np.testing.assert_allclose(values, np.cos(s * xs), atol=1e-8)
    np.testing.assert_allclose(d1, -s * np.sin(s * xs), atol=1e-8)
    np.testing.assert_allclose(d2, -s * s * np.cos(s * xs), atol=1e-8)


def test_single_qubit_chebyshev_closed_forms():
    s = 0.9
    model = compile_layout(QnnLayout(1, (FeatureMapSpec(0, "chebyshev", rescale=s),)))
    params = _params(model)
    xs = np.linspace(-1.0, 1.0, 50)
    values = model_values(model, params, xs)
    d1 = evaluate_batch(model, params, xs, DerivativeRequest(0, 1)).values
    d2 = evaluate_batch(model, params, xs, DerivativeRequest(0, 2)).values
    np.testing.assert_allclose(values, s * xs, atol=1e-8)
    np.testing.assert_allclose(d1, np.full_like(xs, s), atol=1e-8)
    np.testing.assert_allclose(d2, 0.0, atol=1e-8)


# ---------------------------------------------------------------------------
# derivatives and gradients vs finite differences
# ---------------------------------------------------------------------------

def _fd_input(model, params, x, dim, order, h):
    def value_at(shift):
        point = np.array(x, dtype=float)
        point[dim] += shift
        return model_value(model, params, point)

    if order == 1:
        return (value_at(h) - value_at(-h)) / (2 * h)
    return (value_at(h) - 2 * value_at(0.0) + value_at(-h)) / h**2


MODELS = {
    "chebyshev_depth2": QnnLayout(
        2, (FeatureMapSpec(0, "chebyshev", rescale=0.8), AnsatzSpec(2))
    ),
    "reupload_two_coords": QnnLayout(
        2,
        (
            FeatureMapSpec(0, "fourier"),
            AnsatzSpec(1),
            FeatureMapSpec(1, "fourier"),
            AnsatzSpec(1),
            FeatureMapSpec(0, "fourier"),
            AnsatzSpec(1),
            FeatureMapSpec(1, "fourier"),
            AnsatzSpec(2),
        ),
    ),
}


@pytest.mark.parametrize("name", sorted(MODELS))
def test_input_derivatives_match_finite_differences(name):
    model = compile_layout(MODELS[name])
    rng = np.random.default_rng(61)
    params = _params(model, rng, scale=1.3, shift=-0.4)
    for _ in range(4):
        x = rng.uniform(0.1, 0.6, size=model.num_inputs)
        for dim in range(model.num_inputs):
            d1 = model_input_derivative(model, params, x, DerivativeRequest(dim, 1))
            fd1 = _fd_input(model, params, x, dim, 1, h=1e-5)
            assert abs(d1 - fd1) / max(abs(fd1), abs(d1), 1e-4) < 1e-6
            d2 = model_input_derivative(model, params, x, DerivativeRequest(dim, 2))
            fd2 = _fd_input(model, params, x, dim, 2, h=1e-3)
            assert abs(d2 - fd2) / max(abs(fd2), abs(d2), 1.0) < 1e-4


def test_order_two_consistent_with_derivative_of_order_one():
    model = compile_layout(MODELS["reupload_two_coords"])
    rng = np.random.default_rng(67)
    params = _params(model, rng)
    x = np.array([0.3, 0.7])
    h = 1e-4
    for dim in range(2):
        up = x.copy()
        down = x.copy()
        up[dim] += h
        down[dim] -= h
        fd_of_d1 = (
            model_input_derivative(model, params, up, DerivativeRequest(dim, 1))
            - model_input_derivative(model, params, down, DerivativeRequest(dim, 1))
        ) / (2 * h)
        d2 = model_input_derivative(model, params, x, DerivativeRequest(dim, 2))
        assert abs(d2 - fd_of_d1) < 1e-5


@pytest.mark.parametrize("order", [0, 1, 2])
def test_parameter_gradients_match_finite_differences(order):
    model = compile_layout(MODELS["chebyshev_depth2"])
    rng = np.random.default_rng(71)
    params = _params(model, rng, scale=0.9, shift=0.2)
    x = np.array([0.35])
    req = None if order == 0 else DerivativeRequest(0, order)

    def value(theta, scale, shift):
        p = ModelParams(theta=theta, scale=scale, shift=shift)
        if req is None:
            return model_value(model, p, x)
        return model_input_derivative(model, p, x, req)

    _, dtheta, dscale, dshift = model_gradients(model, params, x, req)
    h = 1e-5
    for i in range(model.num_theta):
        up = params.theta.copy()
        down = params.theta.copy()
        up[i] += h
        down[i] -= h
        fd = (value(up, params.scale, params.shift) - value(down, params.scale, params.shift)) / (2 * h)
        assert abs(dtheta[i] - fd) / max(abs(fd), abs(dtheta[i]), 1e-4) < 1e-6
    fd_scale = (
        value(params.theta, params.scale + h, params.shift)
        - value(params.theta, params.scale - h, params.shift)
    ) / (2 * h)
    assert abs(dscale - fd_scale) / max(abs(fd_scale), 1e-4) < 1e-6
    fd_shift = (
        value(params.theta, params.scale, params.shift + h)
        - value(params.theta, params.scale, params.shift - h)
    ) / (2 * h)
    assert abs(dshift - fd_shift) < 1e-9


def test_affine_observable_params():
    model = compile_layout(MODELS["chebyshev_depth2"])
    rng = np.random.default_rng(73)
    theta = rng.uniform(0, 2 * np.pi, model.num_theta)
    raw = model_value(model, ModelParams(theta, 1.0, 0.0), 0.2)
    scaled = model_value(model, ModelParams(theta, 2.5, -1.1), 0.2)
    assert scaled == pytest.approx(2.5 * raw - 1.1, abs=1e-12)
    # derivatives scale but do not shift
    d_raw = model_input_derivative(model, ModelParams(theta, 1.0, 0.0), 0.2, DerivativeRequest(0, 1))
    d_scaled = model_input_derivative(
        model, ModelParams(theta, 2.5, -1.1), 0.2, DerivativeRequest(0, 1)
    )
    assert d_scaled == pytest.approx(2.5 * d_raw, abs=1e-12)


def test_batch_matches_single_point():
    model = compile_layout(MODELS["reupload_two_coords"])
    rng = np.random.default_rng(79)
    params = _params(model, rng)
    X = rng.uniform(0, 1, size=(6, 2))
    req = DerivativeRequest(1, 2)
    batch = evaluate_batch(model, params, X, req).values
    singles = [model_input_derivative(model, params, x, req) for x in X]
    np.testing.assert_allclose(batch, singles, atol=1e-12)


def test_evaluation_determinism():
    model = compile_layout(MODELS["reupload_two_coords"])
    rng = np.random.default_rng(83)
    params = _params(model, rng)
    X = rng.uniform(0, 1, size=(5, 2))
    a = evaluate_batch(model, params, X, DerivativeRequest(0, 2), need_grads=True)
    b = evaluate_batch(model, params, X, DerivativeRequest(0, 2), need_grads=True)
    assert np.array_equal(a.values, b.values)
    assert np.array_equal(a.dtheta, b.dtheta)
