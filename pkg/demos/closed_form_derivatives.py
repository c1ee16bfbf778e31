"""A single qubit with no ansatz reduces to a function we know on paper.

With an empty variational block the model output is just the expectation
of scaled Z after the feature map.  A Fourier map at scale s therefore
gives cos(s x); an arccos (Chebyshev) map gives the straight line s x.
Because the engine differentiates the encoding analytically, the first
and second input derivatives should land on the hand-derived formulas to
near machine precision, not just to finite-difference accuracy.
"""
import numpy as np

from vqpinn import (
    DerivativeRequest,
    FeatureMapSpec,
    ModelParams,
    QnnLayout,
    compile_layout,
    evaluate_batch,
    model_values,
)

POINTS = 50


def report(label, got, expected):
    err = np.max(np.abs(got - expected))
    print(f"  {label:28s} max abs error {err:.3e}")


def flat_params(model):
    return ModelParams(theta=np.zeros(model.num_theta), scale=1.0, shift=0.0)


def fourier_demo(s=0.7):
    print(f"Fourier map, scale {s}: model(x) = cos({s} x)")
    model = compile_layout(QnnLayout(1, (FeatureMapSpec(0, "fourier", rescale=s),)))
    params = flat_params(model)
    xs = np.linspace(0.0, 1.0, POINTS)
    report("value vs cos(sx)", model_values(model, params, xs), np.cos(s * xs))
    d1 = evaluate_batch(model, params, xs, DerivativeRequest(0, 1)).values
    report("d/dx vs -s sin(sx)", d1, -s * np.sin(s * xs))
    d2 = evaluate_batch(model, params, xs, DerivativeRequest(0, 2)).values
    report("d2/dx2 vs -s^2 cos(sx)", d2, -s * s * np.cos(s * xs))


def chebyshev_demo(s=0.9):
    print(f"Chebyshev map, scale {s}: model(x) = {s} x")
    model = compile_layout(QnnLayout(1, (FeatureMapSpec(0, "chebyshev", rescale=s),)))
    params = flat_params(model)
    xs = np.linspace(-1.0, 1.0, POINTS)
    report("value vs s x", model_values(model, params, xs), s * xs)
    d1 = evaluate_batch(model, params, xs, DerivativeRequest(0, 1)).values
    report("d/dx vs s", d1, np.full_like(xs, s))
    d2 = evaluate_batch(model, params, xs, DerivativeRequest(0, 2)).values
    report("d2/dx2 vs 0", d2, np.zeros_like(xs))


if __name__ == "__main__":
    fourier_demo()
    chebyshev_demo()
