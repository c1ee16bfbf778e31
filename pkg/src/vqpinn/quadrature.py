"""Numerical integration on training grids.

Trapezium rules over 1D grids and tensor-product 2D grids, plus seeded
Monte-Carlo integration.  Grids are plain arrays of strictly increasing
coordinates; the weight helpers expose the same rules as inner products
so loss assembly can fold integration into matrix contractions.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ConfigurationError, ContractError

__all__ = [
    "McConfig",
    "monte_carlo",
    "trapz_1d",
    "trapz_2d",
    "trapz_weights",
    "trapz_weights_2d",
    "uniform_sampler",
]


def _check_grid(points: np.ndarray, name: str = "grid") -> np.ndarray:
    points = np.asarray(points, dtype=float)
    if points.ndim != 1 or points.size < 2:
        raise ContractError(f"{name} must be a 1D array of at least 2 points")
    if not np.all(np.diff(points) > 0):
        raise ContractError(f"{name} must be strictly increasing")
    return points


def trapz_1d(values: np.ndarray, points: np.ndarray) -> float:
    """Trapezium rule: sum of (x_{j+1} - x_j)/2 * (v_j + v_{j+1})."""
    points = _check_grid(points)
    values = np.asarray(values, dtype=float)
    if values.shape != points.shape:
        raise ContractError(
            f"values shape {values.shape} does not match grid shape {points.shape}"
        )
    steps = np.diff(points)
    return float(np.sum(steps * (values[:-1] + values[1:]) / 2.0))


def trapz_weights(points: np.ndarray) -> np.ndarray:
    """Weights w with w @ values == trapz_1d(values, points)."""
    points = _check_grid(points)
    steps = np.diff(points)
    w = np.zeros_like(points)
    w[:-1] += steps / 2.0
    w[1:] += steps / 2.0
    return w


def trapz_2d(values: np.ndarray, x_points: np.ndarray, y_points: np.ndarray) -> float:
    """Tensor trapezium rule: integrate over y for each x row, then over x."""
    x_points = _check_grid(x_points, "x grid")
    y_points = _check_grid(y_points, "y grid")
    values = np.asarray(values, dtype=float)
    if values.shape != (x_points.size, y_points.size):
        raise ContractError(
            f"values shape {values.shape} does not match grid "
            f"({x_points.size}, {y_points.size})"
        )
    inner = np.array([trapz_1d(row, y_points) for row in values])
    return trapz_1d(inner, x_points)


def trapz_weights_2d(x_points: np.ndarray, y_points: np.ndarray) -> np.ndarray:
    """Weights W with sum(W * values) == trapz_2d(values, x_points, y_points)."""
    return np.outer(trapz_weights(x_points), trapz_weights(y_points))


@dataclass(frozen=True)
class McConfig:
    """Monte-Carlo settings: sample count, RNG seed, and domain volume."""

    sample_count: int
    seed: int
    volume: float

    def __post_init__(self) -> None:
        if self.sample_count < 1:
            raise ConfigurationError("sample_count must be at least 1")
        if not self.volume > 0:
            raise ConfigurationError("volume must be positive")


def uniform_sampler(lower, upper) -> Callable[[np.random.Generator, int], np.ndarray]:
    """Sampler drawing uniform points in the box [lower, upper]."""
    lower = np.atleast_1d(np.asarray(lower, dtype=float))
    upper = np.atleast_1d(np.asarray(upper, dtype=float))
    if lower.shape != upper.shape or not np.all(upper > lower):
        raise ConfigurationError("sampler bounds must satisfy lower < upper")

    def sample(rng: np.random.Generator, count: int) -> np.ndarray:
        return rng.uniform(lower, upper, size=(count, lower.size))

    return sample


def monte_carlo(
    f: Callable[[np.ndarray], np.ndarray],
    mc: McConfig,
    sampler: Callable[[np.random.Generator, int], np.ndarray],
) -> float:
    """Estimate the integral of f as volume/M times the sum of M sampled values.

    The sampler receives a generator seeded from the config, so a fixed
    config gives a bitwise reproducible estimate.
    """
    rng = np.random.default_rng(mc.seed)
    points = np.asarray(sampler(rng, mc.sample_count), dtype=float)
    if points.ndim != 2 or points.shape[0] != mc.sample_count:
        raise ContractError("sampler must return an (M, dim) array")
    values = np.asarray(f(points), dtype=float)
    if values.shape != (mc.sample_count,):
        raise ContractError("integrand must map (M, dim) points to M values")
    return float(mc.volume / mc.sample_count * np.sum(values))
