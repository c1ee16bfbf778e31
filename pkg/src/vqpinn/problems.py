"""The four benchmark differential equations.

Each problem bundles a residual, Dirichlet boundary data, a closed-form
solution, a family of smooth test functions, and the integrated-by-parts
weak term for one test function.  ``weak_term`` transcribes the bracketed
expression literally; ``weak_assembly`` rebuilds the same expression as
sparse linear forms over a fixed set of model-evaluation batches so a
trainer can get cheap gradients.  A region is one closed box with its
quadrature grids; the unique region touching a piece of the global
boundary supplies the model values for that boundary term.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import ContractError
from .qnn import AnsatzSpec, DerivativeRequest, FeatureMapSpec, QnnLayout
from .quadrature import trapz_1d, trapz_2d, trapz_weights, trapz_weights_2d

__all__ = [
    "BoundaryCondition",
    "FieldBundle",
    "PROBLEM_NAMES",
    "QuantityBatch",
    "Region",
    "SeparableSinusoid",
    "Sinusoid1D",
    "WeakAssembly",
    "get_problem",
    "mesh_points",
    "weak_term",
]

_EDGE_TOL = 1e-12


def mesh_points(xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Tensor-grid points flattened row-major (x outer, y inner)."""
    return np.column_stack([np.repeat(xs, ys.size), np.tile(ys, xs.size)])


# ---------------------------------------------------------------------------
# test functions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Sinusoid1D:
    """cos(pi j x) for j < 0, the constant 1 for j = 0, sin(pi j x) for j > 0."""

    j: int

    def deriv(self, x, order: int = 0) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.j == 0:
            return np.ones_like(x) if order == 0 else np.zeros_like(x)
        w = np.pi * self.j
        if self.j < 0:
            table = (np.cos(w * x), -w * np.sin(w * x), -w * w * np.cos(w * x))
        else:
            table = (np.sin(w * x), w * np.cos(w * x), -w * w * np.sin(w * x))
        return table[order]

    def __call__(self, x) -> np.ndarray:
        return self.deriv(x, 0)


@dataclass(frozen=True)
class SeparableSinusoid:
    """cos(pi j x) * sin(pi k y) with real labels and pure partials to order 2."""

    j: float
    k: float

    def _x_factor(self, x, order: int) -> np.ndarray:
        w = np.pi * self.j
        x = np.asarray(x, dtype=float)
        return (np.cos(w * x), -w * np.sin(w * x), -w * w * np.cos(w * x))[order]

    def _y_factor(self, y, order: int) -> np.ndarray:
        w = np.pi * self.k
        y = np.asarray(y, dtype=float)
        return (np.sin(w * y), w * np.cos(w * y), -w * w * np.sin(w * y))[order]

    def partial(self, x, y, dx: int = 0, dy: int = 0) -> np.ndarray:
        return self._x_factor(x, dx) * self._y_factor(y, dy)

    def __call__(self, x, y) -> np.ndarray:
        return self.partial(x, y)


# ---------------------------------------------------------------------------
# shared containers
# ---------------------------------------------------------------------------

@dataclass
class FieldBundle:
    """Model quantities at a batch of points, keyed by coordinate."""

    f: np.ndarray | None = None
    df: Mapping[int, np.ndarray] = field(default_factory=dict)
    d2f: Mapping[int, np.ndarray] = field(default_factory=dict)


@dataclass(frozen=True)
class BoundaryCondition:
    """Dirichlet data: target values at a fixed set of points."""

    label: str
    points: np.ndarray
    targets: np.ndarray


@dataclass(frozen=True)
class Region:
    """A closed box with per-axis quadrature grids."""

    bounds: tuple[tuple[float, float], ...]
    grids: tuple[np.ndarray, ...]


@dataclass(frozen=True)
class QuantityBatch:
    """One model-evaluation request: points in a region, optional derivative."""

    region: int
    points: np.ndarray
    req: DerivativeRequest | None


@dataclass(frozen=True)
class WeakAssembly:
    """All test-function weak terms as linear forms over evaluation batches.

    term_j = constant_j + sum over linear (W[j] @ values[batch])
           + sum over bilinear rows of U[j] * values[fb] * values[db].
    """

    batches: tuple[QuantityBatch, ...]
    linear: tuple[tuple[int, np.ndarray], ...]
    bilinear: tuple[tuple[int, int, np.ndarray], ...]
    constant: np.ndarray

    def terms(self, values: Sequence[np.ndarray]) -> np.ndarray:
        out = self.constant.copy()
        for idx, w in self.linear:
            out += w @ values[idx]
        for fi, di, u in self.bilinear:
            out += u @ (values[fi] * values[di])
        return out


def _require(bundle_field, what: str):
    if bundle_field is None:
        raise ContractError(f"residual needs {what}")
    return bundle_field


def _get(mapping: Mapping[int, np.ndarray], dim: int, what: str) -> np.ndarray:
    if dim not in mapping:
        raise ContractError(f"residual needs {what}")
    return mapping[dim]


def _touches(value: float, target: float) -> bool:
    return abs(value - target) < _EDGE_TOL


def _column(xs: np.ndarray) -> np.ndarray:
    return np.asarray(xs, dtype=float).reshape(-1, 1)


# ---------------------------------------------------------------------------
# problems
# ---------------------------------------------------------------------------

class DampedOscillator:
    """f' = -kappa e^{-kappa x} cos(lambda x) - lambda e^{-kappa x} sin(lambda x),
    f(0) = 1, on [-1, 1]; solution e^{-kappa x} cos(lambda x)."""

    name = "damped_oscillator"
    input_dim = 1
    domain = ((-1.0, 1.0),)
    needs_value = False
    residual_requests = (DerivativeRequest(0, 1),)
    default_splits = ((-0.33, 0.33),)
    points_per_subdomain = 30
    default_epochs = 500
    default_weights = {"alpha": 1.0, "beta": 1.0, "gamma_res": 1.0,
                       "gamma_wf": 1.0, "gamma_sbc": 1.0}

    def __init__(self, kappa: float = 1.0, lam: float = 10.0, num_qubits: int = 5,
                 depth: int = 4, rescale: float = 0.9):
        self.kappa = kappa
        self.lam = lam
        self.num_qubits = num_qubits
        self.depth = depth
        self.rescale = rescale

    def layout(self) -> QnnLayout:
        return QnnLayout(
            self.num_qubits,
            (FeatureMapSpec(0, "chebyshev", rescale=self.rescale), AnsatzSpec(self.depth)),
        )

    def source(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        decay = np.exp(-self.kappa * x)
        return self.kappa * decay * np.cos(self.lam * x) + self.lam * decay * np.sin(self.lam * x)

    def solution(self, X: np.ndarray) -> np.ndarray:
        x = np.asarray(X, dtype=float).reshape(-1, 1)[:, 0]
        return np.exp(-self.kappa * x) * np.cos(self.lam * x)

    def residual(self, X: np.ndarray, bundle: FieldBundle) -> np.ndarray:
        x = np.asarray(X).reshape(-1, 1)[:, 0]
        return _get(bundle.df, 0, "df/dx") + self.source(x)

    def residual_partials(self, X: np.ndarray, bundle: FieldBundle) -> dict:
        return {DerivativeRequest(0, 1): 1.0}

    def boundary_conditions(self, axis_grids=None) -> tuple[BoundaryCondition, ...]:
        return (BoundaryCondition("f(0)=1", np.array([[0.0]]), np.array([1.0])),)

    def test_functions(self, seed: int = 0) -> tuple[Sinusoid1D, ...]:
        return tuple(Sinusoid1D(j) for j in range(-5, 6))

    def weak_term(self, v: Sinusoid1D, evaluate, regions: Sequence[Region]) -> float:
        xlo, xhi = self.domain[0]
        total = 0.0
        for idx, region in enumerate(regions):
            xs = region.grids[0]
            f = evaluate(idx, _column(xs), None)
            total -= trapz_1d(f * v.deriv(xs, 1), xs)
            total += trapz_1d(v.deriv(xs, 0) * self.source(xs), xs)
            lo, hi = region.bounds[0]
            if _touches(lo, xlo):
                total -= evaluate(idx, np.array([[xlo]]), None)[0] * float(v.deriv(xlo, 0))
            if _touches(hi, xhi):
                total += evaluate(idx, np.array([[xhi]]), None)[0] * float(v.deriv(xhi, 0))
        return float(total)

    def weak_assembly(self, family, regions: Sequence[Region]) -> WeakAssembly:
        xlo, xhi = self.domain[0]
        nfam = len(family)
        batches, linear = [], []
        constant = np.zeros(nfam)
        for idx, region in enumerate(regions):
            xs = region.grids[0]
            w = trapz_weights(xs)
            rows = np.stack([-v.deriv(xs, 1) * w for v in family])
            lo, hi = region.bounds[0]
            if _touches(lo, xlo):
                rows[:, 0] -= [float(v.deriv(xlo, 0)) for v in family]
            if _touches(hi, xhi):
                rows[:, -1] += [float(v.deriv(xhi, 0)) for v in family]
            batches.append(QuantityBatch(idx, _column(xs), None))
            linear.append((len(batches) - 1, rows))
            src = self.source(xs)
            constant += [trapz_1d(v.deriv(xs, 0) * src, xs) for v in family]
        return WeakAssembly(tuple(batches), tuple(linear), (), constant)


class StationaryBurgers:
    """f f' = nu f'' on [-1, 1] with f(+-1) pinned to the tan-profile solution
    sqrt(2 nu a) tan(sqrt(a / 2 nu) (x + b))."""

    name = "burgers"
    input_dim = 1
    domain = ((-1.0, 1.0),)
    needs_value = True
    residual_requests = (DerivativeRequest(0, 1), DerivativeRequest(0, 2))
    default_splits = ((-0.33, 0.33),)
    points_per_subdomain = 30
    default_epochs = 500
    default_weights = {"alpha": 1.0, "beta": 1.0, "gamma_res": 1.0,
                       "gamma_wf": 1.0, "gamma_sbc": 1.0}

    def __init__(self, nu: float = 1.0, slope: float = 3.0, offset: float = 0.0,
                 substitute_boundary_values: bool = False, num_qubits: int = 5,
                 depth: int = 8, rescale: float = 0.9):
        self.nu = nu
        self.slope = slope
        self.offset = offset
        self.substitute_boundary_values = substitute_boundary_values
        self.num_qubits = num_qubits
        self.depth = depth
        self.rescale = rescale

    def layout(self) -> QnnLayout:
        return QnnLayout(
            self.num_qubits,
            (FeatureMapSpec(0, "chebyshev", rescale=self.rescale), AnsatzSpec(self.depth)),
        )

    def solution(self, X: np.ndarray) -> np.ndarray:
        x = np.asarray(X, dtype=float).reshape(-1, 1)[:, 0]
        amp = math.sqrt(2 * self.nu * self.slope)
        rate = math.sqrt(self.slope / (2 * self.nu))
        return amp * np.tan(rate * (x + self.offset))

    def boundary_value(self, x: float) -> float:
        return float(self.solution(np.array([x]))[0])

    def residual(self, X: np.ndarray, bundle: FieldBundle) -> np.ndarray:
        f = _require(bundle.f, "f")
        return f * _get(bundle.df, 0, "df/dx") - self.nu * _get(bundle.d2f, 0, "d2f/dx2")

    def residual_partials(self, X: np.ndarray, bundle: FieldBundle) -> dict:
        f = _require(bundle.f, "f")
        return {
            None: _get(bundle.df, 0, "df/dx"),
            DerivativeRequest(0, 1): f,
            DerivativeRequest(0, 2): -self.nu,
        }

    def boundary_conditions(self, axis_grids=None) -> tuple[BoundaryCondition, ...]:
        return (
            BoundaryCondition("f(-1)", np.array([[-1.0]]), np.array([self.boundary_value(-1.0)])),
            BoundaryCondition("f(1)", np.array([[1.0]]), np.array([self.boundary_value(1.0)])),
        )

    def test_functions(self, seed: int = 0) -> tuple[Sinusoid1D, ...]:
        return tuple(Sinusoid1D(j) for j in range(-5, 6))

    def weak_term(self, v: Sinusoid1D, evaluate, regions: Sequence[Region]) -> float:
        xlo, xhi = self.domain[0]
        nu = self.nu
        total = 0.0
        for idx, region in enumerate(regions):
            xs = region.grids[0]
            pts = _column(xs)
            f = evaluate(idx, pts, None)
            df = evaluate(idx, pts, DerivativeRequest(0, 1))
            total -= nu * trapz_1d(f * v.deriv(xs, 2), xs)
            total += trapz_1d(f * df * v.deriv(xs, 0), xs)
            lo, hi = region.bounds[0]
            if _touches(lo, xlo):
                f_end = self.boundary_value(xlo) if self.substitute_boundary_values else f[0]
                total -= nu * f_end * float(v.deriv(xlo, 1))
                total += nu * df[0] * float(v.deriv(xlo, 0))
            if _touches(hi, xhi):
                f_end = self.boundary_value(xhi) if self.substitute_boundary_values else f[-1]
                total += nu * f_end * float(v.deriv(xhi, 1))
                total -= nu * df[-1] * float(v.deriv(xhi, 0))
        return float(total)

    def weak_assembly(self, family, regions: Sequence[Region]) -> WeakAssembly:
        xlo, xhi = self.domain[0]
        nu = self.nu
        nfam = len(family)
        batches, linear, bilinear = [], [], []
        constant = np.zeros(nfam)
        for idx, region in enumerate(regions):
            xs = region.grids[0]
            w = trapz_weights(xs)
            val_rows = np.stack([-nu * v.deriv(xs, 2) * w for v in family])
            der_rows = np.zeros((nfam, xs.size))
            lo, hi = region.bounds[0]
            if _touches(lo, xlo):
                edge_v1 = np.array([float(v.deriv(xlo, 1)) for v in family])
                if self.substitute_boundary_values:
                    constant -= nu * self.boundary_value(xlo) * edge_v1
                else:
                    val_rows[:, 0] -= nu * edge_v1
                der_rows[:, 0] += nu * np.array([float(v.deriv(xlo, 0)) for v in family])
            if _touches(hi, xhi):
                edge_v1 = np.array([float(v.deriv(xhi, 1)) for v in family])
                if self.substitute_boundary_values:
                    constant += nu * self.boundary_value(xhi) * edge_v1
                else:
                    val_rows[:, -1] += nu * edge_v1
                der_rows[:, -1] -= nu * np.array([float(v.deriv(xhi, 0)) for v in family])
            pts = _column(xs)
            batches.append(QuantityBatch(idx, pts, None))
            f_idx = len(batches) - 1
            batches.append(QuantityBatch(idx, pts, DerivativeRequest(0, 1)))
            d_idx = len(batches) - 1
            linear.append((f_idx, val_rows))
            linear.append((d_idx, der_rows))
            bilinear.append((f_idx, d_idx, np.stack([v.deriv(xs, 0) * w for v in family])))
        return WeakAssembly(tuple(batches), tuple(linear), tuple(bilinear), constant)


class Linear2D:
    """f_x + f_y = 2(x + y) on the unit square with inflow data f(0,y) = y^2
    and f(x,0) = x^2; solution x^2 + y^2."""

    name = "linear2d"
    input_dim = 2
    domain = ((0.0, 1.0), (0.0, 1.0))
    needs_value = False
    residual_requests = (DerivativeRequest(0, 1), DerivativeRequest(1, 1))
    default_splits = ((0.5,), (0.5,))
    axis_points = (20, 20)
    default_epochs = 500
    default_weights = {"alpha": 1.0, "beta": 1.0, "gamma_res": 1.0,
                       "gamma_wf": 1.0, "gamma_sbc": 1.0}

    def __init__(self, num_qubits: int = 5, inner_depth: int = 1, depth: int = 8,
                 rescale: float = 1.0):
        self.num_qubits = num_qubits
        self.inner_depth = inner_depth
        self.depth = depth
        self.rescale = rescale

    def layout(self) -> QnnLayout:
        return QnnLayout(
            self.num_qubits,
            (
                FeatureMapSpec(0, "fourier", rescale=self.rescale),
                AnsatzSpec(self.inner_depth),
                FeatureMapSpec(1, "fourier", rescale=self.rescale),
                AnsatzSpec(self.depth),
            ),
        )

    def default_axis_grids(self) -> tuple[np.ndarray, np.ndarray]:
        nx, ny = self.axis_points
        return np.linspace(0.0, 1.0, nx), np.linspace(0.0, 1.0, ny)

    def solution(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        return X[:, 0] ** 2 + X[:, 1] ** 2

    def residual(self, X: np.ndarray, bundle: FieldBundle) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        return (
            _get(bundle.df, 0, "df/dx")
            + _get(bundle.df, 1, "df/dy")
            - 2.0 * (X[:, 0] + X[:, 1])
        )

    def residual_partials(self, X: np.ndarray, bundle: FieldBundle) -> dict:
        return {DerivativeRequest(0, 1): 1.0, DerivativeRequest(1, 1): 1.0}

    def boundary_conditions(self, axis_grids=None) -> tuple[BoundaryCondition, ...]:
        xs, ys = self.default_axis_grids() if axis_grids is None else axis_grids
        left = np.column_stack([np.zeros(ys.size), ys])
        bottom = np.column_stack([xs, np.zeros(xs.size)])
        return (
            BoundaryCondition("f(0,y)=y^2", left, ys**2),
            BoundaryCondition("f(x,0)=x^2", bottom, xs**2),
        )

    def test_functions(self, seed: int = 0) -> tuple[SeparableSinusoid, ...]:
        return tuple(
            SeparableSinusoid(float(j), float(k))
            for j in range(1, 4)
            for k in range(1, 4)
        )

    def weak_term(self, v: SeparableSinusoid, evaluate, regions: Sequence[Region]) -> float:
        total = 0.0
        for idx, region in enumerate(regions):
            xs, ys = region.grids
            f = evaluate(idx, mesh_points(xs, ys), None).reshape(xs.size, ys.size)
            xg, yg = np.meshgrid(xs, ys, indexing="ij")
            total -= trapz_2d(f * v.partial(xg, yg, dx=1), xs, ys)
            total -= trapz_2d(f * v.partial(xg, yg, dy=1), xs, ys)
            total -= 2.0 * trapz_2d((xg + yg) * v.partial(xg, yg), xs, ys)
            (xlo, xhi), (ylo, yhi) = region.bounds
            if _touches(xhi, 1.0):
                total += trapz_1d(f[-1, :] * v.partial(1.0, ys), ys)
            if _touches(xlo, 0.0):
                total -= trapz_1d(f[0, :] * v.partial(0.0, ys), ys)
            if _touches(yhi, 1.0):
                total += trapz_1d(f[:, -1] * v.partial(xs, 1.0), xs)
            if _touches(ylo, 0.0):
                total -= trapz_1d(f[:, 0] * v.partial(xs, 0.0), xs)
        return float(total)

    def weak_assembly(self, family, regions: Sequence[Region]) -> WeakAssembly:
        nfam = len(family)
        batches, linear = [], []
        constant = np.zeros(nfam)
        for idx, region in enumerate(regions):
            xs, ys = region.grids
            nx, ny = xs.size, ys.size
            xg, yg = np.meshgrid(xs, ys, indexing="ij")
            w2 = trapz_weights_2d(xs, ys)
            wx, wy = trapz_weights(xs), trapz_weights(ys)
            rows = np.stack(
                [
                    -(v.partial(xg, yg, dx=1) + v.partial(xg, yg, dy=1)) * w2
                    for v in family
                ]
            ).reshape(nfam, nx, ny)
            (xlo, xhi), (ylo, yhi) = region.bounds
            for fi, v in enumerate(family):
                if _touches(xhi, 1.0):
                    rows[fi, -1, :] += v.partial(1.0, ys) * wy
                if _touches(xlo, 0.0):
                    rows[fi, 0, :] -= v.partial(0.0, ys) * wy
                if _touches(yhi, 1.0):
                    rows[fi, :, -1] += v.partial(xs, 1.0) * wx
                if _touches(ylo, 0.0):
                    rows[fi, :, 0] -= v.partial(xs, 0.0) * wx
                constant[fi] -= 2.0 * np.sum((xg + yg) * v.partial(xg, yg) * w2)
            batches.append(QuantityBatch(idx, mesh_points(xs, ys), None))
            linear.append((len(batches) - 1, rows.reshape(nfam, nx * ny)))
        return WeakAssembly(tuple(batches), tuple(linear), (), constant)


class Laplace2D:
    """f_xx + f_yy = 0 on the unit square with f(0,y) = sin(pi y) and the
    other three edges held at zero; solution sinh(pi(x-1))/sinh(-pi) sin(pi y)."""

    name = "laplace"
    input_dim = 2
    domain = ((0.0, 1.0), (0.0, 1.0))
    needs_value = False
    residual_requests = (DerivativeRequest(0, 2), DerivativeRequest(1, 2))
    default_splits = ((0.5,), (0.5,))
    axis_points = (21, 21)
    family_size = 144
    default_epochs = 800
    default_weights = {"alpha": 1.0, "beta": 1.0, "gamma_res": 1.0,
                       "gamma_wf": 1.0, "gamma_sbc": 1.0}

    def __init__(self, num_qubits: int = 4, inner_depth: int = 1, depth: int = 6,
                 rescale: float = 1.0):
        self.num_qubits = num_qubits
        self.inner_depth = inner_depth
        self.depth = depth
        self.rescale = rescale

    def layout(self) -> QnnLayout:
        fx = FeatureMapSpec(0, "fourier", rescale=self.rescale)
        fy = FeatureMapSpec(1, "fourier", rescale=self.rescale)
        inner = AnsatzSpec(self.inner_depth)
        return QnnLayout(
            self.num_qubits,
            (fx, inner, fy, inner, fx, inner, fy, AnsatzSpec(self.depth)),
        )

    def default_axis_grids(self) -> tuple[np.ndarray, np.ndarray]:
        nx, ny = self.axis_points
        return np.linspace(0.0, 1.0, nx), np.linspace(0.0, 1.0, ny)

    def solution(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        return np.sinh(np.pi * (X[:, 0] - 1)) / np.sinh(-np.pi) * np.sin(np.pi * X[:, 1])

    def residual(self, X: np.ndarray, bundle: FieldBundle) -> np.ndarray:
        return _get(bundle.d2f, 0, "d2f/dx2") + _get(bundle.d2f, 1, "d2f/dy2")

    def residual_partials(self, X: np.ndarray, bundle: FieldBundle) -> dict:
        return {DerivativeRequest(0, 2): 1.0, DerivativeRequest(1, 2): 1.0}

    def boundary_conditions(self, axis_grids=None) -> tuple[BoundaryCondition, ...]:
        xs, ys = self.default_axis_grids() if axis_grids is None else axis_grids
        left = np.column_stack([np.zeros(ys.size), ys])
        right = np.column_stack([np.ones(ys.size), ys])
        bottom = np.column_stack([xs, np.zeros(xs.size)])
        top = np.column_stack([xs, np.ones(xs.size)])
        return (
            BoundaryCondition("f(0,y)=sin(pi y)", left, np.sin(np.pi * ys)),
            BoundaryCondition("f(1,y)=0", right, np.zeros(ys.size)),
            BoundaryCondition("f(x,0)=0", bottom, np.zeros(xs.size)),
            BoundaryCondition("f(x,1)=0", top, np.zeros(xs.size)),
        )

    def test_functions(self, seed: int = 0) -> tuple[SeparableSinusoid, ...]:
        rng = np.random.default_rng(seed)
        out = []
        for _ in range(self.family_size):
            j = rng.uniform(0.1, 10.0)
            k = rng.uniform(0.1, 10.0)
            out.append(SeparableSinusoid(j, k))
        return tuple(out)

    def weak_term(self, v: SeparableSinusoid, evaluate, regions: Sequence[Region]) -> float:
        total = 0.0
        dx1 = DerivativeRequest(0, 1)
        dy1 = DerivativeRequest(1, 1)
        for idx, region in enumerate(regions):
            xs, ys = region.grids
            f = evaluate(idx, mesh_points(xs, ys), None).reshape(xs.size, ys.size)
            xg, yg = np.meshgrid(xs, ys, indexing="ij")
            total += trapz_2d(
                f * (v.partial(xg, yg, dx=2) + v.partial(xg, yg, dy=2)), xs, ys
            )
            (xlo, xhi), (ylo, yhi) = region.bounds
            if _touches(xlo, 0.0):
                edge = np.column_stack([np.zeros(ys.size), ys])
                total += trapz_1d(np.sin(np.pi * ys) * v.partial(0.0, ys, dx=1), ys)
                total -= trapz_1d(evaluate(idx, edge, dx1) * v.partial(0.0, ys), ys)
            if _touches(xhi, 1.0):
                edge = np.column_stack([np.ones(ys.size), ys])
                total += trapz_1d(evaluate(idx, edge, dx1) * v.partial(1.0, ys), ys)
            if _touches(yhi, 1.0):
                edge = np.column_stack([xs, np.ones(xs.size)])
                total += trapz_1d(evaluate(idx, edge, dy1) * v.partial(xs, 1.0), xs)
            if _touches(ylo, 0.0):
                edge = np.column_stack([xs, np.zeros(xs.size)])
                total -= trapz_1d(evaluate(idx, edge, dy1) * v.partial(xs, 0.0), xs)
        return float(total)

    def weak_assembly(self, family, regions: Sequence[Region]) -> WeakAssembly:
        nfam = len(family)
        batches, linear = [], []
        constant = np.zeros(nfam)
        dx1 = DerivativeRequest(0, 1)
        dy1 = DerivativeRequest(1, 1)
        for idx, region in enumerate(regions):
            xs, ys = region.grids
            xg, yg = np.meshgrid(xs, ys, indexing="ij")
            w2 = trapz_weights_2d(xs, ys)
            wx, wy = trapz_weights(xs), trapz_weights(ys)
            rows = np.stack(
                [
                    (v.partial(xg, yg, dx=2) + v.partial(xg, yg, dy=2)) * w2
                    for v in family
                ]
            )
            batches.append(QuantityBatch(idx, mesh_points(xs, ys), None))
            linear.append((len(batches) - 1, rows.reshape(nfam, xs.size * ys.size)))
            (xlo, xhi), (ylo, yhi) = region.bounds
            if _touches(xlo, 0.0):
                constant += [
                    trapz_1d(np.sin(np.pi * ys) * v.partial(0.0, ys, dx=1), ys)
                    for v in family
                ]
                edge = np.column_stack([np.zeros(ys.size), ys])
                batches.append(QuantityBatch(idx, edge, dx1))
                linear.append(
                    (len(batches) - 1, np.stack([-v.partial(0.0, ys) * wy for v in family]))
                )
            if _touches(xhi, 1.0):
                edge = np.column_stack([np.ones(ys.size), ys])
                batches.append(QuantityBatch(idx, edge, dx1))
                linear.append(
                    (len(batches) - 1, np.stack([v.partial(1.0, ys) * wy for v in family]))
                )
            if _touches(yhi, 1.0):
                edge = np.column_stack([xs, np.ones(xs.size)])
                batches.append(QuantityBatch(idx, edge, dy1))
                linear.append(
                    (len(batches) - 1, np.stack([v.partial(xs, 1.0) * wx for v in family]))
                )
            if _touches(ylo, 0.0):
                edge = np.column_stack([xs, np.zeros(xs.size)])
                batches.append(QuantityBatch(idx, edge, dy1))
                linear.append(
                    (len(batches) - 1, np.stack([-v.partial(xs, 0.0) * wx for v in family]))
                )
        return WeakAssembly(tuple(batches), tuple(linear), (), constant)


# ---------------------------------------------------------------------------
# registry
# ---------------------------------------------------------------------------

_REGISTRY: dict[str, type] = {
    DampedOscillator.name: DampedOscillator,
    StationaryBurgers.name: StationaryBurgers,
    Linear2D.name: Linear2D,
    Laplace2D.name: Laplace2D,
}

PROBLEM_NAMES = tuple(sorted(_REGISTRY))


def get_problem(name: str, **overrides):
    """Instantiate a benchmark problem by name."""
    if name not in _REGISTRY:
        raise ValueError(f"unknown problem {name!r}; available: {', '.join(PROBLEM_NAMES)}")
    return _REGISTRY[name](**overrides)


def weak_term(problem, v, evaluate: Callable, regions: Sequence[Region]) -> float:
    """Weak term of one test function; see the problem classes for the forms."""
    return problem.weak_term(v, evaluate, regions)
