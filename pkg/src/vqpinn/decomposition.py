"""Domain splitting and piecewise trial functions.

A decomposition covers the problem domain with closed boxes.  1D problems
get a fresh uniform grid per subdomain, so interface coordinates appear
as training points on both sides; 2D problems partition the problem's
global tensor grid, with shared grid lines owned by the lower-index
subdomain.  Quadrature grids are always closed (bounds included, appended
when the global grid lacks the split line) so per-subdomain integrals
tile the domain.  A piecewise model pairs one compiled circuit layout
with independent parameters per subdomain; points on shared boundaries
evaluate with the lowest-index containing subdomain's parameters.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConfigurationError, ContractError
from .problems import Region, mesh_points
from .qnn import CompiledQnn, DerivativeRequest, ModelParams, evaluate_batch

__all__ = [
    "Decomposition",
    "Interface",
    "PiecewiseModel",
    "Subdomain",
    "build",
    "locate",
    "piecewise_eval",
]

_TOL = 1e-12


@dataclass(frozen=True)
class Subdomain:
    """One closed box: its training points and its quadrature grids."""

    index: int
    bounds: tuple[tuple[float, float], ...]
    owned_points: np.ndarray
    quad_grids: tuple[np.ndarray, ...]

    @property
    def region(self) -> Region:
        return Region(self.bounds, self.quad_grids)

    def contains(self, X: np.ndarray) -> np.ndarray:
        inside = np.ones(X.shape[0], dtype=bool)
        for dim, (lo, hi) in enumerate(self.bounds):
            inside &= (X[:, dim] >= lo - _TOL) & (X[:, dim] <= hi + _TOL)
        return inside


@dataclass(frozen=True)
class Interface:
    """A shared facet between two subdomains with its sample points."""

    lower: int
    upper: int
    points: np.ndarray


@dataclass(frozen=True)
class Decomposition:
    """Ordered subdomains plus the interfaces between adjacent ones."""

    input_dim: int
    domain: tuple[tuple[float, float], ...]
    subdomains: tuple[Subdomain, ...]
    interfaces: tuple[Interface, ...]

    @property
    def regions(self) -> list[Region]:
        return [sub.region for sub in self.subdomains]

    @property
    def num_subdomains(self) -> int:
        return len(self.subdomains)

    def all_points(self) -> np.ndarray:
        """Every training point, subdomain by subdomain."""
        return np.concatenate([sub.owned_points for sub in self.subdomains])

    def as_points(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X.reshape(-1, 1) if self.input_dim == 1 else X.reshape(1, -1)
        if X.ndim != 2 or X.shape[1] != self.input_dim:
            raise ContractError(f"points must have shape (P, {self.input_dim})")
        return X


def _check_splits(splits: Sequence[float], lo: float, hi: float) -> tuple[float, ...]:
    splits = tuple(float(s) for s in splits)
    if any(not lo < s < hi for s in splits):
        raise ConfigurationError(f"splits {splits} must lie strictly inside ({lo}, {hi})")
    if list(splits) != sorted(set(splits)):
        raise ConfigurationError("splits must be strictly increasing")
    return splits


def _axis_cells(splits: Sequence[float], lo: float, hi: float) -> list[tuple[float, float]]:
    cuts = [lo, *_check_splits(splits, lo, hi), hi]
    return list(zip(cuts[:-1], cuts[1:]))


def _quad_segment(axis: np.ndarray, lo: float, hi: float) -> np.ndarray:
    seg = axis[(axis >= lo - _TOL) & (axis <= hi + _TOL)]
    if seg.size == 0 or seg[0] > lo + _TOL:
        seg = np.concatenate([[lo], seg])
    if seg[-1] < hi - _TOL:
        seg = np.concatenate([seg, [hi]])
    return seg


def _interface_samples(axis: np.ndarray, lo: float, hi: float) -> np.ndarray:
    return axis[(axis >= lo - _TOL) & (axis <= hi + _TOL)]


def build(problem, splits=None, points_per_subdomain: int | None = None) -> Decomposition:
    """Default decomposition of a problem, optionally overriding the splits."""
    if problem.input_dim == 1:
        (lo, hi), = problem.domain
        axis_splits = problem.default_splits[0] if splits is None else splits
        count = points_per_subdomain or problem.points_per_subdomain
        cells = _axis_cells(axis_splits, lo, hi)
        subs = []
        for i, (a, b) in enumerate(cells):
            grid = np.linspace(a, b, count)
            subs.append(Subdomain(i, ((a, b),), grid.reshape(-1, 1), (grid,)))
        faces = tuple(
            Interface(i, i + 1, np.array([[cells[i][1]]])) for i in range(len(cells) - 1)
        )
        return Decomposition(1, problem.domain, tuple(subs), faces)

    xs, ys = problem.default_axis_grids()
    (xlo, xhi), (ylo, yhi) = problem.domain
    per_axis = problem.default_splits if splits is None else splits
    xcells = _axis_cells(per_axis[0], xlo, xhi)
    ycells = _axis_cells(per_axis[1], ylo, yhi)
    points = mesh_points(xs, ys)
    subs = []
    claimed = np.zeros(points.shape[0], dtype=bool)
    for xi, (xa, xb) in enumerate(xcells):
        for yi, (ya, yb) in enumerate(ycells):
            index = xi * len(ycells) + yi
            bounds = ((xa, xb), (ya, yb))
            inside = (
                (points[:, 0] >= xa - _TOL)
                & (points[:, 0] <= xb + _TOL)
                & (points[:, 1] >= ya - _TOL)
                & (points[:, 1] <= yb + _TOL)
            )
            owned = inside & ~claimed
            claimed |= owned
            subs.append(
                Subdomain(
                    index,
                    bounds,
                    points[owned],
                    (_quad_segment(xs, xa, xb), _quad_segment(ys, ya, yb)),
                )
            )
    faces = []
    for xi in range(len(xcells) - 1):
        cut = xcells[xi][1]
        for yi, (ya, yb) in enumerate(ycells):
            seg = _interface_samples(ys, ya, yb)
            pts = np.column_stack([np.full(seg.size, cut), seg])
            faces.append(Interface(xi * len(ycells) + yi, (xi + 1) * len(ycells) + yi, pts))
    for yi in range(len(ycells) - 1):
        cut = ycells[yi][1]
        for xi, (xa, xb) in enumerate(xcells):
            seg = _interface_samples(xs, xa, xb)
            pts = np.column_stack([seg, np.full(seg.size, cut)])
            faces.append(Interface(xi * len(ycells) + yi, xi * len(ycells) + yi + 1, pts))
    return Decomposition(2, problem.domain, tuple(subs), tuple(faces))


def locate(decomposition: Decomposition, X) -> np.ndarray:
    """Owning subdomain per point: the lowest-index one containing it."""
    X = decomposition.as_points(X)
    owner = np.full(X.shape[0], -1, dtype=np.int64)
    for sub in decomposition.subdomains:
        unclaimed = owner < 0
        owner[unclaimed & sub.contains(X)] = sub.index
    if np.any(owner < 0):
        bad = X[owner < 0][0]
        raise ContractError(f"point {bad} lies outside the domain")
    return owner


@dataclass
class PiecewiseModel:
    """One compiled layout with independent parameters per subdomain."""

    decomposition: Decomposition
    compiled: CompiledQnn
    params: list[ModelParams]

    def __post_init__(self) -> None:
        if len(self.params) != self.decomposition.num_subdomains:
            raise ContractError("one parameter set per subdomain required")


def piecewise_eval(pm: PiecewiseModel, X, req: DerivativeRequest | None = None) -> np.ndarray:
    """Evaluate the owning subdomain's model at each point."""
    X = pm.decomposition.as_points(X)
    owners = locate(pm.decomposition, X)
    out = np.empty(X.shape[0])
    for index in range(pm.decomposition.num_subdomains):
        mask = owners == index
        if np.any(mask):
            out[mask] = evaluate_batch(pm.compiled, pm.params[index], X[mask], req).values
    return out
