"""Differentiable circuit models: f(x) = scale * <Z-sum> + shift.

A model is a block sequence of coordinate feature maps and hardware-efficient
ansatz layers. Feature maps encode coordinate d on every qubit through a
tower of multipliers; re-uploading the same coordinate re-uses the same
angle slots, one per (coordinate, qubit) pair.

Derivatives with respect to coordinates follow the chain rule over encoded
angles: order 1 is sum_m phi_m'(x) D_m with D_m the two-point shift of slot
m (each gate occurrence shifted individually), order 2 adds the four-point
double shifts D_{m,m'} against phi_m' phi_{m'}' plus the phi_m'' D_m terms.
Gradients with respect to trainable parameters apply the same shift-table
combination to per-evaluation adjoint gradients from the engine.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import engine
from .errors import ConfigurationError, ContractError, EncodingDomainError
from .qsim import Circuit, Gate

FEATURE_MAP_KINDS = ("chebyshev", "fourier")
HALF_PI = np.pi / 2.0


@dataclass(frozen=True)
class FeatureMapSpec:
    """A tower encoding of one input coordinate across the register."""

    input_dim: int
    kind: str
    rescale: float = 1.0
    axis: str = "ry"
    multipliers: tuple[int, ...] | None = None


@dataclass(frozen=True)
class AnsatzSpec:
    """Hardware-efficient layers: per qubit RX, RY, RX then a CNOT chain."""

    depth: int


@dataclass(frozen=True)
class QnnLayout:
    """Register size plus the ordered block sequence of a model."""

    num_qubits: int
    blocks: tuple


@dataclass
class ModelParams:
    """Trainable state: ansatz angles plus the observable's affine pair."""

    theta: np.ndarray
    scale: float = 1.0
    shift: float = 0.0


@dataclass(frozen=True)
class DerivativeRequest:
    """Which coordinate to differentiate along, and to what order."""

    dim: int
    order: int

    def __post_init__(self):
        if self.order not in (1, 2):
            raise ContractError(f"derivative order must be 1 or 2, got {self.order}")
        if self.dim < 0:
            raise ContractError(f"derivative dim must be nonnegative, got {self.dim}")


@dataclass(frozen=True)
class CoordInfo:
    """Compiled encoding of one coordinate: slots, tower, and gate occurrences."""

    slots: tuple[int, ...]
    multipliers: np.ndarray
    kind: str
    rescale: float
    occurrences: tuple[tuple[int, ...], ...]


class CompiledQnn:
    """A layout lowered to a circuit with slot bookkeeping and plan caches."""

    def __init__(self, layout: QnnLayout, circuit: Circuit, theta_cols: np.ndarray, coords: dict):
        self.layout = layout
        self.circuit = circuit
        self.theta_cols = theta_cols
        self.num_theta = len(theta_cols)
        self.coords = coords
        self.num_inputs = len(coords)
        slots = np.array(
            [g.angle_slot if g.angle_slot is not None else 0 for g in circuit.gates],
            dtype=np.int64,
        )
        self.gate_slot_cols = slots
        self._plans: dict = {}


def _validate_feature_map(fm: FeatureMapSpec, num_qubits: int) -> tuple[int, ...]:
    if fm.kind not in FEATURE_MAP_KINDS:
        raise ConfigurationError(
            f"unknown feature map kind {fm.kind!r}; available: {FEATURE_MAP_KINDS}"
        )
    if not 0.0 < fm.rescale <= 1.0:
        raise ConfigurationError(f"feature map rescale must be in (0, 1], got {fm.rescale}")
    if fm.axis not in ("rx", "ry", "rz"):
        raise ConfigurationError(f"feature map axis must be a rotation kind, got {fm.axis!r}")
    if fm.input_dim < 0:
        raise ConfigurationError(f"feature map input_dim must be nonnegative, got {fm.input_dim}")
    multipliers = fm.multipliers or tuple(range(1, num_qubits + 1))
    if len(multipliers) != num_qubits:
        raise ConfigurationError(
            f"feature map needs {num_qubits} multipliers, got {len(multipliers)}"
        )
    return tuple(multipliers)


def compile_layout(layout: QnnLayout) -> CompiledQnn:
    """Lower a block sequence to a circuit with shared coordinate slots."""
    nq = layout.num_qubits
    gates: list[Gate] = []
    theta_cols: list[int] = []
    slot_count = 0
    building: dict[int, dict] = {}
    for block in layout.blocks:
        if isinstance(block, FeatureMapSpec):
            multipliers = _validate_feature_map(block, nq)
            info = building.get(block.input_dim)
            if info is None:
                info = {
                    "slots": list(range(slot_count, slot_count + nq)),
                    "multipliers": multipliers,
                    "kind": block.kind,
                    "rescale": block.rescale,
                    "axis": block.axis,
                    "occurrences": [[] for _ in range(nq)],
                }
                building[block.input_dim] = info
                slot_count += nq
            else:
                same = (
                    info["multipliers"] == multipliers
                    and info["kind"] == block.kind
                    and info["rescale"] == block.rescale
                    and info["axis"] == block.axis
                )
                if not same:
                    raise ConfigurationError(
                        f"re-uploaded coordinate {block.input_dim} must repeat the same feature map"
                    )
            for qubit in range(nq):
                info["occurrences"][qubit].append(len(gates))
                gates.append(Gate(info["axis"], qubit, angle_slot=info["slots"][qubit]))
        elif isinstance(block, AnsatzSpec):
            if block.depth < 1:
                raise ConfigurationError(f"ansatz depth must be >= 1, got {block.depth}")
            for _ in range(block.depth):
                for qubit in range(nq):
                    for kind in ("rx", "ry", "rx"):
                        theta_cols.append(slot_count)
                        gates.append(Gate(kind, qubit, angle_slot=slot_count))
                        slot_count += 1
                for qubit in range(nq - 1):
                    gates.append(Gate("cnot", qubit + 1, control=qubit))
        else:
            raise ConfigurationError(f"unknown block type {type(block).__name__}")
    if not building:
        raise ConfigurationError("layout has no feature map")
    num_inputs = max(building) + 1
    for d in range(num_inputs):
        if d not in building:
            raise ConfigurationError(f"coordinate {d} has no feature map")
    coords = {
        d: CoordInfo(
            slots=tuple(info["slots"]),
            multipliers=np.asarray(info["multipliers"], dtype=np.float64),
            kind=info["kind"],
            rescale=info["rescale"],
            occurrences=tuple(tuple(o) for o in info["occurrences"]),
        )
        for d, info in building.items()
    }
    circuit = Circuit(nq, tuple(gates), slot_count)
    return CompiledQnn(layout, circuit, np.asarray(theta_cols, dtype=np.int64), coords)


def _as_compiled(model) -> CompiledQnn:
    if isinstance(model, CompiledQnn):
        return model
    if isinstance(model, QnnLayout):
        return compile_layout(model)
    raise ContractError(f"expected QnnLayout or CompiledQnn, got {type(model).__name__}")


# ---------------------------------------------------------------------------
# encodings
# ---------------------------------------------------------------------------

def _encode(kind: str, rescale: float, multipliers: np.ndarray, x: np.ndarray):
    """Angles and their first two x-derivative factors, shapes (P, num_qubits)."""
    x = x[:, None]
    m = multipliers[None, :]
    s = rescale
    if kind == "fourier":
        phi = m * (s * x)
        dphi = np.broadcast_to(m * s, phi.shape).copy()
        ddphi = np.zeros_like(phi)
        return phi, dphi, ddphi
    t = s * x
    if np.any(np.abs(t) >= 1.0):
        worst = float(np.max(np.abs(t)))
        raise EncodingDomainError(
            f"chebyshev encoding needs |rescale * x| < 1, got {worst}; lower the rescale"
        )
    root = np.sqrt(1.0 - t * t)
    phi = m * np.arccos(t)
    dphi = -m * s / root
    ddphi = -m * s**3 * x / root**3
    return phi, dphi, ddphi


def encode_angles(fm: FeatureMapSpec, x, num_qubits: int | None = None):
    """Public single-map encoding: angles, d(angle)/dx, d2(angle)/dx2."""
    if fm.multipliers is not None:
        multipliers = np.asarray(fm.multipliers, dtype=np.float64)
    elif num_qubits is not None:
        multipliers = np.arange(1, num_qubits + 1, dtype=np.float64)
    else:
        raise ContractError("encode_angles needs explicit multipliers or num_qubits")
    if fm.kind not in FEATURE_MAP_KINDS:
        raise ConfigurationError(f"unknown feature map kind {fm.kind!r}")
    scalar = np.ndim(x) == 0
    arr = np.atleast_1d(np.asarray(x, dtype=np.float64))
    phi, dphi, ddphi = _encode(fm.kind, fm.rescale, multipliers, arr)
    if scalar:
        return phi[0], dphi[0], ddphi[0]
    return phi, dphi, ddphi


# ---------------------------------------------------------------------------
# shift plans
# ---------------------------------------------------------------------------

class _ShiftPlan:
    """Deduplicated shifted evaluations plus coefficient rows for one request."""

    def __init__(self, deltas: np.ndarray, rows: list):
        self.deltas = deltas
        self.rows = rows
        self.num_evals = deltas.shape[0]

    def coefficients(self, dphi: np.ndarray, ddphi: np.ndarray) -> np.ndarray:
        coeff = np.zeros((dphi.shape[0], self.num_evals))
        for col, scale, kind, i, j in self.rows:
            if kind == 0:
                coeff[:, col] += scale * dphi[:, i]
            elif kind == 1:
                coeff[:, col] += scale * ddphi[:, i]
            else:
                coeff[:, col] += scale * dphi[:, i] * dphi[:, j]
        return coeff


def _shift_plan(model: CompiledQnn, dim: int, order: int) -> _ShiftPlan:
    key = (dim, order)
    plan = model._plans.get(key)
    if plan is not None:
        return plan
    info = model.coords[dim]
    num_gates = len(model.circuit.gates)
    eval_index: dict[tuple, int] = {}
    shift_dicts: list[dict] = []

    def eval_col(shifts: dict) -> int:
        shifts = {g: u for g, u in shifts.items() if u != 0}
        key = tuple(sorted(shifts.items()))
        col = eval_index.get(key)
        if col is None:
            col = len(shift_dicts)
            eval_index[key] = col
            shift_dicts.append(shifts)
        return col

    rows: list[tuple] = []
    nslots = len(info.slots)
    if order == 1:
        for m in range(nslots):
            for g in info.occurrences[m]:
                for sign in (1, -1):
                    rows.append((eval_col({g: sign}), 0.5 * sign, 0, m, -1))
    else:
        if info.kind == "chebyshev":
            # the phi'' D_m terms; fourier towers have phi'' = 0
            for m in range(nslots):
                for g in info.occurrences[m]:
                    for sign in (1, -1):
                        rows.append((eval_col({g: sign}), 0.5 * sign, 1, m, -1))
        for mi in range(nslots):
            for mj in range(mi, nslots):
                pair_scale = 0.25 if mi == mj else 0.5  # off-diagonal pairs count twice
                for g in info.occurrences[mi]:
                    for gp in info.occurrences[mj]:
                        for s1 in (1, -1):
                            for s2 in (1, -1):
                                shifts = {g: s1}
                                shifts[gp] = shifts.get(gp, 0) + s2
                                rows.append(
                                    (eval_col(shifts), pair_scale * s1 * s2, 2, mi, mj)
                                )
    deltas = np.zeros((len(shift_dicts), num_gates))
    for col, shifts in enumerate(shift_dicts):
        for g, units in shifts.items():
            deltas[col, g] = units * HALF_PI
    plan = _ShiftPlan(deltas, rows)
    model._plans[key] = plan
    return plan


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

@dataclass
class QuantityResult:
    """A batch of one model quantity, optionally with parameter gradients."""

    values: np.ndarray
    dtheta: np.ndarray | None = None
    dscale: np.ndarray | None = None
    dshift: np.ndarray | None = None


def _as_points(model: CompiledQnn, X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 0:
        X = X.reshape(1, 1)
    elif X.ndim == 1:
        # a flat array is a batch of points for 1-input models, one point otherwise
        X = X[:, None] if model.num_inputs == 1 else X[None, :]
    if X.ndim != 2 or X.shape[1] != model.num_inputs:
        raise ContractError(
            f"points must have shape (batch, {model.num_inputs}), got {X.shape}"
        )
    return X


def _check_params(model: CompiledQnn, params: ModelParams) -> np.ndarray:
    theta = np.asarray(params.theta, dtype=np.float64)
    if theta.shape != (model.num_theta,):
        raise ContractError(
            f"params.theta must have shape ({model.num_theta},), got {theta.shape}"
        )
    return theta


def _slot_values(model: CompiledQnn, theta: np.ndarray, X: np.ndarray):
    P = X.shape[0]
    slot_values = np.empty((P, model.circuit.num_slots))
    slot_values[:, model.theta_cols] = theta[None, :]
    encodings = {}
    for d, info in model.coords.items():
        phi, dphi, ddphi = _encode(info.kind, info.rescale, info.multipliers, X[:, d])
        slot_values[:, list(info.slots)] = phi
        encodings[d] = (dphi, ddphi)
    return slot_values, encodings


def evaluate_batch(model, params: ModelParams, X, req: DerivativeRequest | None = None,
                   need_grads: bool = False) -> QuantityResult:
    """Evaluate f (req None) or an input derivative of f over a point batch.

    With ``need_grads`` the result carries d/d(theta), d/d(scale) and
    d/d(shift) rows alongside the values.
    """
    model = _as_compiled(model)
    theta = _check_params(model, params)
    X = _as_points(model, X)
    if req is not None and req.dim >= model.num_inputs:
        raise ContractError(f"derivative dim {req.dim} out of range [0, {model.num_inputs})")
    P = X.shape[0]
    slot_values, encodings = _slot_values(model, theta, X)
    base_angles = slot_values[:, model.gate_slot_cols]
    scale = float(params.scale)

    if req is None:
        if need_grads:
            z, slot_grads = engine.batch_values_and_grads(model.circuit, base_angles)
            return QuantityResult(
                values=scale * z + float(params.shift),
                dtheta=scale * slot_grads[:, model.theta_cols],
                dscale=z.copy(),
                dshift=np.ones(P),
            )
        z = engine.batch_values(model.circuit, base_angles)
        return QuantityResult(values=scale * z + float(params.shift))

    plan = _shift_plan(model, req.dim, req.order)
    dphi, ddphi = encodings[req.dim]
    coeff = plan.coefficients(dphi, ddphi)
    E = plan.num_evals
    full = (base_angles[:, None, :] + plan.deltas[None, :, :]).reshape(P * E, -1)
    if need_grads:
        z, slot_grads = engine.batch_values_and_grads(model.circuit, full)
        z = z.reshape(P, E)
        theta_grads = slot_grads[:, model.theta_cols].reshape(P, E, model.num_theta)
        raw = np.einsum("pe,pe->p", coeff, z)
        return QuantityResult(
            values=scale * raw,
            dtheta=scale * np.einsum("pe,pet->pt", coeff, theta_grads),
            dscale=raw,
            dshift=np.zeros(P),
        )
    z = engine.batch_values(model.circuit, full).reshape(P, E)
    return QuantityResult(values=scale * np.einsum("pe,pe->p", coeff, z))


def model_value(model, params: ModelParams, x) -> float:
    """f at one point."""
    return float(evaluate_batch(model, params, np.atleast_2d(np.asarray(x, dtype=np.float64)).reshape(1, -1)).values[0])


def model_values(model, params: ModelParams, X) -> np.ndarray:
    """f over a batch of points."""
    return evaluate_batch(model, params, X).values


def model_input_derivative(model, params: ModelParams, x, req: DerivativeRequest) -> float:
    """A first or second coordinate derivative of f at one point."""
    return float(
        evaluate_batch(
            model, params, np.atleast_2d(np.asarray(x, dtype=np.float64)).reshape(1, -1), req
        ).values[0]
    )


def model_gradients(model, params: ModelParams, x, req: DerivativeRequest | None = None):
    """Value and parameter gradients of f (or of an input derivative) at one point.

    Returns ``(value, dtheta, dscale, dshift)``.
    """
    result = evaluate_batch(
        model,
        params,
        np.atleast_2d(np.asarray(x, dtype=np.float64)).reshape(1, -1),
        req,
        need_grads=True,
    )
    return (
        float(result.values[0]),
        result.dtheta[0].copy(),
        float(result.dscale[0]),
        float(result.dshift[0]),
    )
