"""Batched circuit evaluation behind the model layer.

Takes a per-gate angle matrix of shape (batch, num_gates) and returns raw
Z-sum expectations (and, on request, their gradients accumulated per angle
slot). The observable's affine scale and shift are applied by callers.

Two interchangeable backends: numba kernels (default when importable) and a
vectorized numpy path. Both reduce in fixed order, so results are
deterministic; the numba path keeps each batch element's state local, which
is what makes training runs affordable.
"""
from __future__ import annotations

import os
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ContractError
from .qsim import Circuit, zsum_diagonal

_KIND_CODES = {"rx": 0, "ry": 1, "rz": 2, "cnot": 3}

try:
    from . import _kernels

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    _kernels = None
    _HAVE_NUMBA = False

_BACKEND = os.environ.get("VQPINN_ENGINE", "numba" if _HAVE_NUMBA else "numpy")


def set_backend(name: str) -> None:
    """Select 'numba' or 'numpy' for subsequent batch evaluations."""
    global _BACKEND
    if name not in ("numba", "numpy"):
        raise ContractError(f"unknown engine backend {name!r}")
    if name == "numba" and not _HAVE_NUMBA:
        raise ContractError("numba backend requested but numba is not importable")
    _BACKEND = name


def get_backend() -> str:
    return _BACKEND


@dataclass(frozen=True)
class _Tables:
    kinds: np.ndarray
    targets: np.ndarray
    controls: np.ndarray
    slots: np.ndarray
    zdiag: np.ndarray
    num_qubits: int
    num_slots: int
    cnot_sources: tuple


@lru_cache(maxsize=None)
def _tables(circuit: Circuit) -> _Tables:
    kinds = np.array([_KIND_CODES[g.kind] for g in circuit.gates], dtype=np.int64)
    targets = np.array([g.target for g in circuit.gates], dtype=np.int64)
    controls = np.array(
        [g.control if g.control is not None else -1 for g in circuit.gates], dtype=np.int64
    )
    slots = np.array(
        [g.angle_slot if g.angle_slot is not None else -1 for g in circuit.gates], dtype=np.int64
    )
    dim = 2**circuit.num_qubits
    sources = []
    for g in circuit.gates:
        if g.kind == "cnot":
            idx = np.arange(dim)
            src = np.where((idx >> g.control) & 1 == 1, idx ^ (1 << g.target), idx)
            src.setflags(write=False)
            sources.append(src)
        else:
            sources.append(None)
    for arr in (kinds, targets, controls, slots):
        arr.setflags(write=False)
    return _Tables(
        kinds,
        targets,
        controls,
        slots,
        zsum_diagonal(circuit.num_qubits),
        circuit.num_qubits,
        circuit.num_slots,
        tuple(sources),
    )


def _check_angles(circuit: Circuit, gate_angles: np.ndarray) -> np.ndarray:
    gate_angles = np.ascontiguousarray(gate_angles, dtype=np.float64)
    if gate_angles.ndim != 2 or gate_angles.shape[1] != len(circuit.gates):
        raise ContractError(
            f"gate_angles must have shape (batch, {len(circuit.gates)}), got {gate_angles.shape}"
        )
    return gate_angles


def batch_values(circuit: Circuit, gate_angles: np.ndarray) -> np.ndarray:
    """Raw Z-sum expectations, one per batch row."""
    gate_angles = _check_angles(circuit, gate_angles)
    t = _tables(circuit)
    if _BACKEND == "numba":
        return _kernels.forward_values(
            t.kinds, t.targets, t.controls, gate_angles, t.zdiag, t.num_qubits
        )
    return _np_values(t, gate_angles)


def batch_values_and_grads(circuit: Circuit, gate_angles: np.ndarray):
    """Raw Z-sum expectations and per-slot gradients, shapes (B,) and (B, num_slots)."""
    gate_angles = _check_angles(circuit, gate_angles)
    t = _tables(circuit)
    if _BACKEND == "numba":
        return _kernels.forward_values_and_slot_grads(
            t.kinds, t.targets, t.controls, t.slots, gate_angles, t.zdiag, t.num_qubits, t.num_slots
        )
    return _np_values_and_grads(t, gate_angles)


# ---------------------------------------------------------------------------
# numpy fallback
# ---------------------------------------------------------------------------

def _np_apply(t: _Tables, psi: np.ndarray, g: int, angles: np.ndarray, invert: bool) -> np.ndarray:
    kind = t.kinds[g]
    if kind == 3:
        return psi[:, t.cnot_sources[g]]
    ang = -angles if invert else angles
    c = np.cos(ang * 0.5)
    s = np.sin(ang * 0.5)
    target = t.targets[g]
    shaped = psi.reshape(psi.shape[0], 2 ** (t.num_qubits - 1 - target), 2, 2**target)
    a0 = shaped[:, :, 0, :]
    a1 = shaped[:, :, 1, :]
    out = np.empty_like(shaped)
    if kind == 0:
        cc = c[:, None, None]
        ss = (1j * s)[:, None, None]
        out[:, :, 0, :] = cc * a0 - ss * a1
        out[:, :, 1, :] = -ss * a0 + cc * a1
    elif kind == 1:
        cc = c[:, None, None]
        ss = s[:, None, None]
        out[:, :, 0, :] = cc * a0 - ss * a1
        out[:, :, 1, :] = ss * a0 + cc * a1
    else:
        e0 = (c - 1j * s)[:, None, None]
        e1 = (c + 1j * s)[:, None, None]
        out[:, :, 0, :] = e0 * a0
        out[:, :, 1, :] = e1 * a1
    return out.reshape(psi.shape)


def _np_forward(t: _Tables, gate_angles: np.ndarray) -> np.ndarray:
    B = gate_angles.shape[0]
    psi = np.zeros((B, 2**t.num_qubits), dtype=np.complex128)
    psi[:, 0] = 1.0
    for g in range(len(t.kinds)):
        psi = _np_apply(t, psi, g, gate_angles[:, g], invert=False)
    return psi


def _np_values(t: _Tables, gate_angles: np.ndarray) -> np.ndarray:
    psi = _np_forward(t, gate_angles)
    return (np.abs(psi) ** 2) @ t.zdiag


def _np_pauli(t: _Tables, psi: np.ndarray, g: int) -> np.ndarray:
    kind = t.kinds[g]
    target = t.targets[g]
    shaped = psi.reshape(psi.shape[0], 2 ** (t.num_qubits - 1 - target), 2, 2**target)
    a0 = shaped[:, :, 0, :]
    a1 = shaped[:, :, 1, :]
    out = np.empty_like(shaped)
    if kind == 0:
        out[:, :, 0, :] = a1
        out[:, :, 1, :] = a0
    elif kind == 1:
        out[:, :, 0, :] = -1j * a1
        out[:, :, 1, :] = 1j * a0
    else:
        out[:, :, 0, :] = a0
        out[:, :, 1, :] = -a1
    return out.reshape(psi.shape)


def _np_values_and_grads(t: _Tables, gate_angles: np.ndarray):
    psi = _np_forward(t, gate_angles)
    lam = psi * t.zdiag
    values = np.einsum("bi,bi->b", np.conj(psi), lam).real
    grads = np.zeros((gate_angles.shape[0], t.num_slots), dtype=np.float64)
    for g in range(len(t.kinds) - 1, -1, -1):
        if t.kinds[g] == 3:
            psi = _np_apply(t, psi, g, None, invert=False)
            lam = _np_apply(t, lam, g, None, invert=False)
            continue
        p_psi = _np_pauli(t, psi, g)
        grads[:, t.slots[g]] += np.einsum("bi,bi->b", np.conj(lam), p_psi).imag
        psi = _np_apply(t, psi, g, gate_angles[:, g], invert=True)
        lam = _np_apply(t, lam, g, gate_angles[:, g], invert=True)
    return values, grads
