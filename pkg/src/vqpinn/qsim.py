"""Dense statevector simulator for parameterized circuits.

States are numpy complex128 arrays of length 2**n, qubit q mapped to bit q
of the amplitude index. The gate set is RX, RY, RZ (half-angle convention
R_P(angle) = exp(-i * angle * P / 2)) plus CNOT. The observable is the
affine Z-sum  scale * sum_q Z_q + shift * I, which is diagonal in the
computational basis, so applying it to a state is an elementwise multiply.

Gradients come in two interchangeable flavours:

* ``adjoint_gradient``: one forward pass, then a reversed sweep that undoes
  each gate on both the ket and an observable-propagated bra, accumulating
  2 Re <bra| dU/dangle |ket> per gate into its slot.
* ``shift_rule_gradient``: the two-point rule E(angle + pi/2) - E(angle - pi/2)
  over 2, applied to each gate occurrence of the slot individually and summed,
  which is what shared (re-uploaded) slots require.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ConfigurationError, ContractError

MAX_QUBITS = 20

ROTATION_KINDS = ("rx", "ry", "rz")
GATE_KINDS = ROTATION_KINDS + ("cnot",)


@dataclass(frozen=True)
class Gate:
    """One circuit element: a slotted rotation or a CNOT."""

    kind: str
    target: int
    control: int | None = None
    angle_slot: int | None = None


@dataclass(frozen=True)
class Circuit:
    """An ordered gate list over a fixed register, with shared angle slots."""

    num_qubits: int
    gates: tuple[Gate, ...]
    num_slots: int

    def __post_init__(self):
        if not 1 <= self.num_qubits <= MAX_QUBITS:
            raise ConfigurationError(
                f"num_qubits must be in [1, {MAX_QUBITS}], got {self.num_qubits}"
            )
        for gate in self.gates:
            if gate.kind not in GATE_KINDS:
                raise ContractError(f"unknown gate kind {gate.kind!r}")
            if not 0 <= gate.target < self.num_qubits:
                raise ContractError(f"gate target {gate.target} out of range")
            if gate.kind == "cnot":
                if gate.control is None or not 0 <= gate.control < self.num_qubits:
                    raise ContractError(f"cnot control {gate.control} out of range")
                if gate.control == gate.target:
                    raise ContractError("cnot control and target must differ")
            else:
                if gate.angle_slot is None or not 0 <= gate.angle_slot < self.num_slots:
                    raise ContractError(
                        f"rotation slot {gate.angle_slot} out of range [0, {self.num_slots})"
                    )


@dataclass(frozen=True)
class Observable:
    """The diagonal observable  scale * sum_q Z_q + shift * I."""

    scale: float = 1.0
    shift: float = 0.0


@lru_cache(maxsize=None)
def zsum_diagonal(num_qubits: int) -> np.ndarray:
    """Diagonal of sum_q Z_q: entry i equals num_qubits - 2 * popcount(i)."""
    idx = np.arange(2**num_qubits)
    bits = (idx[:, None] >> np.arange(num_qubits)) & 1
    diag = num_qubits - 2 * bits.sum(axis=1)
    diag = diag.astype(np.float64)
    diag.setflags(write=False)
    return diag


def zero_state(num_qubits: int) -> np.ndarray:
    """The all-zeros computational basis state."""
    if not 1 <= num_qubits <= MAX_QUBITS:
        raise ConfigurationError(
            f"num_qubits must be in [1, {MAX_QUBITS}], got {num_qubits}"
        )
    state = np.zeros(2**num_qubits, dtype=np.complex128)
    state[0] = 1.0
    return state


def _num_qubits_of(state: np.ndarray) -> int:
    n = int(round(np.log2(state.shape[0])))
    if 2**n != state.shape[0]:
        raise ContractError(f"state length {state.shape[0]} is not a power of two")
    return n


def _rotation_coefficients(kind: str, angle: float):
    """The 2x2 matrix entries (m00, m01, m10, m11) of a rotation gate."""
    c = np.cos(angle / 2.0)
    s = np.sin(angle / 2.0)
    if kind == "rx":
        return c, -1j * s, -1j * s, c
    if kind == "ry":
        return c, -s, s, c
    if kind == "rz":
        return c - 1j * s, 0.0, 0.0, c + 1j * s
    raise ContractError(f"not a rotation kind: {kind!r}")


def _apply_single_qubit(state: np.ndarray, qubit: int, m00, m01, m10, m11) -> np.ndarray:
    n = _num_qubits_of(state)
    shaped = state.reshape(2 ** (n - 1 - qubit), 2, 2**qubit)
    a0 = shaped[:, 0, :]
    a1 = shaped[:, 1, :]
    out = np.empty_like(shaped)
    out[:, 0, :] = m00 * a0 + m01 * a1
    out[:, 1, :] = m10 * a0 + m11 * a1
    return out.reshape(-1)


@lru_cache(maxsize=None)
def _cnot_source_index(num_qubits: int, control: int, target: int) -> np.ndarray:
    """Permutation p with (CNOT state)[i] = state[p[i]]."""
    idx = np.arange(2**num_qubits)
    flipped = idx ^ (1 << target)
    src = np.where((idx >> control) & 1 == 1, flipped, idx)
    src.setflags(write=False)
    return src


def apply_gate(state: np.ndarray, gate: Gate, angle: float | None = None) -> np.ndarray:
    """Apply one gate, returning a new state array."""
    if gate.kind == "cnot":
        n = _num_qubits_of(state)
        return state[_cnot_source_index(n, gate.control, gate.target)]
    if angle is None:
        raise ContractError(f"rotation gate {gate.kind} needs an angle")
    m00, m01, m10, m11 = _rotation_coefficients(gate.kind, angle)
    return _apply_single_qubit(state, gate.target, m00, m01, m10, m11)


def _gate_angle(gate: Gate, angles: np.ndarray, shifts: dict[int, float], index: int):
    if gate.kind == "cnot":
        return None
    return float(angles[gate.angle_slot]) + shifts.get(index, 0.0)


def _run(circuit: Circuit, angles: np.ndarray, shifts: dict[int, float]) -> np.ndarray:
    state = zero_state(circuit.num_qubits)
    for i, gate in enumerate(circuit.gates):
        state = apply_gate(state, gate, _gate_angle(gate, angles, shifts, i))
    return state


def run_circuit(circuit: Circuit, angles: np.ndarray) -> np.ndarray:
    """Evolve the zero state through the whole circuit."""
    angles = np.asarray(angles, dtype=np.float64)
    if angles.shape != (circuit.num_slots,):
        raise ContractError(
            f"angles shape {angles.shape} does not match num_slots {circuit.num_slots}"
        )
    return _run(circuit, angles, {})


def apply_observable(state: np.ndarray, obs: Observable) -> np.ndarray:
    """Multiply by the diagonal of scale * sum Z + shift."""
    n = _num_qubits_of(state)
    return (obs.scale * zsum_diagonal(n) + obs.shift) * state


def expectation(state: np.ndarray, obs: Observable) -> float:
    """<state| scale * sum Z + shift |state> without materializing a matrix."""
    n = _num_qubits_of(state)
    probs = np.abs(state) ** 2
    return float(obs.scale * np.dot(probs, zsum_diagonal(n)) + obs.shift * probs.sum())


_PAULI_OF_ROTATION = {"rx": "x", "ry": "y", "rz": "z"}


def _apply_pauli(state: np.ndarray, pauli: str, qubit: int) -> np.ndarray:
    n = _num_qubits_of(state)
    shaped = state.reshape(2 ** (n - 1 - qubit), 2, 2**qubit)
    a0 = shaped[:, 0, :]
    a1 = shaped[:, 1, :]
    out = np.empty_like(shaped)
    if pauli == "x":
        out[:, 0, :] = a1
        out[:, 1, :] = a0
    elif pauli == "y":
        out[:, 0, :] = -1j * a1
        out[:, 1, :] = 1j * a0
    else:
        out[:, 0, :] = a0
        out[:, 1, :] = -a1
    return out.reshape(-1)


def adjoint_gradient(circuit: Circuit, angles: np.ndarray, obs: Observable):
    """Expectation value and its gradient for every angle slot.

    Returns ``(value, grads)`` with ``grads`` of shape ``(num_slots,)``. Each
    gate's contribution 2 Re <bra| (-i/2) P |ket> is accumulated into its
    slot, so slots shared by several gates come out already summed.
    """
    angles = np.asarray(angles, dtype=np.float64)
    if angles.shape != (circuit.num_slots,):
        raise ContractError(
            f"angles shape {angles.shape} does not match num_slots {circuit.num_slots}"
        )
    ket = run_circuit(circuit, angles)
    bra = apply_observable(ket, obs)
    value = float(np.real(np.vdot(ket, bra)))
    grads = np.zeros(circuit.num_slots, dtype=np.float64)
    for i in range(len(circuit.gates) - 1, -1, -1):
        gate = circuit.gates[i]
        if gate.kind == "cnot":
            # CNOT is its own inverse and carries no parameter.
            ket = apply_gate(ket, gate)
            bra = apply_gate(bra, gate)
            continue
        pauli = _PAULI_OF_ROTATION[gate.kind]
        # 2 Re <bra| (-i/2) P |ket_after_gate> = Im <bra| P |ket_after_gate>
        p_ket = _apply_pauli(ket, pauli, gate.target)
        grads[gate.angle_slot] += float(np.imag(np.vdot(bra, p_ket)))
        angle = float(angles[gate.angle_slot])
        ket = apply_gate(ket, gate, -angle)
        bra = apply_gate(bra, gate, -angle)
    return value, grads


def shift_rule_gradient(circuit: Circuit, angles: np.ndarray, obs: Observable, slot: int) -> float:
    """Two-point parameter-shift derivative of the expectation for one slot.

    Every gate occurrence of the slot is shifted individually by +-pi/2 and
    the half-differences are summed, which stays exact when the slot is
    re-used by several gates.
    """
    angles = np.asarray(angles, dtype=np.float64)
    if not 0 <= slot < circuit.num_slots:
        raise ContractError(f"slot {slot} out of range [0, {circuit.num_slots})")
    total = 0.0
    for i, gate in enumerate(circuit.gates):
        if gate.kind == "cnot" or gate.angle_slot != slot:
            continue
        for sign in (1.0, -1.0):
            state = _run(circuit, angles, {i: sign * np.pi / 2.0})
            total += sign * 0.5 * expectation(state, obs)
    return total
