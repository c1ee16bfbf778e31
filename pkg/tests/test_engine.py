"""Batched engine tests: both backends against the single-state simulator."""
import numpy as np
import pytest

from vqpinn import engine, qsim
from vqpinn.qsim import Circuit, Gate, Observable

from test_qsim import _random_circuit


def _gate_angle_rows(circuit, slot_angle_rows):
    cols = [g.angle_slot if g.angle_slot is not None else 0 for g in circuit.gates]
    return slot_angle_rows[:, cols]


BACKENDS = ["numpy"] + (["numba"] if engine._HAVE_NUMBA else [])


@pytest.fixture(params=BACKENDS)
def backend(request):
    previous = engine.get_backend()
    engine.set_backend(request.param)
    yield request.param
    engine.set_backend(previous)


def test_batch_values_match_reference(backend):
    rng = np.random.default_rng(41)
    for _ in range(15):
        circuit, _ = _random_circuit(rng)
        slot_rows = rng.uniform(0, 2 * np.pi, size=(6, circuit.num_slots))
        values = engine.batch_values(circuit, _gate_angle_rows(circuit, slot_rows))
        for row, value in zip(slot_rows, values):
            ref = qsim.expectation(qsim.run_circuit(circuit, row), Observable(1.0, 0.0))
            assert value == pytest.approx(ref, abs=1e-12)


def test_batch_grads_match_reference(backend):
    rng = np.random.default_rng(43)
    for _ in range(10):
        circuit, _ = _random_circuit(rng, shared_slots=True)
        slot_rows = rng.uniform(0, 2 * np.pi, size=(4, circuit.num_slots))
        values, grads = engine.batch_values_and_grads(circuit, _gate_angle_rows(circuit, slot_rows))
        for row, value, grad in zip(slot_rows, values, grads):
            ref_value, ref_grad = qsim.adjoint_gradient(circuit, row, Observable(1.0, 0.0))
            assert value == pytest.approx(ref_value, abs=1e-12)
            np.testing.assert_allclose(grad, ref_grad, atol=1e-11)


def test_per_gate_shifts_differ_from_slot_shifts():
    # shifting one occurrence of a shared slot is not the same as shifting the slot
    engine.set_backend("numpy")
    gates = (Gate("ry", 0, angle_slot=0), Gate("rx", 0, angle_slot=0))
    circuit = Circuit(1, gates, 1)
    base = np.array([[0.3, 0.3]])
    one_occurrence = np.array([[0.3 + np.pi / 2, 0.3]])
    both = np.array([[0.3 + np.pi / 2, 0.3 + np.pi / 2]])
    va = engine.batch_values(circuit, one_occurrence)[0]
    vb = engine.batch_values(circuit, both)[0]
    assert abs(va - vb) > 1e-3
    assert engine.batch_values(circuit, base)[0] == pytest.approx(
        qsim.expectation(qsim.run_circuit(circuit, [0.3]), Observable(1.0, 0.0)), abs=1e-12
    )


@pytest.mark.skipif(not engine._HAVE_NUMBA, reason="numba unavailable")
def test_backends_agree_closely():
    rng = np.random.default_rng(47)
    circuit, _ = _random_circuit(rng, num_qubits=4, num_gates=30, shared_slots=True)
    slot_rows = rng.uniform(0, 2 * np.pi, size=(8, circuit.num_slots))
    rows = _gate_angle_rows(circuit, slot_rows)
    engine.set_backend("numpy")
    v_np, g_np = engine.batch_values_and_grads(circuit, rows)
    engine.set_backend("numba")
    v_nb, g_nb = engine.batch_values_and_grads(circuit, rows)
    np.testing.assert_allclose(v_np, v_nb, atol=1e-12)
    np.testing.assert_allclose(g_np, g_nb, atol=1e-11)


def test_engine_determinism(backend):
    rng = np.random.default_rng(53)
    circuit, _ = _random_circuit(rng, num_qubits=3, num_gates=20)
    rows = _gate_angle_rows(circuit, rng.uniform(0, 2 * np.pi, size=(5, circuit.num_slots)))
    va, ga = engine.batch_values_and_grads(circuit, rows)
    vb, gb = engine.batch_values_and_grads(circuit, rows)
    assert np.array_equal(va, vb)
    assert np.array_equal(ga, gb)


def test_bad_shape_rejected(backend):
    circuit = Circuit(1, (Gate("ry", 0, angle_slot=0),), 1)
    with pytest.raises(Exception):
        engine.batch_values(circuit, np.zeros((3, 2)))
