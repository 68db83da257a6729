from __future__ import annotations

import numpy as np
import pytest

from hqc.circuit import (
    Circuit,
    CircuitError,
    apply_circuit_prefix,
    circuits_equal,
    cnot_gate,
    identity_gate,
    pad_with_identities,
    parse_circuit,
    serialize_circuit,
    u1_gate,
    validate_for_backend,
    w_gate,
)
from conftest import random_unitary2, suite_circuits


def test_parse_minimal_cnot():
    c = parse_circuit("qubits 2\ninput 11\ngate CNOT 0 1\n")
    assert c.n == 2
    assert c.length == 1
    assert c.gates[0].kind == "CNOT"
    assert c.gates[0].qubits == (0, 1)
    assert c.input_bits == "11"


def test_parse_comments_and_identity_u1():
    text = "# header\nqubits 1\ninput 0\ngate U1 0 1 0 0 0 0 0 1 0  # identity\n"
    c = parse_circuit(text)
    assert c.gates[0].kind == "U1"
    assert np.allclose(c.gates[0].matrix, np.eye(2))


def test_parse_cnot_control_equals_target_names_line():
    with pytest.raises(CircuitError, match="line 3"):
        parse_circuit("qubits 2\ninput 00\ngate CNOT 0 0\n")


def test_parse_qubit_out_of_range():
    with pytest.raises(CircuitError, match="out of range"):
        parse_circuit("qubits 2\ninput 00\ngate ID 5\n")


def test_parse_non_unitary_rejected():
    floats = "1 0 0 0 0 0 2 0"  # diag(1, 2)
    with pytest.raises(CircuitError, match="unitary"):
        parse_circuit(f"qubits 1\ninput 0\ngate U1 0 {floats}\n")


def test_parse_bad_float_names_line():
    with pytest.raises(CircuitError, match="line 3"):
        parse_circuit("qubits 1\ninput 0\ngate W 0 notafloat Z\n")


def test_parse_w_with_z_keyword():
    c = parse_circuit("qubits 1\ninput 0\ngate W 0 3.14159 Z\n")
    g = c.gates[0]
    assert g.kind == "W"
    assert np.allclose(g.basis, np.eye(2))


def test_roundtrip_identical():
    rng = np.random.default_rng(3)
    for circuit in suite_circuits(8, seed=11):
        text = serialize_circuit(circuit)
        again = parse_circuit(text)
        assert circuits_equal(circuit, again)
        assert serialize_circuit(again) == text
    # include a U1 gate, which the suite generator leaves out
    c = Circuit(n=2, gates=(u1_gate(1, random_unitary2(rng)),), input_bits="01")
    assert circuits_equal(c, parse_circuit(serialize_circuit(c)))


def test_validate_backends():
    had = u1_gate(0, np.array([[1, 1], [1, -1]]) / np.sqrt(2))
    c = Circuit(n=2, gates=(had,), input_bits="00")
    assert validate_for_backend(c, "f4") == []
    assert validate_for_backend(c, "s3") == []
    assert any("no 2-local gadget" in v for v in validate_for_backend(c, "q22"))
    assert any("no 2-local gadget" in v for v in validate_for_backend(c, "q23"))

    cnot_only = Circuit(n=2, gates=(cnot_gate(1, 0),), input_bits="10")
    w_only = Circuit(n=1, gates=(w_gate(0, np.pi / 4),), input_bits="1")
    for backend in ("f4", "s3", "q23", "q22"):
        assert validate_for_backend(cnot_only, backend) == []
        assert validate_for_backend(w_only, backend) == []


def test_validate_unknown_backend():
    c = Circuit(n=1, gates=(identity_gate(0),), input_bits="0")
    with pytest.raises(CircuitError):
        validate_for_backend(c, "q99")


@pytest.mark.parametrize("length,factor,expected", [(3, 5, 15), (1, 1, 1), (2, 6, 12)])
def test_pad_with_identities(length, factor, expected):
    c = Circuit(n=1, gates=tuple(w_gate(0, 0.1) for _ in range(length)), input_bits="0")
    padded = pad_with_identities(c, factor)
    assert padded.length == expected
    assert padded.useful_length == length
    assert padded.gates[:length] == c.gates
    assert all(g.kind == "ID" for g in padded.gates[length:])


def test_pad_factor_must_be_positive():
    c = Circuit(n=1, gates=(identity_gate(0),), input_bits="0")
    with pytest.raises(CircuitError):
        pad_with_identities(c, 0)


def test_cnot_truth_table():
    c = Circuit(n=2, gates=(cnot_gate(0, 1),), input_bits="11")
    out = apply_circuit_prefix(c, 1, c.input_state())
    expect = np.zeros(4)
    expect[int("10", 2)] = 1.0
    assert np.allclose(out, expect)


def test_cnot_reversed_orientation():
    c = Circuit(n=2, gates=(cnot_gate(1, 0),), input_bits="01")
    out = apply_circuit_prefix(c, 1, c.input_state())
    expect = np.zeros(4)
    expect[int("11", 2)] = 1.0
    assert np.allclose(out, expect)


def test_prefix_t0_is_identity():
    c = Circuit(n=2, gates=(cnot_gate(0, 1),), input_bits="10")
    psi = np.array([0.5, 0.5, 0.5, 0.5], dtype=complex)
    assert np.array_equal(apply_circuit_prefix(c, 0, psi), psi)


def test_w_at_pi_is_z():
    c = Circuit(n=1, gates=(w_gate(0, np.pi),), input_bits="0")
    plus = np.array([1.0, 1.0], dtype=complex) / np.sqrt(2)
    out = apply_circuit_prefix(c, 1, plus)
    minus = np.array([1.0, -1.0], dtype=complex) / np.sqrt(2)
    assert np.max(np.abs(out - minus)) < 1e-12


def test_prefix_composes_gate_by_gate():
    for circuit in suite_circuits(10, seed=5):
        psi = circuit.input_state()
        full = apply_circuit_prefix(circuit, circuit.length, psi)
        acc = psi
        for t in range(circuit.length):
            tail = Circuit(n=circuit.n, gates=(circuit.gates[t],), input_bits=circuit.input_bits)
            acc = apply_circuit_prefix(tail, 1, acc)
        assert np.max(np.abs(acc - full)) < 1e-10


def test_prefix_preserves_norm():
    for circuit in suite_circuits(10, seed=9):
        for t in range(circuit.length + 1):
            out = apply_circuit_prefix(circuit, t, circuit.input_state())
            assert abs(np.linalg.norm(out) - 1.0) < 1e-12


def test_dimension_mismatch():
    c = Circuit(n=2, gates=(cnot_gate(0, 1),), input_bits="00")
    with pytest.raises(CircuitError):
        apply_circuit_prefix(c, 1, np.zeros(2, dtype=complex))
