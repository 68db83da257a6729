from __future__ import annotations

import numpy as np
import pytest

from hqc.circuit import Circuit, cnot_gate, identity_gate, u1_gate, w_gate
from hqc.compiler import (
    ClockMap,
    CompileError,
    compile_circuit,
    compile_feynman4,
    compile_qubit2,
    compile_qutrit2,
    compile_switch3,
    expected_counts,
)
from hqc.model import audit
from conftest import suite_circuits

X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)


def test_f4_identity_circuit_pure_clock_hops():
    c = Circuit(n=1, gates=(identity_gate(0), identity_gate(0)), input_bits="0")
    comp = compile_feynman4(c)
    assert len(comp.register) == 4
    assert len(comp.hamiltonian) == 2
    assert all(t.arity == 2 for t in comp.hamiltonian.terms)


def test_f4_cnot_single_arity4_term(cnot_circuit):
    comp = compile_feynman4(cnot_circuit)
    assert len(comp.register) == 4
    assert len(comp.hamiltonian) == 1
    assert comp.hamiltonian.terms[0].arity == 4


def test_f4_one_qubit_gates_arity3():
    c = Circuit(n=2, gates=(w_gate(1, 0.3), u1_gate(0, np.eye(2))), input_bits="00")
    comp = compile_feynman4(c)
    assert [t.arity for t in comp.hamiltonian.terms] == [3, 3]


def test_s3_cnot_structure(cnot_circuit):
    comp = compile_switch3(cnot_circuit)
    assert len(comp.register) == 2 + 2 + 4
    assert len(comp.hamiltonian) == 6
    assert max(t.arity for t in comp.hamiltonian.terms) == 3
    tags = {t.tag for t in comp.hamiltonian.terms}
    assert {"sw:t=1:upper:in", "sw:t=1:upper:X", "sw:t=1:upper:out",
            "sw:t=1:lower:in", "sw:t=1:lower:hop", "sw:t=1:lower:out"} == tags


def test_s3_one_qubit_gate_same_as_f4():
    c = Circuit(n=1, gates=(w_gate(0, 1.1),), input_bits="1")
    t_s3 = compile_switch3(c).hamiltonian.terms[0]
    t_f4 = compile_feynman4(c).hamiltonian.terms[0]
    assert t_s3.sites == t_f4.sites
    assert np.array_equal(t_s3.matrix, t_f4.matrix)


def test_q23_cnot_structure(cnot_circuit):
    comp = compile_qutrit2(cnot_circuit)
    qutrits = [s for s in comp.register.sites if s.dim == 3]
    stations = [s for s in comp.register.sites if s.role == "station"]
    gadget_qubits = [s for s in comp.register.sites if s.role == "gadget-qubit"]
    assert len(stations) == 2
    assert len(qutrits) == 6
    assert len(gadget_qubits) == 4
    assert len(comp.hamiltonian) == 18
    assert max(t.arity for t in comp.hamiltonian.terms) == 2
    upper = [t for t in comp.hamiltonian.terms if t.tag.startswith("H23u")]
    lower = [t for t in comp.hamiltonian.terms if t.tag.startswith("H23l")]
    assert len(upper) == len(lower) == 9


def test_q23_gadget_has_eight_path_stops(cnot_circuit):
    comp = compile_qutrit2(cnot_circuit)
    gadget_labels = [s.label for s in comp.clock_map.stops if s.kind == "gadget"]
    assert gadget_labels == [f"g1:{x}" for x in ("1A", "1B", "2", "3A", "3B", "4", "5A", "5B")]
    assert [b.label for b in comp.clock_map.blind_alleys] == ["g1:1x", "g1:5x"]


def test_q23_lower_middle_has_no_work_factor(cnot_circuit):
    comp = compile_qutrit2(cnot_circuit)
    lower_mid = [t for t in comp.hamiltonian.terms if t.tag == "H23l:t=1:hop(l3A→l3B)"]
    assert len(lower_mid) == 1
    assert lower_mid[0].arity == 1
    hop = np.zeros((3, 3), dtype=complex)
    hop[1, 2] = hop[2, 1] = 1.0
    assert np.array_equal(lower_mid[0].matrix, hop)
    upper_mid = [t for t in comp.hamiltonian.terms if t.tag == "H23u:t=1:X(u3A→u3B)"]
    assert len(upper_mid) == 1
    assert upper_mid[0].arity == 2


def test_q23_w_phase_on_upper_track_only():
    theta = 0.77
    c = Circuit(n=1, gates=(w_gate(0, theta),), input_bits="0")
    comp = compile_qutrit2(c)
    up = next(t for t in comp.hamiltonian.terms if "phase(u3A→u3B)" in t.tag)
    lo = next(t for t in comp.hamiltonian.terms if "phase(l3A→l3B)" in t.tag)
    assert up.matrix[2, 1] == pytest.approx(np.exp(1j * theta))
    assert lo.matrix[2, 1] == pytest.approx(1.0)


def test_q23_rejects_general_unitary():
    c = Circuit(n=1, gates=(u1_gate(0, np.array([[1, 1], [1, -1]]) / np.sqrt(2)),), input_bits="0")
    with pytest.raises(CompileError):
        compile_qutrit2(c)


def test_q23_w_extension_flag():
    c = Circuit(n=1, gates=(w_gate(0, 0.5),), input_bits="0")
    compile_qutrit2(c, allow_w=True)
    with pytest.raises(CompileError):
        compile_qutrit2(c, allow_w=False)


def test_q22_all_terms_arity2(ladder_circuit):
    comp = compile_qubit2(ladder_circuit)
    assert all(t.arity <= 2 for t in comp.hamiltonian.terms)
    assert audit(comp.hamiltonian)["max_arity"] == 2
    assert all(s.dim == 2 for s in comp.register.sites)


def test_q22_boundary_hops_carry_sqrt_half(cnot_circuit):
    comp = compile_qubit2(cnot_circuit)
    entry = [t for t in comp.hamiltonian.terms if t.tag.startswith("H22u:t=1:hop(c0→u1A)")]
    assert len(entry) == 2
    for t in entry:
        nz = np.abs(t.matrix[np.nonzero(t.matrix)])
        assert np.allclose(nz, 1 / np.sqrt(2))


def test_q22_entangled_transition_annihilates_00_and_11():
    # (Z1 - Z2)/2 (x) V kills |00>|phi> and |11>|phi> and swaps |+> <-> |->
    half = 0.5 * (np.kron(Z, np.kron(np.eye(2), X)) - np.kron(np.eye(2), np.kron(Z, X)))
    for bits in ((0, 0), (1, 1)):
        for phi_bit in (0, 1):
            v = np.zeros(8)
            v[bits[0] * 4 + bits[1] * 2 + phi_bit] = 1.0
            assert np.allclose(half @ v, 0.0)
    plus = np.zeros(8)
    plus[0 * 4 + 1 * 2 + 1] = 1 / np.sqrt(2)  # |01>|1>
    plus[1 * 4 + 0 * 2 + 1] = 1 / np.sqrt(2)  # |10>|1>
    out = half @ plus
    minus_x = np.zeros(8)
    minus_x[0 * 4 + 1 * 2 + 0] = 1 / np.sqrt(2)
    minus_x[1 * 4 + 0 * 2 + 0] = -1 / np.sqrt(2)
    assert np.allclose(out, minus_x)


def test_q22_w_uses_pulse_middle():
    theta = 1.3
    c = Circuit(n=1, gates=(w_gate(0, theta),), input_bits="1")
    comp = compile_qubit2(c)
    labels = [s.label for s in comp.register.sites]
    assert "u3A@g1" in labels and "u3B@g1" in labels
    assert "u3@g1" not in labels
    wterm = next(t for t in comp.hamiltonian.terms if t.tag == "H22u:t=1:phase(u3A→u3B)")
    assert wterm.matrix[1, 2] == pytest.approx(np.exp(1j * theta))
    lterm = next(t for t in comp.hamiltonian.terms if t.tag == "H22l:t=1:hop(l3A→l3B)")
    assert lterm.matrix[1, 2] == pytest.approx(1.0)


def test_identity_gates_compile_to_bare_hops_everywhere():
    c = Circuit(n=3, gates=(identity_gate(2),), input_bits="000")
    for backend in ("f4", "s3", "q23", "q22"):
        comp = compile_circuit(c, backend)
        assert len(comp.hamiltonian) == 1
        assert comp.hamiltonian.terms[0].arity == 2


def test_counts_match_formulas(small_suite):
    for circuit in small_suite:
        for backend in ("f4", "s3", "q23", "q22"):
            comp = compile_circuit(circuit, backend)
            want = expected_counts(circuit, backend)
            assert len(comp.register) == want["sites"], (backend, circuit)
            assert len(comp.hamiltonian) == want["terms"], (backend, circuit)


def test_term_norms_and_coefficients(small_suite):
    # every term is constant norm; pure hop terms carry only the fixed
    # coefficient set (gate unitaries and rotated projectors are arbitrary)
    for circuit in small_suite[:6]:
        for backend in ("f4", "s3", "q23", "q22"):
            comp = compile_circuit(circuit, backend)
            for term in comp.hamiltonian.terms:
                assert term.norm() <= 2.0 + 1e-12
                if ":hop(" in term.tag or ":phase(" in term.tag or ":X(" in term.tag:
                    mags = np.abs(term.matrix[np.nonzero(term.matrix)])
                    assert np.all(
                        np.isclose(mags, 1.0) | np.isclose(mags, 0.5)
                        | np.isclose(mags, 1 / np.sqrt(2))
                    ), term.tag


def test_clock_map_roundtrip(cnot_circuit):
    for backend in ("s3", "q23", "q22"):
        comp = compile_circuit(cnot_circuit, backend)
        data = comp.clock_map.to_dict(comp.register)
        again = ClockMap.from_dict(data, comp.register)
        assert again.useful_length == comp.clock_map.useful_length
        assert [s.label for s in again.stops] == [s.label for s in comp.clock_map.stops]
        for a, b in zip(again.stops, comp.clock_map.stops):
            assert a.branch0 == b.branch0
            assert a.branch1 == b.branch1
            assert a.configs == b.configs


def test_clock_map_station_labels(cnot_circuit):
    from hqc.circuit import pad_with_identities

    padded = pad_with_identities(cnot_circuit, 3)
    comp = compile_circuit(padded, "f4")
    assert comp.clock_map.useful_length == 1
    assert comp.clock_map.station_labels() == [f"t={t}" for t in range(4)]
    assert comp.clock_map.station_labels(past_useful=True) == ["t=2", "t=3"]


def test_entangled_configs_are_two_term_superpositions(cnot_circuit):
    comp = compile_qubit2(cnot_circuit)
    stop = next(s for s in comp.clock_map.stops if s.label == "g1:1A")
    assert len(stop.branch1) == 2
    amps = sorted(amp.real for _, amp in stop.branch1)
    assert np.allclose(amps, [1 / np.sqrt(2)] * 2)
    stop_b = next(s for s in comp.clock_map.stops if s.label == "g1:1B")
    amps_b = sorted(amp.real for _, amp in stop_b.branch1)
    assert np.allclose(amps_b, [-1 / np.sqrt(2), 1 / np.sqrt(2)])
