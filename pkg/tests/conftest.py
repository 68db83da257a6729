from __future__ import annotations

import numpy as np
import pytest

from hqc.circuit import Circuit, cnot_gate, identity_gate, w_gate


def random_unitary2(rng: np.random.Generator) -> np.ndarray:
    m = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    q, r = np.linalg.qr(m)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_suite_circuit(rng: np.random.Generator) -> Circuit:
    """One random circuit: n <= 3, L <= 5, at most 2 switch gadgets.

    Gate kinds are restricted to the set every backend accepts, so the same
    circuit exercises all four compilations.
    """
    n = int(rng.integers(1, 4))
    length = int(rng.integers(1, 6))
    gates = []
    gadgets = 0
    for _ in range(length):
        choices = ["ID"]
        if gadgets < 2:
            choices.append("W")
            if n >= 2:
                choices.append("CNOT")
        kind = choices[int(rng.integers(0, len(choices)))]
        if kind == "ID":
            gates.append(identity_gate(int(rng.integers(0, n))))
        elif kind == "W":
            basis = random_unitary2(rng) if rng.random() < 0.5 else None
            gates.append(w_gate(int(rng.integers(0, n)), float(rng.uniform(0, 2 * np.pi)), basis))
            gadgets += 1
        else:
            c, t = rng.choice(n, size=2, replace=False)
            gates.append(cnot_gate(int(c), int(t)))
            gadgets += 1
    bits = "".join(str(int(b)) for b in rng.integers(0, 2, size=n))
    return Circuit(n=n, gates=tuple(gates), input_bits=bits)


def suite_circuits(count: int, seed: int = 20260810) -> list[Circuit]:
    rng = np.random.default_rng(seed)
    return [random_suite_circuit(rng) for _ in range(count)]


@pytest.fixture(scope="session")
def cnot_circuit() -> Circuit:
    return Circuit(n=2, gates=(cnot_gate(0, 1),), input_bits="11")


@pytest.fixture(scope="session")
def ladder_circuit() -> Circuit:
    """The fixed two-qubit, two-gate circuit used by the locality checks."""
    return Circuit(n=2, gates=(cnot_gate(0, 1), w_gate(1, np.pi / 4)), input_bits="11")


@pytest.fixture(scope="session")
def small_suite() -> list[Circuit]:
    return suite_circuits(12, seed=7)
