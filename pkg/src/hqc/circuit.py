"""Circuit intermediate representation, parsing and the direct state-vector oracle.

A circuit is an ordered list of gates over ``n`` work qubits together with a
computational-basis input string.  Work qubit 0 is the output qubit.  The
supported gate kinds are chosen so that every backend of the compiler has a
gadget for them; general one-qubit unitaries are only accepted by the clock
backends that can absorb an arbitrary 2x2 matrix into a single term.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

UNITARITY_TOL = 1e-12

BACKENDS = ("f4", "s3", "q23", "q22")

ID2 = np.eye(2, dtype=complex)
PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)


class CircuitError(ValueError):
    """Invalid circuit structure or unparseable circuit text."""


@dataclass(frozen=True)
class Gate:
    """One gate record.

    kind is one of ``ID``, ``CNOT``, ``U1``, ``W``.  ``U1`` carries an
    arbitrary 2x2 unitary; ``W`` is a basis-rotated phase gate
    ``B (|0><0| + e^{i theta}|1><1|) B^dagger`` stored as ``(theta, basis)``
    so backends can recover the rotation basis for their control projectors.
    """

    kind: str
    qubits: tuple[int, ...]
    matrix: np.ndarray | None = None
    theta: float | None = None
    basis: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in ("ID", "CNOT", "U1", "W"):
            raise CircuitError(f"unknown gate kind {self.kind!r}")
        if self.kind == "CNOT":
            if len(self.qubits) != 2:
                raise CircuitError("CNOT takes exactly two qubits")
            if self.qubits[0] == self.qubits[1]:
                raise CircuitError("CNOT control and target must differ")
        elif len(self.qubits) != 1:
            raise CircuitError(f"{self.kind} takes exactly one qubit")
        if self.kind == "U1":
            _check_unitary(self.matrix, "U1 matrix")
        if self.kind == "W":
            if self.theta is None:
                raise CircuitError("W gate needs an angle")
            _check_unitary(self.basis, "W basis")

    @property
    def control(self) -> int:
        if self.kind != "CNOT":
            raise CircuitError("only CNOT has a control qubit")
        return self.qubits[0]

    @property
    def target(self) -> int:
        return self.qubits[-1]

    def unitary(self) -> np.ndarray:
        """The 2x2 (or 4x4 for CNOT) unitary this gate applies."""
        if self.kind == "ID":
            return ID2.copy()
        if self.kind == "U1":
            return self.matrix.copy()
        if self.kind == "W":
            b = self.basis
            return b @ np.diag([1.0, np.exp(1j * self.theta)]) @ b.conj().T
        cnot = np.eye(4, dtype=complex)
        cnot[2:, 2:] = PAULI_X
        return cnot


def _check_unitary(m: np.ndarray | None, what: str) -> None:
    if m is None or np.asarray(m).shape != (2, 2):
        raise CircuitError(f"{what} must be a 2x2 matrix")
    dev = np.max(np.abs(m.conj().T @ m - ID2))
    if dev > UNITARITY_TOL:
        raise CircuitError(f"{what} is not unitary (deviation {dev:.3g})")


def identity_gate(q: int) -> Gate:
    return Gate("ID", (q,))


def cnot_gate(control: int, target: int) -> Gate:
    return Gate("CNOT", (control, target))


def u1_gate(q: int, matrix: np.ndarray) -> Gate:
    return Gate("U1", (q,), matrix=np.asarray(matrix, dtype=complex))


def w_gate(q: int, theta: float, basis: np.ndarray | None = None) -> Gate:
    b = ID2.copy() if basis is None else np.asarray(basis, dtype=complex)
    return Gate("W", (q,), theta=float(theta), basis=b)


@dataclass(frozen=True)
class Circuit:
    """A gate list plus its computational-basis input.

    ``useful_length`` marks how many leading gates do real work; padding with
    trailing identities extends ``gates`` without touching it.
    """

    n: int
    gates: tuple[Gate, ...]
    input_bits: str
    useful_length: int = field(default=-1)

    def __post_init__(self):
        if self.n < 1:
            raise CircuitError("need at least one work qubit")
        if len(self.gates) < 1:
            raise CircuitError("need at least one gate")
        if len(self.input_bits) != self.n or set(self.input_bits) - {"0", "1"}:
            raise CircuitError(f"input must be a bit string of length {self.n}")
        for g in self.gates:
            if any(q < 0 or q >= self.n for q in g.qubits):
                raise CircuitError(f"gate {g.kind} qubit index out of range 0..{self.n - 1}")
        if self.useful_length == -1:
            object.__setattr__(self, "useful_length", len(self.gates))
        if not 1 <= self.useful_length <= len(self.gates):
            raise CircuitError("useful_length out of range")

    @property
    def length(self) -> int:
        return len(self.gates)

    def input_state(self) -> np.ndarray:
        """Dense work-register state for the input bit string (qubit 0 most significant)."""
        psi = np.zeros(2**self.n, dtype=complex)
        psi[int(self.input_bits, 2)] = 1.0
        return psi


def validate_for_backend(circuit: Circuit, backend: str) -> list[str]:
    """Return the list of reasons the circuit cannot be lowered on ``backend``.

    Empty list means ok.  The two-local backends only have gadgets for
    identity, CNOT and basis-rotated phase gates; a general one-qubit unitary
    is rejected there but fine on the clock backends.
    """
    if backend not in BACKENDS:
        raise CircuitError(f"unknown backend {backend!r}; expected one of {BACKENDS}")
    violations = []
    if backend in ("q23", "q22"):
        for i, g in enumerate(circuit.gates):
            if g.kind == "U1":
                violations.append(
                    f"gate {i + 1}: no 2-local gadget for general 1-qubit unitary on {backend}"
                )
    return violations


def pad_with_identities(circuit: Circuit, factor: int) -> Circuit:
    """Extend the circuit to ``factor * L`` gates with trailing identities on qubit 0.

    The original length is recorded as ``useful_length`` so the measurement
    protocol knows which clock stations certify completion.
    """
    if factor < 1:
        raise CircuitError("padding factor must be >= 1")
    pad = (factor - 1) * circuit.length
    gates = circuit.gates + tuple(identity_gate(0) for _ in range(pad))
    return replace(circuit, gates=gates, useful_length=circuit.useful_length)


def apply_gate(gate: Gate, psi: np.ndarray, n: int) -> np.ndarray:
    """Apply one gate to a dense work state (qubit 0 most significant)."""
    if psi.shape != (2**n,):
        raise CircuitError(f"state dimension {psi.shape} does not match {n} qubits")
    if gate.kind == "ID":
        return psi.copy()
    if gate.kind == "CNOT":
        c, t = gate.qubits
        out = psi.copy()
        axes = out.reshape((2,) * n)
        # flip target where control is 1
        sel = [slice(None)] * n
        sel[c] = 1
        block = axes[tuple(sel)]
        axes[tuple(sel)] = np.flip(block, axis=t if t < c else t - 1).copy()
        return out
    u = gate.unitary()
    q = gate.qubits[0]
    tensor = psi.reshape((2**q, 2, 2 ** (n - q - 1)))
    return np.einsum("ab,ibj->iaj", u, tensor).reshape(-1)


def apply_circuit_prefix(circuit: Circuit, t: int, psi: np.ndarray) -> np.ndarray:
    """Return ``U_t ... U_1 psi``; ``t = 0`` returns ``psi`` unchanged."""
    if not 0 <= t <= circuit.length:
        raise CircuitError(f"prefix length {t} out of range 0..{circuit.length}")
    out = np.asarray(psi, dtype=complex)
    for gate in circuit.gates[:t]:
        out = apply_gate(gate, out, circuit.n)
    return out


# ---------------------------------------------------------------------------
# circuit text format


def _format_floats(values) -> str:
    return " ".join(repr(float(v)) for v in values)


def _matrix_to_fields(m: np.ndarray) -> str:
    flat = m.reshape(-1)
    return _format_floats(x for entry in flat for x in (entry.real, entry.imag))


def _fields_to_matrix(fields: list[str], lineno: int) -> np.ndarray:
    if len(fields) != 8:
        raise CircuitError(f"line {lineno}: expected 8 floats (re,im row-major), got {len(fields)}")
    try:
        vals = [float(x) for x in fields]
    except ValueError as exc:
        raise CircuitError(f"line {lineno}: bad float ({exc})") from None
    re = vals[0::2]
    im = vals[1::2]
    return (np.array(re) + 1j * np.array(im)).reshape(2, 2)


def parse_circuit(text: str) -> Circuit:
    """Parse the line-oriented circuit format.

    Directives: ``qubits <n>``, ``input <bits>``, ``gate ID <q>``,
    ``gate CNOT <c> <t>``, ``gate U1 <q> <8 floats>``,
    ``gate W <q> <theta> <Z | 8 floats>``.  ``#`` starts a comment.
    Errors name the offending line.
    """
    n = None
    input_bits = None
    gates: list[Gate] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        head = fields[0].lower()
        try:
            if head == "qubits":
                if len(fields) != 2:
                    raise CircuitError("qubits takes one integer")
                n = int(fields[1])
            elif head == "input":
                if len(fields) != 2:
                    raise CircuitError("input takes one bit string")
                input_bits = fields[1]
            elif head == "gate":
                gates.append(_parse_gate(fields[1:], lineno))
            else:
                raise CircuitError(f"unknown directive {fields[0]!r}")
        except CircuitError as exc:
            msg = str(exc)
            if not msg.startswith("line "):
                msg = f"line {lineno}: {msg}"
            raise CircuitError(msg) from None
        except ValueError as exc:
            raise CircuitError(f"line {lineno}: {exc}") from None
    if n is None:
        raise CircuitError("missing 'qubits' directive")
    if input_bits is None:
        raise CircuitError("missing 'input' directive")
    try:
        return Circuit(n=n, gates=tuple(gates), input_bits=input_bits)
    except CircuitError as exc:
        raise CircuitError(str(exc)) from None


def _parse_gate(fields: list[str], lineno: int) -> Gate:
    if not fields:
        raise CircuitError("gate line needs a gate name")
    name = fields[0].upper()
    if name == "ID":
        if len(fields) != 2:
            raise CircuitError("gate ID takes one qubit index")
        return identity_gate(int(fields[1]))
    if name == "CNOT":
        if len(fields) != 3:
            raise CircuitError("gate CNOT takes control and target")
        return cnot_gate(int(fields[1]), int(fields[2]))
    if name == "U1":
        return u1_gate(int(fields[1]), _fields_to_matrix(fields[2:], lineno))
    if name == "W":
        if len(fields) < 3:
            raise CircuitError("gate W takes qubit, theta, then basis")
        q = int(fields[1])
        theta = float(fields[2])
        rest = fields[3:]
        if len(rest) == 1 and rest[0].upper() == "Z":
            return w_gate(q, theta)
        return w_gate(q, theta, _fields_to_matrix(rest, lineno))
    raise CircuitError(f"unknown gate {fields[0]!r}")


def serialize_circuit(circuit: Circuit) -> str:
    """Inverse of parse_circuit up to comments and whitespace."""
    lines = [f"qubits {circuit.n}", f"input {circuit.input_bits}"]
    for g in circuit.gates:
        if g.kind == "ID":
            lines.append(f"gate ID {g.qubits[0]}")
        elif g.kind == "CNOT":
            lines.append(f"gate CNOT {g.qubits[0]} {g.qubits[1]}")
        elif g.kind == "U1":
            lines.append(f"gate U1 {g.qubits[0]} {_matrix_to_fields(g.matrix)}")
        else:
            if np.array_equal(g.basis, ID2):
                lines.append(f"gate W {g.qubits[0]} {repr(g.theta)} Z")
            else:
                lines.append(f"gate W {g.qubits[0]} {repr(g.theta)} {_matrix_to_fields(g.basis)}")
    return "\n".join(lines) + "\n"


def circuits_equal(a: Circuit, b: Circuit, tol: float = 0.0) -> bool:
    """Structural equality; matrices compared entrywise within ``tol``."""
    if (a.n, a.input_bits, a.length, a.useful_length) != (b.n, b.input_bits, b.length, b.useful_length):
        return False
    for ga, gb in zip(a.gates, b.gates):
        if ga.kind != gb.kind or ga.qubits != gb.qubits:
            return False
        for ma, mb in ((ga.matrix, gb.matrix), (ga.basis, gb.basis)):
            if (ma is None) != (mb is None):
                return False
            if ma is not None and np.max(np.abs(ma - mb)) > tol:
                return False
        if (ga.theta is None) != (gb.theta is None):
            return False
        if ga.theta is not None and abs(ga.theta - gb.theta) > tol:
            return False
    return True


def switch_gate_count(circuit: Circuit, backend: str) -> int:
    """Number of gates that need a railroad-switch gadget on ``backend``."""
    if backend == "f4":
        return 0
    if backend == "s3":
        return sum(1 for g in circuit.gates if g.kind == "CNOT")
    return sum(1 for g in circuit.gates if g.kind in ("CNOT", "W"))
