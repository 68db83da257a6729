"""Computational-subspace basis, invariance checks and the restricted walk.

Basis vectors are kept sparse: a dense work-register factor attached to a
handful of clock configurations.  The projector onto the subspace is never
materialized; residuals and matrix elements are computed configuration by
configuration, which keeps instances with dozens of clock sites (full
dimension far beyond anything dense) cheap to verify.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .circuit import Circuit, apply_circuit_prefix, apply_gate
from .compiler import ClockStop, CompiledHamiltonian, _branch_work_op, _master_and_projectors
from .model import DimensionGuardError, SiteRegister, Term, TermList

CLOSURE_TOL = 1e-10


class SubspaceError(ValueError):
    """Register mismatch or malformed basis request."""


# ---------------------------------------------------------------------------
# sparse states: {clock index -> dense work vector}


class ClockIndexer:
    """Mixed-radix indexing over the clock sites (everything after the work block)."""

    def __init__(self, register: SiteRegister):
        self.register = register
        self.n_work = register.n_work
        if any(register[i].role != "work" for i in range(self.n_work)):
            raise SubspaceError("work sites must occupy ids 0..n-1")
        self.clock_dims = register.dims[self.n_work:]
        strides = [1] * len(self.clock_dims)
        for i in range(len(self.clock_dims) - 2, -1, -1):
            strides[i] = strides[i + 1] * self.clock_dims[i + 1]
        self.clock_strides = tuple(strides)
        self.work_dim = 2**self.n_work

    def index_of(self, assignment: dict[int, int]) -> int:
        idx = 0
        for site_id, value in assignment.items():
            if site_id < self.n_work:
                raise SubspaceError("clock configuration touches a work site")
            idx += value * self.clock_strides[site_id - self.n_work]
        return idx

    def digit(self, clock_idx: int, site_id: int) -> int:
        k = site_id - self.n_work
        return (clock_idx // self.clock_strides[k]) % self.clock_dims[k]


def _sparse_inner(a: dict, b: dict) -> complex:
    out = 0.0 + 0.0j
    small, large = (a, b) if len(a) <= len(b) else (b, a)
    for key, wv in small.items():
        other = large.get(key)
        if other is not None:
            out += np.vdot(wv, other) if small is a else np.vdot(other, wv)
    return complex(out)


def _sparse_norm2(a: dict) -> float:
    return float(sum(np.vdot(wv, wv).real for wv in a.values()))


def _sparse_add(accum: dict, key: int, vec: np.ndarray) -> None:
    if key in accum:
        accum[key] = accum[key] + vec
    else:
        accum[key] = vec.copy()


def _apply_work_block(block: np.ndarray, work_sites: tuple[int, ...], wv: np.ndarray,
                      n_work: int) -> np.ndarray:
    """Apply a small operator over specific work qubits of a dense work vector."""
    if not work_sites:
        return block[0, 0] * wv
    k = len(work_sites)
    tensor = wv.reshape((2,) * n_work)
    op = block.reshape((2,) * (2 * k))
    moved = np.tensordot(op, tensor, axes=(list(range(k, 2 * k)), list(work_sites)))
    return np.moveaxis(moved, list(range(k)), list(work_sites)).reshape(-1)


def apply_terms_sparse(hamiltonian: TermList, parts: dict, indexer: ClockIndexer) -> dict:
    """H @ v for a sparse state, term by term, never leaving the sparse form."""
    n_work = indexer.n_work
    out: dict[int, np.ndarray] = {}
    for term in hamiltonian.terms:
        work_sites = tuple(s for s in term.sites if s < n_work)
        clock_sites = tuple(s for s in term.sites if s >= n_work)
        w_dim = 2 ** len(work_sites)
        c_dims = tuple(indexer.register.dims[s] for s in clock_sites)
        c_dim = int(np.prod(c_dims)) if c_dims else 1
        mat = term.matrix.reshape(w_dim, c_dim, w_dim, c_dim)
        for clock_idx, wv in parts.items():
            if clock_sites:
                digits = tuple(indexer.digit(clock_idx, s) for s in clock_sites)
                ic = int(np.ravel_multi_index(digits, c_dims))
            else:
                digits, ic = (), 0
            for oc in range(c_dim):
                block = mat[:, oc, :, ic]
                if not block.any():
                    continue
                if clock_sites:
                    out_digits = np.unravel_index(oc, c_dims)
                    delta = sum(
                        (int(od) - int(idg)) * indexer.clock_strides[s - n_work]
                        for s, od, idg in zip(clock_sites, out_digits, digits)
                    )
                else:
                    delta = 0
                _sparse_add(out, clock_idx + delta,
                            _apply_work_block(block, work_sites, wv, n_work))
    return out


# ---------------------------------------------------------------------------
# basis construction


@dataclass
class BasisVector:
    label: str
    kind: str  # station | gadget | blind
    t: int | None
    parts: dict[int, np.ndarray] = field(repr=False, default_factory=dict)

    def norm(self) -> float:
        return float(np.sqrt(_sparse_norm2(self.parts)))


@dataclass
class SubspaceBasis:
    register: SiteRegister
    indexer: ClockIndexer
    vectors: list[BasisVector]

    def __len__(self) -> int:
        return len(self.vectors)

    @property
    def labels(self) -> list[str]:
        return [v.label for v in self.vectors]

    def index(self, label: str) -> int:
        for i, v in enumerate(self.vectors):
            if v.label == label:
                return i
        raise SubspaceError(f"no basis vector labelled {label!r}")

    def gram(self) -> np.ndarray:
        g = np.empty((len(self), len(self)), dtype=complex)
        for i, vi in enumerate(self.vectors):
            for j, vj in enumerate(self.vectors):
                g[i, j] = _sparse_inner(vi.parts, vj.parts)
        return g

    def to_dense(self, i: int, guard: int = 2**22) -> np.ndarray:
        """Full-space column of basis vector ``i`` (small instances only)."""
        if self.register.dim > guard:
            raise DimensionGuardError(f"dimension {self.register.dim} exceeds {guard}")
        clock_dim = self.register.dim // self.indexer.work_dim
        psi = np.zeros(self.register.dim, dtype=complex)
        for clock_idx, wv in self.vectors[i].parts.items():
            psi[clock_idx::clock_dim] += wv  # work index is most significant
        return psi


def _configs_state(configs, work_vec: np.ndarray, indexer: ClockIndexer, accum: dict) -> None:
    for assignment, amp in configs:
        _sparse_add(accum, indexer.index_of(assignment), amp * work_vec)


def _gate_phase(gate) -> complex:
    """Phase the middle transition applies on the branch-1 component."""
    if gate.kind == "W":
        return np.exp(1j * gate.theta)
    return 1.0 + 0.0j


def _project_branch(gate, phi: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    master, p_lo, p_up = _master_and_projectors(gate)
    lo = _apply_work_block(p_lo, (master,), phi, n)
    up = _apply_work_block(p_up, (master,), phi, n)
    return lo, up


def build_computational_basis(compiled: CompiledHamiltonian,
                              input_state: np.ndarray | None = None) -> SubspaceBasis:
    """History states plus gadget intermediaries and blind alleys.

    Representative phases follow a running convention: after each basis-phase
    gate the downstream representatives absorb e^{-i theta}, so the restricted
    matrix shows the phase exactly once, on the hop that applies it.  The
    spanned subspace is unchanged by this choice.
    """
    circuit = compiled.circuit
    indexer = ClockIndexer(compiled.register)
    n = circuit.n
    phi = circuit.input_state() if input_state is None else np.asarray(input_state, dtype=complex)
    if phi.shape != (2**n,):
        raise SubspaceError(f"input state dimension {phi.shape} != {2**n}")

    # work-register prefix states and accumulated representative phases
    prefixes = [phi]
    for gate in circuit.gates:
        prefixes.append(apply_gate(gate, prefixes[-1], n))
    gamma = [1.0 + 0.0j]
    for gate in circuit.gates:
        gamma.append(gamma[-1] * np.conj(_gate_phase(gate)))

    def gadget_vector(stop: ClockStop) -> BasisVector:
        gate = circuit.gates[stop.gate - 1]
        lo, up = _project_branch(gate, prefixes[stop.gate - 1], n)
        pre = gamma[stop.gate - 1]
        if stop.applied:
            op = _branch_work_op(gate)
            if op is not None:
                up = _apply_work_block(op, (gate.target,), up, n)
            lo = np.conj(_gate_phase(gate)) * lo  # e^{-i theta}; branch-1 phase cancels
        parts: dict[int, np.ndarray] = {}
        _configs_state(stop.branch0, pre * lo, indexer, parts)
        _configs_state(stop.branch1, pre * up, indexer, parts)
        return BasisVector(label=stop.label, kind=stop.kind, t=None, parts=parts)

    vectors: list[BasisVector] = []
    for stop in compiled.clock_map.stops:
        if stop.kind == "station":
            parts: dict[int, np.ndarray] = {}
            _configs_state(stop.configs, gamma[stop.t] * prefixes[stop.t], indexer, parts)
            vectors.append(BasisVector(label=stop.label, kind="station", t=stop.t, parts=parts))
        else:
            vectors.append(gadget_vector(stop))
    for stop in compiled.clock_map.blind_alleys:
        vectors.append(gadget_vector(stop))
    return SubspaceBasis(register=compiled.register, indexer=indexer, vectors=vectors)


# ---------------------------------------------------------------------------
# invariance and restriction


def _config_key_index(basis: SubspaceBasis) -> dict[int, list[int]]:
    lookup: dict[int, list[int]] = {}
    for i, v in enumerate(basis.vectors):
        for key in v.parts:
            lookup.setdefault(key, []).append(i)
    return lookup


def verify_invariance(hamiltonian: TermList, basis: SubspaceBasis) -> float:
    """max over basis vectors of ||(I - P) H v|| with P applied sparsely."""
    if hamiltonian.register is not basis.register and \
            hamiltonian.register.dims != basis.register.dims:
        raise SubspaceError("Hamiltonian and basis registers differ")
    lookup = _config_key_index(basis)
    worst = 0.0
    for v in basis.vectors:
        hv = apply_terms_sparse(hamiltonian, v.parts, basis.indexer)
        candidates = sorted({i for key in hv for i in lookup.get(key, ())})
        for i in candidates:
            u = basis.vectors[i].parts
            coeff = _sparse_inner(u, hv)
            for key, wv in u.items():
                _sparse_add(hv, key, -coeff * wv)
        worst = max(worst, np.sqrt(max(_sparse_norm2(hv), 0.0)))
    return float(worst)


@dataclass
class RestrictedWalk:
    labels: list[str]
    matrix: np.ndarray
    residual: float
    closed: bool

    def station_indices(self, basis: SubspaceBasis, past: int | None = None) -> list[int]:
        out = []
        for i, v in enumerate(basis.vectors):
            if v.kind == "station" and (past is None or v.t > past):
                out.append(i)
        return out


def restrict_hamiltonian(hamiltonian: TermList, basis: SubspaceBasis) -> RestrictedWalk:
    """Matrix of H in the given basis: M[i, j] = <v_i | H | v_j>."""
    residual = verify_invariance(hamiltonian, basis)
    lookup = _config_key_index(basis)
    size = len(basis)
    m = np.zeros((size, size), dtype=complex)
    for j, vj in enumerate(basis.vectors):
        hv = apply_terms_sparse(hamiltonian, vj.parts, basis.indexer)
        candidates = sorted({i for key in hv for i in lookup.get(key, ())})
        for i in candidates:
            m[i, j] = _sparse_inner(basis.vectors[i].parts, hv)
    return RestrictedWalk(labels=basis.labels, matrix=m,
                          residual=residual, closed=residual <= CLOSURE_TOL)


def expected_walk_graph(circuit: Circuit, backend: str) -> tuple[list[str], np.ndarray]:
    """Adjacency pattern the restriction must reproduce.

    A path over stations, refined per gate: the three-local switch inserts
    two stops per CNOT, the two-local switches the eight-stop comb with two
    pendant blind alleys.  Basis-phase gates mark exactly one forward edge
    with e^{i theta}: the whole station hop on the clock backends, the
    middle stop hop inside the switch backends.
    """
    from .circuit import BACKENDS

    if backend not in BACKENDS:
        raise SubspaceError(f"unknown backend {backend!r}")
    path_labels = ["t=0"]
    forward: list[complex] = []  # weight of edge path[k] -> path[k+1]
    pendants: list[tuple[str, str]] = []  # (blind label, attached path label)
    for t, gate in enumerate(circuit.gates, start=1):
        gadget = (backend == "s3" and gate.kind == "CNOT") or \
                 (backend in ("q23", "q22") and gate.kind in ("CNOT", "W"))
        phase = np.exp(1j * gate.theta) if gate.kind == "W" else 1.0
        if not gadget:
            path_labels.append(f"t={t}")
            forward.append(phase if backend in ("f4", "s3") else 1.0)
            continue
        if backend == "s3":
            path_labels += [f"g{t}:1", f"g{t}:2", f"t={t}"]
            forward += [1.0, 1.0, 1.0]
            continue
        stop_names = ("1A", "1B", "2", "3A", "3B", "4", "5A", "5B")
        path_labels += [f"g{t}:{s}" for s in stop_names] + [f"t={t}"]
        forward += [1.0, 1.0, 1.0, 1.0, phase, 1.0, 1.0, 1.0, 1.0]
        pendants.append((f"g{t}:1x", f"t={t - 1}"))
        pendants.append((f"g{t}:5x", f"t={t}"))
    labels = path_labels + [p[0] for p in pendants]
    pos = {lbl: i for i, lbl in enumerate(labels)}
    m = np.zeros((len(labels), len(labels)), dtype=complex)
    for k, w in enumerate(forward):
        m[pos[path_labels[k + 1]], pos[path_labels[k]]] = w
        m[pos[path_labels[k]], pos[path_labels[k + 1]]] = np.conj(w)
    for blind, anchor in pendants:
        m[pos[blind], pos[anchor]] = 1.0
        m[pos[anchor], pos[blind]] = 1.0
    return labels, m
