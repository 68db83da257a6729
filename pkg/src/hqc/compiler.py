"""Circuit-to-Hamiltonian lowering backends.

Four backends trade locality against clock-register structure:

* ``f4``  -- one term per gate, gate unitary tensored with a two-qubit clock
  hop; arity up to 4.
* ``s3``  -- every CNOT becomes a railroad switch with four extra clock
  qubits and projector-controlled entries/exits; arity up to 3.
* ``q23`` -- switches built from qutrit stations whose internal stop-to-stop
  transitions carry the controls and the target flip; every term couples at
  most one qubit and one qutrit.
* ``q22`` -- the q23 output with each qutrit encoded into two qubits
  (empty -> |00>, stops -> |01>+-|10>), leaving only qubit-qubit pairs.

Every backend returns the site register, the term list and a clock map
naming which clock configurations realize each stop along the walk.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .circuit import Circuit, Gate, validate_for_backend
from .model import Site, SiteRegister, Term, TermList

SQ2 = 1.0 / math.sqrt(2.0)

P0 = np.array([[1.0, 0.0], [0.0, 0.0]], dtype=complex)
P1 = np.array([[0.0, 0.0], [0.0, 1.0]], dtype=complex)
PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)


class CompileError(ValueError):
    """Circuit not lowerable on the requested backend."""


# ---------------------------------------------------------------------------
# clock map


@dataclass(frozen=True)
class ClockStop:
    """One labelled position of the train along (or off) the walk.

    ``branch0``/``branch1`` list the clock configurations occupied by the
    master-qubit branches; stations use ``configs`` instead.  A configuration
    is a ``({site_id: value}, amplitude)`` pair, sites not mentioned sit in
    their empty state.  ``applied`` marks stops past the middle transition,
    where the gadget operation has already acted on the branch-1 component.
    """

    label: str
    kind: str  # station | gadget | blind
    gate: int | None = None
    t: int | None = None
    applied: bool = False
    configs: tuple = ()
    branch0: tuple = ()
    branch1: tuple = ()

    def all_configs(self):
        return tuple(self.configs) + tuple(self.branch0) + tuple(self.branch1)


@dataclass
class ClockMap:
    """Ordered walk stops, blind alleys, and the useful circuit length."""

    stops: list[ClockStop]
    blind_alleys: list[ClockStop]
    useful_length: int

    def station_labels(self, past_useful: bool = False) -> list[str]:
        out = []
        for s in self.stops:
            if s.kind == "station" and (not past_useful or s.t > self.useful_length):
                out.append(s.label)
        return out

    def to_dict(self, register: SiteRegister) -> dict:
        def configs_out(configs):
            return [
                {
                    "assign": {register[sid].label: val for sid, val in sorted(assign.items())},
                    "amp": [float(np.real(amp)), float(np.imag(amp))],
                }
                for assign, amp in configs
            ]

        def stop_out(s: ClockStop) -> dict:
            d = {"label": s.label, "kind": s.kind, "applied": s.applied}
            if s.gate is not None:
                d["gate"] = s.gate
            if s.t is not None:
                d["t"] = s.t
            if s.configs:
                d["configs"] = configs_out(s.configs)
            if s.branch0:
                d["branch0"] = configs_out(s.branch0)
                d["branch1"] = configs_out(s.branch1)
            return d

        return {
            "useful_length": self.useful_length,
            "stops": [stop_out(s) for s in self.stops],
            "blind_alleys": [stop_out(s) for s in self.blind_alleys],
        }

    @staticmethod
    def from_dict(data: dict, register: SiteRegister) -> "ClockMap":
        def configs_in(raw):
            return tuple(
                (
                    {register.by_label(lbl).id: val for lbl, val in c["assign"].items()},
                    complex(c["amp"][0], c["amp"][1]),
                )
                for c in raw
            )

        def stop_in(d: dict) -> ClockStop:
            return ClockStop(
                label=d["label"],
                kind=d["kind"],
                gate=d.get("gate"),
                t=d.get("t"),
                applied=d.get("applied", False),
                configs=configs_in(d.get("configs", ())),
                branch0=configs_in(d.get("branch0", ())),
                branch1=configs_in(d.get("branch1", ())),
            )

        return ClockMap(
            stops=[stop_in(d) for d in data["stops"]],
            blind_alleys=[stop_in(d) for d in data["blind_alleys"]],
            useful_length=data["useful_length"],
        )


@dataclass
class CompiledHamiltonian:
    backend: str
    circuit: Circuit
    register: SiteRegister
    hamiltonian: TermList
    clock_map: ClockMap

    def to_dict(self) -> dict:
        from .model import term_list_to_dict

        data = term_list_to_dict(self.hamiltonian)
        data["backend"] = self.backend
        data["clock_map"] = self.clock_map.to_dict(self.register)
        return data


# ---------------------------------------------------------------------------
# shared helpers


def _hop(dims: tuple[int, ...], src: tuple[int, ...], dst: tuple[int, ...],
         amp: complex = 1.0) -> np.ndarray:
    """Hermitian hop matrix over ``dims``: amp |dst><src| + conj(amp) |src><dst|."""
    side = int(np.prod(dims))
    m = np.zeros((side, side), dtype=complex)
    i = int(np.ravel_multi_index(src, dims))
    j = int(np.ravel_multi_index(dst, dims))
    m[j, i] = amp
    m[i, j] = np.conj(amp)
    return m


_HOP_AB3 = _hop((3,), (1,), (2,))  # stop A <-> stop B inside one qutrit


def _master_and_projectors(gate: Gate) -> tuple[int, np.ndarray, np.ndarray]:
    """Train-master qubit and its (lower, upper) track projectors."""
    if gate.kind == "CNOT":
        return gate.control, P0.copy(), P1.copy()
    if gate.kind == "W":
        b = gate.basis
        return gate.target, b @ P0 @ b.conj().T, b @ P1 @ b.conj().T
    raise CompileError(f"gate kind {gate.kind} has no switch gadget")


def _branch_work_op(gate: Gate) -> np.ndarray | None:
    """Operator applied to the branch-1 work component at the middle hop."""
    if gate.kind == "CNOT":
        return PAULI_X.copy()
    return None  # W carries a phase, not a work operator


def _gate_work_term(gate: Gate, hop_fwd: np.ndarray, hop_bwd: np.ndarray,
                    clock_sites: tuple[int, ...]) -> Term | None:
    """Feynman-style term U (x) hop + h.c. with work sites sorted in."""
    u = gate.unitary()
    if gate.kind == "ID":
        return Term(sites=clock_sites, matrix=hop_fwd + hop_bwd, tag="")
    if gate.kind == "CNOT":
        c, t = gate.qubits
        lo, hi = sorted((c, t))
        if c > t:  # reorder the 4x4 for ascending site order
            swap = np.eye(4)[[0, 2, 1, 3]]
            u = swap @ u @ swap
        sites = (lo, hi) + clock_sites
    else:
        sites = (gate.qubits[0],) + clock_sites
    matrix = np.kron(u, hop_fwd) + np.kron(u.conj().T, hop_bwd)
    return Term(sites=sites, matrix=matrix, tag="")


def _base_sites(circuit: Circuit) -> list[Site]:
    sites = [Site(i, 2, "work", f"q{i}") for i in range(circuit.n)]
    for t in range(circuit.length + 1):
        sites.append(Site(circuit.n + t, 2, "station", f"c_{t}"))
    return sites


def _station(circuit: Circuit, t: int) -> int:
    return circuit.n + t


def _station_stop(circuit: Circuit, t: int) -> ClockStop:
    return ClockStop(
        label=f"t={t}", kind="station", t=t,
        configs=(({_station(circuit, t): 1}, 1.0 + 0j),),
    )


def _retag(term: Term, tag: str) -> Term:
    return Term(sites=term.sites, matrix=term.matrix, tag=tag)


# ---------------------------------------------------------------------------
# backend: 4-local Feynman clock


def compile_feynman4(circuit: Circuit) -> CompiledHamiltonian:
    """One pulse-clock hop term per gate; arity 2 (identity) to 4 (CNOT)."""
    _require_valid(circuit, "f4")
    sites = _base_sites(circuit)
    reg = SiteRegister(sites)
    terms = []
    stops = [_station_stop(circuit, 0)]
    for t, gate in enumerate(circuit.gates, start=1):
        prev, here = _station(circuit, t - 1), _station(circuit, t)
        # forward hop moves the train from c_{t-1} to c_t
        fwd = np.zeros((4, 4), dtype=complex)
        fwd[1, 2] = 1.0
        bwd = fwd.conj().T
        term = _gate_work_term(gate, fwd, bwd, (prev, here))
        terms.append(_retag(term, f"HF:t={t}:{_gate_desc(gate)}"))
        stops.append(_station_stop(circuit, t))
    cmap = ClockMap(stops=stops, blind_alleys=[], useful_length=circuit.useful_length)
    return CompiledHamiltonian("f4", circuit, reg, TermList(reg, terms), cmap)


def _gate_desc(gate: Gate) -> str:
    if gate.kind == "ID":
        return f"ID(q{gate.qubits[0]})"
    if gate.kind == "CNOT":
        return f"CNOT(q{gate.qubits[0]},q{gate.qubits[1]})"
    return f"{gate.kind}(q{gate.qubits[0]})"


# ---------------------------------------------------------------------------
# backend: 3-local railroad switch


def compile_switch3(circuit: Circuit) -> CompiledHamiltonian:
    """Railroad switch per CNOT (controlled entries/exits), arity <= 3."""
    _require_valid(circuit, "s3")
    sites = _base_sites(circuit)
    terms: list[Term] = []
    stops = [_station_stop(circuit, 0)]
    blind: list[ClockStop] = []

    for t, gate in enumerate(circuit.gates, start=1):
        prev, here = _station(circuit, t - 1), _station(circuit, t)
        if gate.kind != "CNOT":
            fwd = np.zeros((4, 4), dtype=complex)
            fwd[1, 2] = 1.0
            term = _gate_work_term(gate, fwd, fwd.conj().T, (prev, here))
            terms.append(_retag(term, f"HF:t={t}:{_gate_desc(gate)}"))
            stops.append(_station_stop(circuit, t))
            continue

        base = len(sites)
        for name in ("u1", "u2", "l1", "l2"):
            sites.append(Site(len(sites), 2, "gadget-qubit", f"{name}@g{t}"))
        u1, u2, l1, l2 = base, base + 1, base + 2, base + 3
        ctrl, targ = gate.control, gate.target

        hop_in = _hop((2, 2), (1, 0), (0, 1))     # (station, gadget): train leaves station
        hop_out = _hop((2, 2), (0, 1), (1, 0))    # (station, gadget): train enters station
        hop_fwd = _hop((2, 2), (1, 0), (0, 1))    # (first, second) along the track

        terms.append(Term((ctrl, prev, u1), np.kron(P1, hop_in), f"sw:t={t}:upper:in"))
        terms.append(Term((targ, u1, u2), np.kron(PAULI_X, hop_fwd), f"sw:t={t}:upper:X"))
        terms.append(Term((ctrl, here, u2), np.kron(P1, hop_out), f"sw:t={t}:upper:out"))
        terms.append(Term((ctrl, prev, l1), np.kron(P0, hop_in), f"sw:t={t}:lower:in"))
        terms.append(Term((l1, l2), hop_fwd, f"sw:t={t}:lower:hop"))
        terms.append(Term((ctrl, here, l2), np.kron(P0, hop_out), f"sw:t={t}:lower:out"))

        stops.append(ClockStop(
            label=f"g{t}:1", kind="gadget", gate=t,
            branch0=(({l1: 1}, 1.0 + 0j),), branch1=(({u1: 1}, 1.0 + 0j),),
        ))
        stops.append(ClockStop(
            label=f"g{t}:2", kind="gadget", gate=t, applied=True,
            branch0=(({l2: 1}, 1.0 + 0j),), branch1=(({u2: 1}, 1.0 + 0j),),
        ))
        stops.append(_station_stop(circuit, t))

    reg = SiteRegister(sites)
    cmap = ClockMap(stops=stops, blind_alleys=blind, useful_length=circuit.useful_length)
    return CompiledHamiltonian("s3", circuit, reg, TermList(reg, terms), cmap)


# ---------------------------------------------------------------------------
# backend: qubit-qutrit switch

# gadget stop names in walk order; the middle transition sits between 3A and 3B
_TRACK_STOPS = ("1A", "1B", "2", "3A", "3B", "4", "5A", "5B")


def compile_qutrit2(circuit: Circuit, allow_w: bool = True) -> CompiledHamiltonian:
    """Two-track switch from qutrits u1,u3,u5 / l1,l3,l5 and qubits u2,u4 / l2,l4.

    Station-to-stop and stop-to-stop hops act on a (qubit, qutrit) pair;
    the train-master controls sit on the internal 1A<->1B and 5A<->5B
    transitions, the gate action on the internal 3A<->3B transition.
    """
    _require_valid(circuit, "q23")
    if not allow_w and any(g.kind == "W" for g in circuit.gates):
        raise CompileError("W gadgets disabled on q23")
    sites = _base_sites(circuit)
    terms: list[Term] = []
    stops = [_station_stop(circuit, 0)]
    blind: list[ClockStop] = []

    for t, gate in enumerate(circuit.gates, start=1):
        prev, here = _station(circuit, t - 1), _station(circuit, t)
        if gate.kind == "ID":
            terms.append(Term((prev, here), _hop((2, 2), (1, 0), (0, 1)), f"HF:t={t}:{_gate_desc(gate)}"))
            stops.append(_station_stop(circuit, t))
            continue

        master, p_lo, p_up = _master_and_projectors(gate)
        gadget_ids = {}
        for track in ("u", "l"):
            for name, dim in (("1", 3), ("2", 2), ("3", 3), ("4", 2), ("5", 3)):
                role = "gadget-qutrit" if dim == 3 else "gadget-qubit"
                gadget_ids[track + name] = len(sites)
                sites.append(Site(len(sites), dim, role, f"{track}{name}@g{t}"))

        for track in ("u", "l"):
            s1, s2, s3, s4, s5 = (gadget_ids[track + k] for k in "12345")
            proj = p_up if track == "u" else p_lo
            tg = f"H23{track}:t={t}"
            terms.append(Term((prev, s1), _hop((2, 3), (1, 0), (0, 1)), f"{tg}:hop(c{t - 1}→{track}1A)"))
            terms.append(Term((master, s1), np.kron(proj, _HOP_AB3), f"{tg}:ctrl({track}1A→{track}1B)"))
            terms.append(Term((s1, s2), _hop((3, 2), (2, 0), (0, 1)), f"{tg}:hop({track}1B→{track}2)"))
            terms.append(Term((s2, s3), _hop((2, 3), (1, 0), (0, 1)), f"{tg}:hop({track}2→{track}3A)"))
            if gate.kind == "CNOT":
                if track == "u":
                    terms.append(Term(
                        (gate.target, s3), np.kron(PAULI_X, _HOP_AB3), f"{tg}:X({track}3A→{track}3B)"
                    ))
                else:
                    terms.append(Term((s3,), _HOP_AB3.copy(), f"{tg}:hop({track}3A→{track}3B)"))
            else:  # W: the phase rides the upper track only
                amp = np.exp(1j * gate.theta) if track == "u" else 1.0
                terms.append(Term((s3,), _hop((3,), (1,), (2,), amp), f"{tg}:phase({track}3A→{track}3B)"))
            terms.append(Term((s3, s4), _hop((3, 2), (2, 0), (0, 1)), f"{tg}:hop({track}3B→{track}4)"))
            terms.append(Term((s4, s5), _hop((2, 3), (1, 0), (0, 1)), f"{tg}:hop({track}4→{track}5A)"))
            terms.append(Term((master, s5), np.kron(proj, _HOP_AB3), f"{tg}:ctrl({track}5A→{track}5B)"))
            terms.append(Term((here, s5), _hop((2, 3), (0, 2), (1, 0)), f"{tg}:hop({track}5B→c{t})"))

        def qutrit_cfg(track_name: str, value: int):
            return (({gadget_ids[track_name]: value}, 1.0 + 0j),)

        stop_cfgs = {
            "1A": ("1", 1), "1B": ("1", 2), "2": ("2", 1), "3A": ("3", 1),
            "3B": ("3", 2), "4": ("4", 1), "5A": ("5", 1), "5B": ("5", 2),
        }
        for name in _TRACK_STOPS:
            site_key, value = stop_cfgs[name]
            stops.append(ClockStop(
                label=f"g{t}:{name}", kind="gadget", gate=t,
                applied=name in ("3B", "4", "5A", "5B"),
                branch0=qutrit_cfg("l" + site_key, value),
                branch1=qutrit_cfg("u" + site_key, value),
            ))
        blind.append(ClockStop(
            label=f"g{t}:1x", kind="blind", gate=t,
            branch0=qutrit_cfg("u1", 1), branch1=qutrit_cfg("l1", 1),
        ))
        blind.append(ClockStop(
            label=f"g{t}:5x", kind="blind", gate=t, applied=True,
            branch0=qutrit_cfg("u5", 2), branch1=qutrit_cfg("l5", 2),
        ))
        stops.append(_station_stop(circuit, t))

    reg = SiteRegister(sites)
    cmap = ClockMap(stops=stops, blind_alleys=blind, useful_length=circuit.useful_length)
    return CompiledHamiltonian("q23", circuit, reg, TermList(reg, terms), cmap)


# ---------------------------------------------------------------------------
# backend: qubit-qubit switch (entangled two-qubit qutrit encoding)


def compile_qubit2(circuit: Circuit) -> CompiledHamiltonian:
    """All-qubit switch: qutrits become pairs with O->|00>, A->|+>, B->|->.

    Internal A<->B transitions become (Z1 - Z2)/2 (x) V split into two
    qubit-qubit terms; boundary hops into stop A use the 1/sqrt(2)
    double-hop pattern, boundary hops out of stop B its sign-flipped
    counterpart, which annihilates the opposite entangled state.  For W
    gates the middle qutrit is pulse-encoded so the hop can carry a phase.
    """
    _require_valid(circuit, "q22")
    sites = _base_sites(circuit)
    terms: list[Term] = []
    stops = [_station_stop(circuit, 0)]
    blind: list[ClockStop] = []

    for t, gate in enumerate(circuit.gates, start=1):
        prev, here = _station(circuit, t - 1), _station(circuit, t)
        if gate.kind == "ID":
            terms.append(Term((prev, here), _hop((2, 2), (1, 0), (0, 1)), f"HF:t={t}:{_gate_desc(gate)}"))
            stops.append(_station_stop(circuit, t))
            continue

        master, p_lo, p_up = _master_and_projectors(gate)
        pulse_middle = gate.kind == "W"
        ids: dict[str, int] = {}
        for track in ("u", "l"):
            names = [("1", True), ("2", False)]
            if pulse_middle:
                names += [("3A", False), ("3B", False)]
            else:
                names += [("3", True)]
            names += [("4", False), ("5", True)]
            for name, is_pair in names:
                if is_pair:
                    for suffix in ("", "'"):
                        ids[track + name + suffix] = len(sites)
                        sites.append(Site(len(sites), 2, "gadget-qubit", f"{track}{name}{suffix}@g{t}"))
                else:
                    ids[track + name] = len(sites)
                    sites.append(Site(len(sites), 2, "gadget-qubit", f"{track}{name}@g{t}"))

        def pair_hop(a: int, b: int, amp: complex, tag: str) -> Term:
            """amp |01><10| + c.c. on the ascending pair (a, b)."""
            lo, hi = sorted((a, b))
            src = (1, 0) if a == lo else (0, 1)
            dst = (0, 1) if a == lo else (1, 0)
            return Term((lo, hi), _hop((2, 2), src, dst, amp), tag)

        def enter_a(src_q: int, pair: str, tag: str):
            """src qubit -> stop A of an encoded qutrit: two +1/sqrt2 hops."""
            u, up = ids[pair], ids[pair + "'"]
            terms.append(pair_hop(src_q, u, SQ2, f"{tag}/1"))
            terms.append(pair_hop(src_q, up, SQ2, f"{tag}/2"))

        def exit_b(pair: str, dst_q: int, tag: str):
            """stop B of an encoded qutrit -> dst qubit: sign-split hops."""
            u, up = ids[pair], ids[pair + "'"]
            terms.append(pair_hop(u, dst_q, -SQ2, f"{tag}/1"))
            terms.append(pair_hop(up, dst_q, SQ2, f"{tag}/2"))

        def internal(pair: str, work_site: int, work_op: np.ndarray, tag: str):
            """(Z1 - Z2)/2 (x) work_op as two qubit-qubit terms."""
            for suffix, sign, part in (("", 0.5, "Z1"), ("'", -0.5, "Z2")):
                s = ids[pair + suffix]
                lo, hi = sorted((work_site, s))
                op_lo = work_op if work_site == lo else PAULI_Z
                op_hi = PAULI_Z if work_site == lo else work_op
                terms.append(Term((lo, hi), sign * np.kron(op_lo, op_hi), f"{tag}/{part}"))

        def internal_plain(pair: str, tag: str):
            """(Z1 - Z2)/2 with no work factor: one term on the encoding pair."""
            u, up = ids[pair], ids[pair + "'"]
            m = 0.5 * (np.kron(PAULI_Z, np.eye(2)) - np.kron(np.eye(2), PAULI_Z))
            terms.append(Term((u, up), m.astype(complex), tag))

        for track in ("u", "l"):
            proj = p_up if track == "u" else p_lo
            tg = f"H22{track}:t={t}"
            enter_a(prev, track + "1", f"{tg}:hop(c{t - 1}→{track}1A)")
            internal(track + "1", master, proj, f"{tg}:ctrl({track}1A→{track}1B)")
            if pulse_middle:
                exit_b(track + "1", ids[track + "2"], f"{tg}:hop({track}1B→{track}2)")
                terms.append(pair_hop(
                    ids[track + "2"], ids[track + "3A"], 1.0, f"{tg}:hop({track}2→{track}3A)"
                ))
                if track == "u":
                    terms.append(pair_hop(
                        ids["u3A"], ids["u3B"], np.exp(1j * gate.theta), f"{tg}:phase(u3A→u3B)"
                    ))
                else:
                    terms.append(pair_hop(ids["l3A"], ids["l3B"], 1.0, f"{tg}:hop(l3A→l3B)"))
                terms.append(pair_hop(
                    ids[track + "3B"], ids[track + "4"], 1.0, f"{tg}:hop({track}3B→{track}4)"
                ))
            else:
                exit_b(track + "1", ids[track + "2"], f"{tg}:hop({track}1B→{track}2)")
                enter_a(ids[track + "2"], track + "3", f"{tg}:hop({track}2→{track}3A)")
                if track == "u":
                    internal(track + "3", gate.target, PAULI_X, f"{tg}:X({track}3A→{track}3B)")
                else:
                    internal_plain(track + "3", f"{tg}:hop({track}3A→{track}3B)")
                exit_b(track + "3", ids[track + "4"], f"{tg}:hop({track}3B→{track}4)")
            enter_a(ids[track + "4"], track + "5", f"{tg}:hop({track}4→{track}5A)")
            internal(track + "5", master, proj, f"{tg}:ctrl({track}5A→{track}5B)")
            exit_b(track + "5", here, f"{tg}:hop({track}5B→c{t})")

        def encoded(track: str, stop: str):
            """Clock configurations realizing one stop on one track."""
            if stop in ("2", "4") or (pulse_middle and stop in ("3A", "3B")):
                return (({ids[track + stop]: 1}, 1.0 + 0j),)
            pair, letter = track + stop[0], stop[1]
            u, up = ids[pair], ids[pair + "'"]
            sign = 1.0 if letter == "A" else -1.0
            return (({up: 1}, SQ2 + 0j), ({u: 1}, sign * SQ2 + 0j))

        for name in _TRACK_STOPS:
            stops.append(ClockStop(
                label=f"g{t}:{name}", kind="gadget", gate=t,
                applied=name in ("3B", "4", "5A", "5B"),
                branch0=encoded("l", name), branch1=encoded("u", name),
            ))
        blind.append(ClockStop(
            label=f"g{t}:1x", kind="blind", gate=t,
            branch0=encoded("u", "1A"), branch1=encoded("l", "1A"),
        ))
        blind.append(ClockStop(
            label=f"g{t}:5x", kind="blind", gate=t, applied=True,
            branch0=encoded("u", "5B"), branch1=encoded("l", "5B"),
        ))
        stops.append(_station_stop(circuit, t))

    reg = SiteRegister(sites)
    cmap = ClockMap(stops=stops, blind_alleys=blind, useful_length=circuit.useful_length)
    return CompiledHamiltonian("q22", circuit, reg, TermList(reg, terms), cmap)


# ---------------------------------------------------------------------------


_BACKENDS = {
    "f4": compile_feynman4,
    "s3": compile_switch3,
    "q23": compile_qutrit2,
    "q22": compile_qubit2,
}


def compile_circuit(circuit: Circuit, backend: str) -> CompiledHamiltonian:
    if backend not in _BACKENDS:
        raise CompileError(f"unknown backend {backend!r}")
    return _BACKENDS[backend](circuit)


def _require_valid(circuit: Circuit, backend: str) -> None:
    violations = validate_for_backend(circuit, backend)
    if violations:
        raise CompileError("; ".join(violations))


def expected_counts(circuit: Circuit, backend: str) -> dict:
    """Closed-form site/term counts per backend, asserted in tests."""
    n, length = circuit.n, circuit.length
    n_id = sum(1 for g in circuit.gates if g.kind == "ID")
    n_cnot = sum(1 for g in circuit.gates if g.kind == "CNOT")
    n_w = sum(1 for g in circuit.gates if g.kind == "W")
    n_u1 = sum(1 for g in circuit.gates if g.kind == "U1")
    base_sites = n + length + 1
    if backend == "f4":
        return {"sites": base_sites, "terms": length}
    if backend == "s3":
        return {"sites": base_sites + 4 * n_cnot, "terms": n_id + n_u1 + n_w + 6 * n_cnot}
    if backend == "q23":
        return {"sites": base_sites + 10 * (n_cnot + n_w), "terms": n_id + 18 * n_cnot + 18 * n_w}
    if backend == "q22":
        return {"sites": base_sites + 16 * (n_cnot + n_w), "terms": n_id + 35 * n_cnot + 30 * n_w}
    raise CompileError(f"unknown backend {backend!r}")
