"""Circuit-to-Hamiltonian compilation with verified quantum-walk dynamics."""

from .circuit import (
    Circuit,
    CircuitError,
    Gate,
    apply_circuit_prefix,
    cnot_gate,
    identity_gate,
    pad_with_identities,
    parse_circuit,
    serialize_circuit,
    u1_gate,
    validate_for_backend,
    w_gate,
)
from .compiler import (
    ClockMap,
    CompiledHamiltonian,
    CompileError,
    compile_circuit,
    compile_feynman4,
    compile_qubit2,
    compile_qutrit2,
    compile_switch3,
)
from .dynamics import (
    EvolutionReport,
    MixingEstimate,
    comb_walk_oracle,
    estimate_mixing_scaling,
    evolve,
    line_walk_oracle,
    run_protocol,
)
from .model import (
    Site,
    SiteRegister,
    Term,
    TermList,
    apply_term_list,
    audit,
    embed_full,
    term_list_from_dict,
    term_list_to_dict,
)
from .subspace import (
    SubspaceBasis,
    build_computational_basis,
    expected_walk_graph,
    restrict_hamiltonian,
    verify_invariance,
)

__version__ = "0.1.0"

__all__ = [
    "Circuit", "CircuitError", "Gate", "apply_circuit_prefix", "cnot_gate",
    "identity_gate", "pad_with_identities", "parse_circuit", "serialize_circuit",
    "u1_gate", "validate_for_backend", "w_gate",
    "ClockMap", "CompiledHamiltonian", "CompileError", "compile_circuit",
    "compile_feynman4", "compile_qubit2", "compile_qutrit2", "compile_switch3",
    "EvolutionReport", "MixingEstimate", "comb_walk_oracle",
    "estimate_mixing_scaling", "evolve", "line_walk_oracle", "run_protocol",
    "Site", "SiteRegister", "Term", "TermList", "apply_term_list", "audit",
    "embed_full", "term_list_from_dict", "term_list_to_dict",
    "SubspaceBasis", "build_computational_basis", "expected_walk_graph",
    "restrict_hamiltonian", "verify_invariance",
]
