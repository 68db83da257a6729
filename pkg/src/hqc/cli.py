"""Command-line pipeline: compile | verify | simulate | mixing | audit.

Exit codes: 0 ok, 2 circuit validation failure, 3 verification failure,
4 resource guard, 1 anything else.  With a fixed seed every command writes
byte-identical artifacts.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .circuit import CircuitError, pad_with_identities, parse_circuit, validate_for_backend
from .compiler import ClockMap, CompileError, compile_circuit
from .dynamics import (
    DynamicsError,
    estimate_mixing_scaling,
    run_protocol,
)
from .model import (
    DimensionGuardError,
    audit,
    dumps_json,
    loads_json,
    term_list_from_dict,
)
from .subspace import (
    build_computational_basis,
    expected_walk_graph,
    restrict_hamiltonian,
)

EXIT_OK = 0
EXIT_OTHER = 1
EXIT_VALIDATION = 2
EXIT_VERIFY = 3
EXIT_GUARD = 4

RESTRICTION_TOL = 1e-10


class CliFailure(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _load_circuit(args) -> "Circuit":
    if not args.circuit:
        raise CliFailure(EXIT_VALIDATION, f"{args.command}: --circuit is required")
    try:
        circuit = parse_circuit(Path(args.circuit).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise CliFailure(EXIT_OTHER, f"circuit file not found: {args.circuit}")
    except CircuitError as exc:
        raise CliFailure(EXIT_VALIDATION, f"circuit error: {exc}")
    violations = validate_for_backend(circuit, args.backend)
    if violations:
        raise CliFailure(EXIT_VALIDATION, "validation failed:\n  " + "\n  ".join(violations))
    if args.padding > 1:
        circuit = pad_with_identities(circuit, args.padding)
    return circuit


def _compile(args):
    try:
        return compile_circuit(_load_circuit(args), args.backend)
    except CompileError as exc:
        raise CliFailure(EXIT_VALIDATION, f"compile error: {exc}")


def _write(path: str | None, text: str) -> None:
    if path:
        Path(path).write_text(text, encoding="utf-8")


def cmd_compile(args) -> int:
    compiled = _compile(args)
    summary = audit(compiled.hamiltonian)
    text = dumps_json(compiled.to_dict())
    _write(args.out, text)
    if not args.out:
        sys.stdout.write(text)
    print(
        f"compiled backend={args.backend} sites={len(compiled.register)} "
        f"terms={summary['term_count']} max_arity={summary['max_arity']} "
        f"max_norm={summary['max_term_norm']:.6g}",
        file=sys.stderr,
    )
    return EXIT_OK


def cmd_audit(args) -> int:
    compiled = _compile(args)
    summary = audit(compiled.hamiltonian)
    degrees = summary["per_site_degree"]
    data = {
        "backend": args.backend,
        "sites": len(compiled.register),
        "term_count": summary["term_count"],
        "max_arity": summary["max_arity"],
        "max_term_norm": summary["max_term_norm"],
        "max_site_degree": max(degrees.values()),
        "per_site_degree": {compiled.register[i].label: d for i, d in degrees.items()},
    }
    text = dumps_json(data)
    _write(args.out, text)
    sys.stdout.write(text)
    return EXIT_OK


def cmd_verify(args) -> int:
    compiled = _compile(args)
    ham = compiled.hamiltonian
    if args.terms:
        data = loads_json(Path(args.terms).read_text(encoding="utf-8"))
        ham = term_list_from_dict(data)
        if "clock_map" in ham.meta:  # keep the circuit-derived map; file only supplies terms
            ham.meta.pop("clock_map")
    basis = build_computational_basis(compiled)
    walk = restrict_hamiltonian(ham, basis)
    labels, expected = expected_walk_graph(compiled.circuit, args.backend)
    if labels != walk.labels:
        max_err = float("inf")
        match = False
    else:
        max_err = float(np.max(np.abs(walk.matrix - expected)))
        match = max_err <= RESTRICTION_TOL
    ok = walk.closed and match
    report = {
        "backend": args.backend,
        "residual": walk.residual,
        "basis_size": len(basis),
        "restriction_match": bool(match),
        "max_entry_error": max_err,
    }
    text = dumps_json(report)
    _write(args.out, text)
    sys.stdout.write(text)
    return EXIT_OK if ok else EXIT_VERIFY


def cmd_simulate(args) -> int:
    circuit_args = argparse.Namespace(**{**vars(args), "padding": 1})
    circuit = _load_circuit(circuit_args)
    horizon = "auto" if args.time == "auto" else float(args.time)
    try:
        report = run_protocol(
            circuit, args.backend, padding_factor=args.padding,
            horizon=horizon, samples=args.samples, seed=args.seed,
            dt=args.dt, full_space=args.fullspace,
        )
    except DimensionGuardError as exc:
        raise CliFailure(EXIT_GUARD, f"resource guard: {exc}")
    except (DynamicsError, CompileError) as exc:
        raise CliFailure(EXIT_VALIDATION, f"simulate error: {exc}")
    text = dumps_json(report.to_dict())
    _write(args.out, text)
    if args.csv:
        rows = ["time,p_success,p_output_one"]
        for t, p, c in zip(report.times, report.p_success, report.p_output_one):
            c_str = "" if np.isnan(c) else repr(float(c))
            rows.append(f"{float(t)!r},{float(p)!r},{c_str}")
        Path(args.csv).write_text("\n".join(rows) + "\n", encoding="utf-8")
    if not args.out:
        sys.stdout.write(text)
    print(
        f"simulate backend={args.backend} mode={report.mode} T={report.horizon:.6g} "
        f"time-averaged p_success={report.success_time_avg:.4f} "
        f"min conditional fidelity={report.conditional_fidelity_min:.8f}",
        file=sys.stderr,
    )
    return EXIT_OK


def cmd_mixing(args) -> int:
    lengths = [int(x) for x in args.lengths.split(",") if x]
    kinds = ("path", "comb") if args.kind == "both" else (args.kind,)
    results = {}
    for kind in kinds:
        try:
            est = estimate_mixing_scaling(lengths, trials=args.trials, kind=kind)
        except DynamicsError as exc:
            raise CliFailure(EXIT_VALIDATION, f"mixing error: {exc}")
        results[kind] = est.to_dict()
        print(
            f"mixing kind={kind} exponent={est.exponent:.4f} "
            f"+- {est.exponent_stderr:.4f} (log-log fit over N={lengths})",
            file=sys.stderr,
        )
    text = dumps_json(results)
    _write(args.out, text)
    if not args.out:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hqc",
        description="Compile circuits to local-Hamiltonian term lists and "
                    "verify the induced quantum-walk dynamics.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_circuit=True):
        p.add_argument("--backend", choices=("f4", "s3", "q23", "q22"), default="q22")
        if needs_circuit:
            p.add_argument("--circuit", required=True, help="circuit file path")
        p.add_argument("--padding", type=int, default=1, help="identity padding factor")
        p.add_argument("--out", default=None, help="output JSON path")

    p = sub.add_parser("compile", help="lower a circuit to a term list")
    common(p)
    p = sub.add_parser("audit", help="locality/degree audit of the compiled terms")
    common(p)
    p = sub.add_parser("verify", help="check subspace closure and the restricted walk")
    common(p)
    p.add_argument("--terms", default=None, help="verify terms from this JSON instead")

    p = sub.add_parser("simulate", help="run the three-step measurement protocol")
    common(p)
    p.add_argument("--time", default="auto", help="evolution horizon T or 'auto' (4 N^2)")
    p.add_argument("--dt", type=float, default=None)
    p.add_argument("--samples", type=int, default=128)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--fullspace", action="store_true", help="evolve the full register (guarded)")
    p.add_argument("--csv", default=None, help="write p_success curve as CSV")

    p = sub.add_parser("mixing", help="mixing-time scaling study on the walk oracle")
    p.add_argument("--lengths", default="16,32,64,128")
    p.add_argument("--trials", type=int, default=40)
    p.add_argument("--kind", choices=("path", "comb", "both"), default="both")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {
        "compile": cmd_compile,
        "audit": cmd_audit,
        "verify": cmd_verify,
        "simulate": cmd_simulate,
        "mixing": cmd_mixing,
    }
    try:
        return handlers[args.command](args)
    except CliFailure as exc:
        print(str(exc), file=sys.stderr)
        return exc.code
    except DimensionGuardError as exc:
        print(f"resource guard: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except (CircuitError, CompileError) as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_VALIDATION
    except Exception as exc:  # noqa: BLE001
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_OTHER


if __name__ == "__main__":
    sys.exit(main())
