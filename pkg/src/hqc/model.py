"""Mixed qubit/qutrit site registers and local-term Hamiltonians.

A Hamiltonian is kept as a list of constant-norm terms, each a small dense
complex matrix acting on a few named sites.  Basis ordering over the full
tensor-product space is mixed-radix with site 0 most significant, so the
serialized form is reproducible byte for byte.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import reduce

import numpy as np
import scipy.sparse as sp

TERM_NORM_BOUND = 2.0
EMBED_DIM_GUARD = 2**22

ROLES = ("work", "station", "gadget-qubit", "gadget-qutrit")


class ModelError(ValueError):
    """Inconsistent register, term or state data."""


class DimensionGuardError(ModelError):
    """Requested full-space object exceeds the desk-scale guard."""


@dataclass(frozen=True)
class Site:
    id: int
    dim: int
    role: str
    label: str

    def __post_init__(self):
        if self.dim not in (2, 3):
            raise ModelError(f"site {self.label}: dim must be 2 or 3")
        if self.role not in ROLES:
            raise ModelError(f"site {self.label}: unknown role {self.role!r}")


class SiteRegister:
    """Ordered sites with dense ids 0..S-1 and unique labels."""

    def __init__(self, sites):
        self.sites = tuple(sites)
        if [s.id for s in self.sites] != list(range(len(self.sites))):
            raise ModelError("site ids must be dense 0..S-1 in order")
        labels = [s.label for s in self.sites]
        if len(set(labels)) != len(labels):
            raise ModelError("site labels must be unique")
        self.dims = tuple(s.dim for s in self.sites)
        strides = [1] * len(self.sites)
        for i in range(len(self.sites) - 2, -1, -1):
            strides[i] = strides[i + 1] * self.dims[i + 1]
        self.strides = tuple(strides)
        self.dim = int(np.prod(self.dims, dtype=np.int64)) if self.sites else 1

    def __len__(self) -> int:
        return len(self.sites)

    def __getitem__(self, i: int) -> Site:
        return self.sites[i]

    @property
    def n_work(self) -> int:
        return sum(1 for s in self.sites if s.role == "work")

    def by_label(self, label: str) -> Site:
        for s in self.sites:
            if s.label == label:
                return s
        raise ModelError(f"no site labelled {label!r}")

    def qubit_equivalents(self) -> float:
        """log2 of the full dimension; the resource guard unit."""
        return float(sum(np.log2(d) for d in self.dims))

    def index_of(self, assignment: dict[int, int]) -> int:
        """Full-space index of the basis state with the given site values (others 0)."""
        idx = 0
        for site_id, value in assignment.items():
            if not 0 <= value < self.dims[site_id]:
                raise ModelError(f"value {value} out of range for site {site_id}")
            idx += value * self.strides[site_id]
        return idx


@dataclass(frozen=True)
class Term:
    """One local summand: a dense matrix over an ascending tuple of site ids."""

    sites: tuple[int, ...]
    matrix: np.ndarray
    tag: str = ""

    def __post_init__(self):
        if len(set(self.sites)) != len(self.sites):
            raise ModelError(f"term {self.tag!r} repeats a site id")
        if list(self.sites) != sorted(self.sites):
            raise ModelError(f"term {self.tag!r} site ids must be ascending")
        object.__setattr__(self, "matrix", np.asarray(self.matrix, dtype=complex))

    @property
    def arity(self) -> int:
        return len(self.sites)

    def norm(self) -> float:
        return float(np.linalg.norm(self.matrix, 2))

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        return bool(np.max(np.abs(self.matrix - self.matrix.conj().T)) <= tol)

    def nonzeros(self, dims: tuple[int, ...]):
        """Yield (out_digits, in_digits, value) for each nonzero matrix entry."""
        rows, cols = np.nonzero(self.matrix)
        for r, c in zip(rows, cols):
            out_d = np.unravel_index(r, dims)
            in_d = np.unravel_index(c, dims)
            yield tuple(int(x) for x in out_d), tuple(int(x) for x in in_d), complex(self.matrix[r, c])


class TermList:
    """Immutable sum of local terms over one register."""

    def __init__(self, register: SiteRegister, terms, meta: dict | None = None):
        self.register = register
        self.terms = tuple(terms)
        self.meta = dict(meta or {})
        for t in self.terms:
            dims = tuple(register.dims[s] for s in t.sites)
            want = int(np.prod(dims))
            if t.matrix.shape != (want, want):
                raise ModelError(f"term {t.tag!r} matrix shape {t.matrix.shape} != {(want, want)}")
            if t.norm() > TERM_NORM_BOUND + 1e-9:
                raise ModelError(f"term {t.tag!r} norm {t.norm():.4f} exceeds {TERM_NORM_BOUND}")

    def __len__(self) -> int:
        return len(self.terms)

    def term_dims(self, term: Term) -> tuple[int, ...]:
        return tuple(self.register.dims[s] for s in term.sites)

    def norm_bound(self) -> float:
        """Triangle-inequality bound on the spectral norm."""
        return float(sum(t.norm() for t in self.terms))


def apply_term_list(hamiltonian: TermList, psi: np.ndarray) -> np.ndarray:
    """Dense full-space H @ psi, accumulated in ascending term order.

    Each term is applied through strided slice arithmetic on the mixed-radix
    tensor view, so no full-space matrix is ever formed.
    """
    reg = hamiltonian.register
    if psi.shape != (reg.dim,):
        raise ModelError(f"state dimension {psi.shape} does not match register dim {reg.dim}")
    out = np.zeros_like(psi, dtype=complex)
    src = psi.reshape(reg.dims)
    dst = out.reshape(reg.dims)
    for term in hamiltonian.terms:
        dims = hamiltonian.term_dims(term)
        for out_d, in_d, val in term.nonzeros(dims):
            sel_in = [slice(None)] * len(reg)
            sel_out = [slice(None)] * len(reg)
            for site, di, do in zip(term.sites, in_d, out_d):
                sel_in[site] = di
                sel_out[site] = do
            dst[tuple(sel_out)] += val * src[tuple(sel_in)]
    return out


def _rest_offsets(reg: SiteRegister, touched: tuple[int, ...]) -> np.ndarray:
    """Full-space offsets of all assignments of the untouched sites."""
    pieces = [
        np.arange(reg.dims[i], dtype=np.int64) * reg.strides[i]
        for i in range(len(reg))
        if i not in touched
    ]
    if not pieces:
        return np.zeros(1, dtype=np.int64)
    return reduce(lambda a, b: np.add.outer(a, b).ravel(), pieces)


def embed_full(hamiltonian: TermList) -> sp.csr_matrix:
    """Identity-padded sum of all terms as one sparse matrix (guarded)."""
    reg = hamiltonian.register
    if reg.dim > EMBED_DIM_GUARD:
        raise DimensionGuardError(
            f"full dimension {reg.dim} exceeds embed guard {EMBED_DIM_GUARD}"
        )
    rows, cols, vals = [], [], []
    for term in hamiltonian.terms:
        dims = hamiltonian.term_dims(term)
        rest = _rest_offsets(reg, term.sites)
        for out_d, in_d, val in term.nonzeros(dims):
            r = sum(d * reg.strides[s] for s, d in zip(term.sites, out_d))
            c = sum(d * reg.strides[s] for s, d in zip(term.sites, in_d))
            rows.append(rest + r)
            cols.append(rest + c)
            vals.append(np.full(rest.shape, val, dtype=complex))
    if not rows:
        return sp.csr_matrix((reg.dim, reg.dim), dtype=complex)
    return sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(reg.dim, reg.dim),
    )


def audit(hamiltonian: TermList) -> dict:
    """Locality and interaction-degree summary of a term list."""
    degree = {s.id: 0 for s in hamiltonian.register.sites}
    max_arity = 0
    max_norm = 0.0
    for t in hamiltonian.terms:
        max_arity = max(max_arity, t.arity)
        max_norm = max(max_norm, t.norm())
        for s in t.sites:
            degree[s] += 1
    return {
        "max_arity": max_arity,
        "term_count": len(hamiltonian.terms),
        "per_site_degree": degree,
        "max_term_norm": max_norm,
    }


# ---------------------------------------------------------------------------
# JSON serialization


def _complex_pairs(matrix: np.ndarray) -> list[list[float]]:
    flat = matrix.reshape(-1)
    return [[float(z.real), float(z.imag)] for z in flat]


def _pairs_to_matrix(pairs, side: int) -> np.ndarray:
    flat = np.array([complex(re, im) for re, im in pairs])
    if flat.shape != (side * side,):
        raise ModelError(f"matrix data has {flat.shape[0]} entries, expected {side * side}")
    return flat.reshape(side, side)


def term_list_to_dict(hamiltonian: TermList) -> dict:
    data = {
        "sites": [
            {"id": s.id, "dim": s.dim, "role": s.role, "label": s.label}
            for s in hamiltonian.register.sites
        ],
        "terms": [
            {
                "sites": list(t.sites),
                "matrix": _complex_pairs(t.matrix),
                "tag": t.tag,
            }
            for t in hamiltonian.terms
        ],
    }
    data.update(hamiltonian.meta)
    return data


def term_list_from_dict(data: dict) -> TermList:
    reg = SiteRegister(
        Site(id=s["id"], dim=s["dim"], role=s["role"], label=s["label"])
        for s in data["sites"]
    )
    terms = []
    for td in data["terms"]:
        sites = tuple(td["sites"])
        side = int(np.prod([reg.dims[s] for s in sites])) if sites else 1
        terms.append(Term(sites=sites, matrix=_pairs_to_matrix(td["matrix"], side), tag=td.get("tag", "")))
    meta = {k: v for k, v in data.items() if k not in ("sites", "terms")}
    return TermList(reg, terms, meta=meta)


def dumps_json(data: dict) -> str:
    """Deterministic JSON text: sorted keys, newline-terminated."""
    return json.dumps(data, indent=1, sort_keys=True) + "\n"


def loads_json(text: str) -> dict:
    return json.loads(text)
