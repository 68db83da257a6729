"""Time evolution, the three-step measurement protocol and mixing estimates.

Small restricted matrices are exponentiated exactly through their
eigendecomposition.  Full-space term lists are propagated with a Chebyshev
expansion of exp(-iHT) whose series is cut at machine precision, so both
routes conserve the norm to rounding error.  The analytic path-graph
spectrum serves as the independent oracle for everything walk-shaped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import jv

from .circuit import Circuit, apply_circuit_prefix, pad_with_identities
from .compiler import CompiledHamiltonian, compile_circuit
from .model import DimensionGuardError, TermList, apply_term_list
from .subspace import (
    SubspaceBasis,
    build_computational_basis,
    restrict_hamiltonian,
)

STEP_GUARD_FACTOR = 0.1
FULLSPACE_GUARD_QUBITS = 22.0
DEGENERACY_TOL = 1e-12


class DynamicsError(ValueError):
    """Bad evolution request (step size, dimensions, guard)."""


# ---------------------------------------------------------------------------
# propagators


def _lanczos_extreme(matvec, dim: int, iters: int = 30) -> float:
    """Largest |eigenvalue| estimate from a deterministic Lanczos run."""
    rng = np.random.default_rng(0x5EED)
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    v /= np.linalg.norm(v)
    alphas, betas = [], []
    prev = np.zeros_like(v)
    beta = 0.0
    for _ in range(min(iters, dim)):
        w = matvec(v) - beta * prev
        alpha = np.vdot(v, w).real
        w -= alpha * v
        alphas.append(alpha)
        beta = np.linalg.norm(w)
        if beta < 1e-12:
            break
        betas.append(beta)
        prev, v = v, w / beta
    tri = np.diag(alphas)
    if betas:
        off = np.array(betas[: len(alphas) - 1])
        tri += np.diag(off, 1) + np.diag(off, -1)
    return float(np.max(np.abs(np.linalg.eigvalsh(tri)))) if len(alphas) else 0.0


def norm_estimate(hamiltonian: TermList | np.ndarray) -> float:
    """Spectral-norm upper bound used by the step-size guard."""
    if isinstance(hamiltonian, TermList):
        return hamiltonian.norm_bound()
    return float(np.linalg.norm(np.asarray(hamiltonian), 2))


def _chebyshev_bound(hamiltonian: TermList) -> float:
    cap = hamiltonian.norm_bound()
    if cap == 0.0 or hamiltonian.register.dim <= 2:
        return cap
    est = _lanczos_extreme(lambda x: apply_term_list(hamiltonian, x), hamiltonian.register.dim)
    return float(min(cap, 1.25 * est)) if est > 0 else cap


def _propagate_term_list(hamiltonian: TermList, psi: np.ndarray, t: float,
                         bound: float) -> np.ndarray:
    """Chebyshev step with a unitarity safety net.

    If the estimated spectral bound were ever too small the polynomial would
    blow up; the norm drift catches that and the step is redone with the
    triangle-inequality bound, which can never underestimate.
    """
    out = _chebyshev_step(hamiltonian, psi, t, bound)
    drift = abs(np.linalg.norm(out) - np.linalg.norm(psi))
    if drift > 1e-10 and bound < hamiltonian.norm_bound():
        out = _chebyshev_step(hamiltonian, psi, t, hamiltonian.norm_bound())
    return out


def _chebyshev_step(hamiltonian: TermList, psi: np.ndarray, t: float, bound: float) -> np.ndarray:
    """exp(-iHt) psi via a Chebyshev series over [-bound, bound]."""
    rho = bound * abs(t)
    if rho == 0.0:
        return psi.copy()
    # the Bessel transition region widens like rho^(1/3)
    k_max = int(rho + 25.0 * (rho + 1.0) ** (1.0 / 3.0) + 60.0)
    coeff = jv(np.arange(k_max + 1), rho)
    if abs(coeff[-1]) > 1e-13:
        raise DynamicsError("Chebyshev series did not converge; spectral bound too small")
    keep = np.nonzero(np.abs(coeff) > 1e-16)[0]
    k_eff = int(keep[-1]) if keep.size else 0
    sign = 1.0 if t >= 0 else -1.0
    scale = 1.0 / bound
    tk_prev = psi
    out = coeff[0] * psi
    if k_eff >= 1:
        tk = scale * apply_term_list(hamiltonian, psi)
        out = out + 2.0 * (-1j * sign) * coeff[1] * tk
        for k in range(2, k_eff + 1):
            tk_next = 2.0 * scale * apply_term_list(hamiltonian, tk) - tk_prev
            tk_prev, tk = tk, tk_next
            out = out + 2.0 * ((-1j * sign) ** k) * coeff[k] * tk
    return out


@dataclass
class DensePropagator:
    """Exact exp(-iMt) for a small Hermitian matrix, reused across times."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @classmethod
    def from_matrix(cls, m: np.ndarray) -> "DensePropagator":
        m = np.asarray(m)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DynamicsError("propagator needs a square matrix")
        herm_dev = float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0
        if herm_dev > 1e-9:
            raise DynamicsError(f"matrix is not Hermitian (deviation {herm_dev:.3g})")
        evals, evecs = np.linalg.eigh((m + m.conj().T) / 2.0)
        return cls(eigenvalues=evals, eigenvectors=evecs)

    def apply(self, psi: np.ndarray, t: float) -> np.ndarray:
        c = self.eigenvectors.conj().T @ psi
        return self.eigenvectors @ (np.exp(-1j * self.eigenvalues * t) * c)

    def apply_many(self, psi: np.ndarray, times: np.ndarray) -> np.ndarray:
        """Columns exp(-iMt) psi for each t."""
        c = self.eigenvectors.conj().T @ psi
        phases = np.exp(-1j * np.outer(self.eigenvalues, times))
        return self.eigenvectors @ (phases * c[:, None])


def _check_step(dt: float | None, est: float) -> None:
    if dt is not None:
        if dt <= 0:
            raise DynamicsError("dt must be positive")
        if est > 0 and dt > STEP_GUARD_FACTOR / est + 1e-15:
            raise DynamicsError(
                f"dt={dt:.3g} violates the step guard {STEP_GUARD_FACTOR}/|H| = "
                f"{STEP_GUARD_FACTOR / est:.3g}"
            )


def evolve(hamiltonian: TermList | np.ndarray, psi0: np.ndarray, t: float,
           dt: float | None = None) -> np.ndarray:
    """exp(-iHT) psi0.

    Dense Hermitian input is exponentiated exactly; a TermList is propagated
    by the Chebyshev expansion without forming the full matrix.  ``dt`` is
    validated against the step guard and, when given, sets the chunking of
    the run; accuracy does not depend on it.
    """
    psi0 = np.asarray(psi0, dtype=complex)
    if isinstance(hamiltonian, TermList):
        if psi0.shape != (hamiltonian.register.dim,):
            raise DynamicsError(
                f"state dimension {psi0.shape} does not match register {hamiltonian.register.dim}"
            )
        _check_step(dt, norm_estimate(hamiltonian))
        if not t:
            return psi0.copy()
        return _propagate_term_list(hamiltonian, psi0, t, _chebyshev_bound(hamiltonian))
    m = np.asarray(hamiltonian)
    if psi0.shape != (m.shape[0],):
        raise DynamicsError(f"state dimension {psi0.shape} does not match matrix {m.shape}")
    _check_step(dt, norm_estimate(m))
    return DensePropagator.from_matrix(m).apply(psi0, t)


# ---------------------------------------------------------------------------
# walk oracles


class WalkOracle:
    """Spectral toolkit for a quantum walk started at one vertex.

    Knows its exact eigensystem, the infinite-time-averaged distribution and
    the finite-time-averaged distribution (exact double sum, degeneracy
    aware).
    """

    def __init__(self, eigenvalues: np.ndarray, eigenvectors: np.ndarray, start: int = 0):
        self.eigenvalues = np.asarray(eigenvalues, dtype=float)
        self.eigenvectors = np.asarray(eigenvectors, dtype=complex)
        self.size = self.eigenvectors.shape[0]
        self.start = start
        self._coeff = self.eigenvectors.conj().T[:, start]  # <k|psi0>

    @classmethod
    def from_adjacency(cls, adjacency: np.ndarray, start: int = 0) -> "WalkOracle":
        evals, evecs = np.linalg.eigh(np.asarray(adjacency, dtype=complex))
        return cls(evals, evecs, start)

    def propagate(self, t: float) -> np.ndarray:
        return self.eigenvectors @ (np.exp(-1j * self.eigenvalues * t) * self._coeff)

    def limiting_distribution(self) -> np.ndarray:
        """Infinite-time average of the vertex distribution (degeneracy aware)."""
        order = np.argsort(self.eigenvalues)
        pi = np.zeros(self.size)
        k = 0
        while k < len(order):
            group = [order[k]]
            while k + 1 < len(order) and \
                    self.eigenvalues[order[k + 1]] - self.eigenvalues[group[0]] < DEGENERACY_TOL:
                k += 1
                group.append(order[k])
            amp = self.eigenvectors[:, group] @ self._coeff[group]
            pi += np.abs(amp) ** 2
            k += 1
        return pi

    def time_avg_dist(self, t: float) -> np.ndarray:
        """Vertex distribution averaged over measurement times uniform in [0, t]."""
        if t <= 0:
            raise DynamicsError("averaging window must be positive")
        delta = self.eigenvalues[:, None] - self.eigenvalues[None, :]
        kernel = np.ones_like(delta, dtype=complex)
        nz = np.abs(delta) > DEGENERACY_TOL
        kernel[nz] = (1.0 - np.exp(-1j * delta[nz] * t)) / (1j * delta[nz] * t)
        weighted = self.eigenvectors * self._coeff[None, :]
        dist = np.einsum("jk,jl,kl->j", weighted, weighted.conj(), kernel)
        return np.maximum(dist.real, 0.0)


def line_walk_oracle(n: int, start: int = 0) -> WalkOracle:
    """Analytic spectrum of the unit-weight path on ``n`` vertices.

    Eigenvalues 2 cos(pi k/(n+1)); eigenvector components
    sin(pi k (j+1)/(n+1)) up to normalization.
    """
    if n < 2:
        raise DynamicsError("path walk needs at least 2 vertices")
    k = np.arange(1, n + 1)
    evals = 2.0 * np.cos(np.pi * k / (n + 1))
    j = np.arange(1, n + 1)
    evecs = np.sqrt(2.0 / (n + 1)) * np.sin(np.pi * np.outer(j, k) / (n + 1))
    return WalkOracle(evals, evecs.astype(complex), start)


def comb_adjacency(n_main: int, spacing: int = 5) -> np.ndarray:
    """Path of ``n_main`` vertices with a pendant tooth every ``spacing`` steps."""
    teeth = [j for j in range(spacing, n_main - 1, spacing)]
    size = n_main + len(teeth)
    m = np.zeros((size, size))
    for j in range(n_main - 1):
        m[j, j + 1] = m[j + 1, j] = 1.0
    for i, j in enumerate(teeth):
        p = n_main + i
        m[j, p] = m[p, j] = 1.0
    return m


def comb_walk_oracle(n_main: int, spacing: int = 5, start: int = 0) -> WalkOracle:
    if n_main < 2:
        raise DynamicsError("comb walk needs at least 2 main vertices")
    return WalkOracle.from_adjacency(comb_adjacency(n_main, spacing), start)


def total_variation(p: np.ndarray, q: np.ndarray) -> float:
    return float(0.5 * np.sum(np.abs(p - q)))


# ---------------------------------------------------------------------------
# mixing-time scaling


@dataclass
class MixingEstimate:
    kind: str
    lengths: list[int]
    eps: list[float]
    t_mix: list[float]
    exponent: float
    exponent_stderr: float
    intercept: float
    failures: list[int] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "lengths": self.lengths,
            "eps": self.eps,
            "t_mix": self.t_mix,
            "exponent": self.exponent,
            "exponent_stderr": self.exponent_stderr,
            "intercept": self.intercept,
            "failures": self.failures,
        }


def _mixing_time(oracle: WalkOracle, eps: float, trials: int) -> float | None:
    """Smallest sampled T past which the time-averaged TV distance stays <= eps.

    The TV curve oscillates through the threshold before settling, so the
    bisection predicate demands the distance stay below eps across a full
    doubling window rather than at a single instant.
    """
    pi = oracle.limiting_distribution()

    def settled(t: float) -> bool:
        probes = t * 2.0 ** (np.arange(17) / 16.0)
        return all(total_variation(oracle.time_avg_dist(p), pi) <= eps for p in probes)

    t_hi = float(oracle.size)
    for _ in range(trials):
        if settled(t_hi):
            break
        t_hi *= 2.0
    else:
        return None
    t_lo = t_hi / 2.0
    for _ in range(trials):
        mid = 0.5 * (t_lo + t_hi)
        if settled(mid):
            t_hi = mid
        else:
            t_lo = mid
    return t_hi


def estimate_mixing_scaling(lengths, trials: int = 40, kind: str = "path",
                            spacing: int = 5) -> MixingEstimate:
    """Fit log T_mix against log N with the convergence target eps = 1/N."""
    lengths = [int(x) for x in lengths]
    if len(lengths) < 4:
        raise DynamicsError("need >= 4 lengths")
    if any(b <= a for a, b in zip(lengths, lengths[1:])):
        raise DynamicsError("lengths must be strictly increasing")
    if kind not in ("path", "comb"):
        raise DynamicsError(f"unknown walk kind {kind!r}")
    eps_list, t_list, failures = [], [], []
    for n in lengths:
        oracle = line_walk_oracle(n) if kind == "path" else comb_walk_oracle(n, spacing)
        eps = 1.0 / n
        tm = _mixing_time(oracle, eps, trials)
        eps_list.append(eps)
        if tm is None:
            failures.append(n)
            t_list.append(float("nan"))
        else:
            t_list.append(tm)
    good = [(n, t) for n, t in zip(lengths, t_list) if not math.isnan(t)]
    if len(good) < 2:
        raise DynamicsError(f"not enough converged lengths to fit (failures: {failures})")
    x = np.log([n for n, _ in good])
    y = np.log([t for _, t in good])
    a = np.vstack([x, np.ones_like(x)]).T
    sol, res, _, _ = np.linalg.lstsq(a, y, rcond=None)
    slope, intercept = float(sol[0]), float(sol[1])
    dof = max(len(good) - 2, 1)
    ss = float(res[0]) if res.size else float(np.sum((y - a @ sol) ** 2))
    stderr = math.sqrt(ss / dof / float(np.sum((x - x.mean()) ** 2)))
    return MixingEstimate(
        kind=kind, lengths=lengths, eps=eps_list, t_mix=t_list,
        exponent=slope, exponent_stderr=stderr, intercept=intercept,
        failures=failures,
    )


# ---------------------------------------------------------------------------
# the three-step protocol


@dataclass
class EvolutionReport:
    backend: str
    mode: str
    padding_factor: int
    useful_length: int
    horizon: float
    seed: int
    residual: float
    times: np.ndarray
    p_success: np.ndarray
    p_output_one: np.ndarray
    conditional_fidelity_min: float
    time_avg_clock_dist: dict[str, float]

    @property
    def success_time_avg(self) -> float:
        return float(np.mean(self.p_success))

    def to_dict(self) -> dict:
        cond = [None if math.isnan(x) else float(x) for x in self.p_output_one]
        return {
            "backend": self.backend,
            "mode": self.mode,
            "padding_factor": self.padding_factor,
            "useful_length": self.useful_length,
            "T": self.horizon,
            "seed": self.seed,
            "residual": self.residual,
            "times": [float(x) for x in self.times],
            "p_success": [float(x) for x in self.p_success],
            "p_output_one": cond,
            "success_time_avg": self.success_time_avg,
            "conditional_fidelity_min": self.conditional_fidelity_min,
            "time_avg_clock_dist": {k: float(v) for k, v in self.time_avg_clock_dist.items()},
        }


def _output_one_probability(phi: np.ndarray) -> float:
    """P(output work qubit reads 1); qubit 0 is the most significant axis."""
    half = phi.shape[0] // 2
    return float(np.sum(np.abs(phi[half:]) ** 2))


def auto_horizon(path_length: int) -> float:
    """T = 4 N^2, the quadratic mixing scale with a safety factor."""
    return 4.0 * float(path_length) ** 2


def run_protocol(circuit: Circuit, backend: str, padding_factor: int = 6,
                 horizon: float | str = "auto", samples: int = 128, seed: int = 0,
                 dt: float | None = None, full_space: bool = False) -> EvolutionReport:
    """Prepare the product state, evolve, and measure at random times.

    The work register starts in the circuit input, the clock at station 0.
    Success at a sampled time means the train sits at a station past the
    useful circuit length; the conditional output statistics and the
    fidelity of the conditional work state against the direct gate-by-gate
    simulation are reported alongside.
    """
    padded = pad_with_identities(circuit, padding_factor)
    compiled = compile_circuit(padded, backend)
    basis = build_computational_basis(compiled)
    walk = restrict_hamiltonian(compiled.hamiltonian, basis)

    useful = padded.useful_length
    n_path = len(compiled.clock_map.stops)
    t_max = auto_horizon(n_path) if horizon == "auto" else float(horizon)
    rng = np.random.default_rng(seed)
    times = np.sort(rng.uniform(0.0, t_max, size=int(samples)))

    oracle_state = apply_circuit_prefix(padded, useful, padded.input_state())
    station_idx = [(i, v.t) for i, v in enumerate(basis.vectors)
                   if v.kind == "station" and v.t > useful]
    out_prob = {}
    for _, t in station_idx:
        out_prob[t] = _output_one_probability(apply_circuit_prefix(padded, t, padded.input_state()))

    if full_space:
        return _run_full_space(compiled, basis, walk, times, t_max, station_idx,
                               out_prob, oracle_state, padding_factor, seed, dt)

    prop = DensePropagator.from_matrix(walk.matrix)
    e0 = np.zeros(len(basis), dtype=complex)
    e0[0] = 1.0  # basis vector 0 is the t=0 station
    amps = prop.apply_many(e0, times)
    probs = np.abs(amps) ** 2

    p_succ = np.zeros(len(times))
    p_one = np.zeros(len(times))
    fid_min = 1.0
    for i, t in station_idx:
        p_succ += probs[i]
        p_one += probs[i] * out_prob[t]
        phi_t = apply_circuit_prefix(padded, t, padded.input_state())
        fid_min = min(fid_min, abs(np.vdot(oracle_state, phi_t)))
    with np.errstate(invalid="ignore", divide="ignore"):
        cond = np.where(p_succ > 1e-12, p_one / p_succ, np.nan)
    dist = {v.label: float(np.mean(probs[i])) for i, v in enumerate(basis.vectors)}
    return EvolutionReport(
        backend=backend, mode="restricted", padding_factor=padding_factor,
        useful_length=useful, horizon=t_max, seed=seed, residual=walk.residual,
        times=times, p_success=p_succ, p_output_one=cond,
        conditional_fidelity_min=fid_min, time_avg_clock_dist=dist,
    )


def _dense_initial_state(compiled: CompiledHamiltonian) -> np.ndarray:
    """Product state: circuit input on the work block, train at station 0."""
    reg = compiled.register
    psi = np.zeros(reg.dim, dtype=complex)
    work_idx = int(compiled.circuit.input_bits, 2)
    clock_dim = reg.dim // 2**compiled.circuit.n
    clock_cfg = compiled.clock_map.stops[0].configs[0][0]
    psi[work_idx * clock_dim + reg.index_of(clock_cfg)] = 1.0
    return psi


def _run_full_space(compiled, basis: SubspaceBasis, walk, times, t_max, station_idx,
                    out_prob, oracle_state, padding_factor, seed, dt) -> EvolutionReport:
    reg = compiled.register
    if reg.qubit_equivalents() > FULLSPACE_GUARD_QUBITS:
        raise DimensionGuardError(
            f"instance needs {reg.qubit_equivalents():.1f} qubit equivalents, "
            f"guard is {FULLSPACE_GUARD_QUBITS}"
        )
    ham = compiled.hamiltonian
    _check_step(dt, norm_estimate(ham))
    bound = _chebyshev_bound(ham)
    clock_dim = reg.dim // basis.indexer.work_dim

    psi = _dense_initial_state(compiled)
    p_succ = np.zeros(len(times))
    p_one = np.zeros(len(times))
    fid_min = 1.0
    avg_dist = {v.label: 0.0 for v in basis.vectors}
    prev_t = 0.0
    for s, t in enumerate(times):
        if t > prev_t:
            psi = _propagate_term_list(ham, psi, t - prev_t, bound)
        prev_t = t
        grid = psi.reshape(basis.indexer.work_dim, clock_dim)
        for i, station_t in station_idx:
            key = next(iter(basis.vectors[i].parts))
            col = grid[:, key]
            p = float(np.vdot(col, col).real)
            p_succ[s] += p
            p_one[s] += p * out_prob[station_t]
            if p > 1e-12:
                fid_min = min(fid_min, abs(np.vdot(oracle_state, col)) / math.sqrt(p))
        for v in basis.vectors:
            amp = sum(np.vdot(wv, grid[:, key]) for key, wv in v.parts.items())
            avg_dist[v.label] += abs(amp) ** 2 / len(times)
    with np.errstate(invalid="ignore", divide="ignore"):
        cond = np.where(p_succ > 1e-12, p_one / p_succ, np.nan)
    return EvolutionReport(
        backend=compiled.backend, mode="full", padding_factor=padding_factor,
        useful_length=compiled.circuit.useful_length, horizon=t_max, seed=seed,
        residual=walk.residual, times=times, p_success=p_succ, p_output_one=cond,
        conditional_fidelity_min=fid_min, time_avg_clock_dist=avg_dist,
    )
