"""Lindblad generators on End(H), detailed balance, spectra and trace-distance bounds.

Superoperators are stored as ``dim**2 x dim**2`` matrices acting on the
row-major vectorisation of an operator, so ``vec(x @ a @ y) =
kron(x, y.T) @ vec(a)``.  Spectra are always reported for ``-L`` so that
eigenvalues are non-negative.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.linalg import expm, null_space
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .linops import (
    HERMITIAN_TOL,
    DensityState,
    DimensionError,
    GnsSpace,
    StateError,
    adjoint,
    as_operator,
    gns_norm,
    is_hermitian,
    operator_norm,
    trace_distance,
)

SELF_ADJOINT_TOL = 1e-8
CLUSTER_TOL = 1e-8


class GeneratorError(ValueError):
    """Invalid generator input or a generator failing a structural requirement."""


class NonErgodicError(GeneratorError):
    """Zero is a degenerate eigenvalue of -L, so no spectral gap exists."""


@dataclass(frozen=True)
class LindbladSpec:
    dim: int
    jumps: tuple[np.ndarray, ...] = ()
    hamiltonian: np.ndarray | None = None

    def __post_init__(self):
        jumps = tuple(as_operator(j, self.dim) for j in self.jumps)
        object.__setattr__(self, "jumps", jumps)
        if self.hamiltonian is not None:
            h = as_operator(self.hamiltonian, self.dim)
            if not is_hermitian(h, HERMITIAN_TOL):
                raise GeneratorError("Hamiltonian is not Hermitian")
            object.__setattr__(self, "hamiltonian", h)

    def dissipative_part(self) -> "LindbladSpec":
        return LindbladSpec(self.dim, self.jumps)


@dataclass(frozen=True)
class Superoperator:
    dim: int
    matrix: np.ndarray
    basis: str = "matrix-units-row-major"

    def apply(self, a) -> np.ndarray:
        a = as_operator(a, self.dim)
        return (self.matrix @ a.reshape(-1)).reshape(self.dim, self.dim)

    def __add__(self, other: "Superoperator") -> "Superoperator":
        return Superoperator(self.dim, self.matrix + other.matrix, self.basis)

    def __neg__(self) -> "Superoperator":
        return Superoperator(self.dim, -self.matrix, self.basis)

    def semigroup(self, t: float) -> np.ndarray:
        """Matrix of exp(tL)."""
        return expm(t * self.matrix)


@dataclass(frozen=True)
class SpectralBasis:
    """Eigenpairs of -L, ascending, orthonormal in L2(sigma)."""

    eigenvalues: np.ndarray
    vectors: tuple[np.ndarray, ...] = field(repr=False)
    space: GnsSpace = field(repr=False)

    def __len__(self) -> int:
        return len(self.eigenvalues)


def left_mult(x) -> np.ndarray:
    x = np.asarray(x)
    return np.kron(x, np.eye(x.shape[0]))


def right_mult(x) -> np.ndarray:
    x = np.asarray(x)
    return np.kron(np.eye(x.shape[0]), x.T)


def sandwich(x, y) -> np.ndarray:
    """Superoperator a -> x a y."""
    return np.kron(np.asarray(x), np.asarray(y).T)


def commutator_map(x) -> np.ndarray:
    """Superoperator a -> [x, a]."""
    return left_mult(x) - right_mult(x)


def build_generator(spec: LindbladSpec, include_hamiltonian: bool = True) -> Superoperator:
    """L a = i[h,a] + sum_j ([l_j*, a] l_j + l_j* [a, l_j])."""
    d = spec.dim
    m = np.zeros((d * d, d * d), dtype=complex)
    if include_hamiltonian and spec.hamiltonian is not None:
        m += 1j * commutator_map(spec.hamiltonian)
    for ell in spec.jumps:
        ld = adjoint(ell)
        ldl = ld @ ell
        m += 2 * sandwich(ld, ell) - left_mult(ldl) - right_mult(ldl)
    return Superoperator(d, m)


def build_dual(spec: LindbladSpec) -> Superoperator:
    """L^dagger rho = -i[h,rho] + sum_j ([l_j rho, l_j*] + [l_j, rho l_j*])."""
    d = spec.dim
    m = np.zeros((d * d, d * d), dtype=complex)
    if spec.hamiltonian is not None:
        m -= 1j * commutator_map(spec.hamiltonian)
    for ell in spec.jumps:
        ld = adjoint(ell)
        ldl = ld @ ell
        m += 2 * sandwich(ell, ld) - left_mult(ldl) - right_mult(ldl)
    return Superoperator(d, m)


def ad_sigma(sigma: DensityState, a) -> np.ndarray:
    evals, evecs = np.linalg.eigh(sigma.op)
    inv = (evecs / evals) @ adjoint(evecs)
    return sigma.op @ np.asarray(a) @ inv


@dataclass(frozen=True)
class DetailedBalanceReport:
    holds_sufficient: bool
    holds_necessary: bool
    residual_sufficient: float
    residual_necessary: float


def check_detailed_balance(spec: LindbladSpec, sigma: DensityState,
                           tol: float = 1e-9) -> DetailedBalanceReport:
    """Test the tensor conditions for self-adjointness of L0 in L2(sigma).

    The sufficient condition is ``sum l (x) Ad(l*) = sum l* (x) l``; the
    necessary-and-sufficient one is the weaker identity involving
    ``1 (x) sum (Ad(l* l) - l* l)``.  Residuals are max-entry deviations.
    """
    if not sigma.faithful:
        raise StateError("detailed balance needs a faithful reference state")
    if sigma.dim != spec.dim:
        raise DimensionError("state and generator dimensions differ")
    d = spec.dim
    lhs = np.zeros((d * d, d * d), dtype=complex)
    rhs = np.zeros_like(lhs)
    drift = np.zeros((d, d), dtype=complex)
    for ell in spec.jumps:
        ld = adjoint(ell)
        lhs += np.kron(ell, ad_sigma(sigma, ld))
        rhs += np.kron(ld, ell)
        drift += ad_sigma(sigma, ld @ ell) - ld @ ell
    res_suff = float(np.max(np.abs(lhs - rhs), initial=0.0))
    res_nec = float(np.max(np.abs(2 * (lhs - rhs) - np.kron(np.eye(d), drift)), initial=0.0))
    scale = max(1.0, sum(operator_norm(ell) ** 2 for ell in spec.jumps))
    return DetailedBalanceReport(
        holds_sufficient=res_suff <= tol * scale,
        holds_necessary=res_nec <= 2 * tol * scale,
        residual_sufficient=res_suff,
        residual_necessary=res_nec,
    )


def ad_sigma_construction(sigma: DensityState, pairs: Sequence[tuple[float, np.ndarray]],
                          tol: float = 1e-8) -> LindbladSpec:
    """Jumps ``exp(omega/4) v`` from eigenvectors ``sigma v sigma^-1 = e^omega v``.

    The family must be closed under ``(omega, v) -> (-omega, v*)``.
    """
    if not sigma.faithful:
        raise StateError("construction needs a faithful state")
    d = sigma.dim
    pairs = [(float(w), as_operator(v, d)) for w, v in pairs]
    for w, v in pairs:
        scale = max(1.0, operator_norm(v))
        if np.max(np.abs(ad_sigma(sigma, v) - np.exp(w) * v)) > tol * scale * max(1.0, np.exp(w)):
            raise GeneratorError(f"operator is not an Ad_sigma eigenvector with omega={w}")
    for w, v in pairs:
        vd = adjoint(v)
        scale = max(1.0, operator_norm(v))
        if not any(abs(w2 + w) <= tol and np.max(np.abs(v2 - vd)) <= tol * scale
                   for w2, v2 in pairs):
            raise GeneratorError(f"pair list lacks the adjoint partner of omega={w}")
    return LindbladSpec(d, tuple(np.exp(w / 4) * v for w, v in pairs))


def gns_metric_factors(space: GnsSpace) -> tuple[np.ndarray, np.ndarray]:
    """W^{1/2} and W^{-1/2} for the vectorised GNS metric W = sigma (x) 1."""
    root, inv_root = space.sqrt_factors()
    eye = np.eye(space.dim)
    return np.kron(root, eye), np.kron(inv_root, eye)


def gns_gram(L: Superoperator, space: GnsSpace) -> np.ndarray:
    """Matrix of L in an L2(sigma)-orthonormal basis."""
    w_half, w_inv_half = gns_metric_factors(space)
    return w_half @ L.matrix @ w_inv_half


def self_adjoint_residual(L: Superoperator, space: GnsSpace) -> float:
    g = gns_gram(L, space)
    return float(np.max(np.abs(g - adjoint(g)), initial=0.0))


def _phase_fix(v: np.ndarray) -> np.ndarray:
    flat = v.reshape(-1)
    k = int(np.argmax(np.abs(flat) - 1e-12 * np.arange(flat.size)))
    phase = flat[k] / abs(flat[k])
    return v / phase


def spectral_decomposition(L: Superoperator, space: GnsSpace,
                           tol: float = SELF_ADJOINT_TOL) -> SpectralBasis:
    """Eigenpairs of -L for L self-adjoint in L2(sigma)."""
    if L.dim != space.dim:
        raise DimensionError("generator and state dimensions differ")
    g = gns_gram(L, space)
    scale = max(1.0, float(np.max(np.abs(g), initial=0.0)))
    if np.max(np.abs(g - adjoint(g)), initial=0.0) > tol * scale:
        raise GeneratorError("generator is not self-adjoint in L2(sigma)")
    g = 0.5 * (g + adjoint(g))
    evals, evecs = np.linalg.eigh(-g)
    _, w_inv_half = gns_metric_factors(space)
    d = space.dim
    raw = w_inv_half @ evecs
    vectors = [_phase_fix(raw[:, k].reshape(d, d)) for k in range(len(evals))]

    # deterministic order inside clusters of (numerically) equal eigenvalues
    order: list[int] = []
    start = 0
    while start < len(evals):
        stop = start + 1
        while stop < len(evals) and evals[stop] - evals[stop - 1] < CLUSTER_TOL * scale:
            stop += 1
        order.extend(sorted(range(start, stop), key=lambda k: _lex_key(vectors[k])))
        start = stop
    evals = np.where(np.abs(evals) < CLUSTER_TOL * scale, 0.0, evals)
    return SpectralBasis(
        eigenvalues=evals[order],
        vectors=tuple(vectors[k] for k in order),
        space=space,
    )


def _lex_key(v: np.ndarray) -> tuple:
    flat = v.reshape(-1)
    k = int(np.argmax(np.abs(flat) > 1e-9))
    return (k, -round(flat[k].real, 9), -round(flat[k].imag, 9))


def check_ergodic(spec: LindbladSpec, tol: float = 1e-9) -> bool:
    """True iff the commutant of the jumps and their adjoints is C 1."""
    d = spec.dim
    if d == 1:
        return True
    if not spec.jumps:
        return False
    blocks = []
    for ell in spec.jumps:
        blocks.append(commutator_map(ell))
        blocks.append(commutator_map(adjoint(ell)))
    stacked = np.vstack(blocks)
    scale = max(1.0, float(np.max(np.abs(stacked))))
    return null_space(stacked, rcond=tol * scale).shape[1] == 1


def spectral_gap(basis: SpectralBasis, tol: float = 1e-8) -> float:
    """Second smallest eigenvalue of -L; raises for a degenerate zero eigenvalue."""
    evals = basis.eigenvalues
    if len(evals) < 2:
        raise NonErgodicError("one-dimensional algebra has no gap")
    if evals[1] <= tol:
        raise NonErgodicError("zero eigenvalue of -L is degenerate; generator not ergodic")
    return float(evals[1])


def state_coefficients(basis: SpectralBasis, rho: DensityState) -> np.ndarray:
    """rho(f_j) = tr(rho f_j) for every basis vector."""
    return np.array([rho.expect(f) for f in basis.vectors])


def ergodicity_bound(basis: SpectralBasis, rho: DensityState, t: float) -> float:
    """1/4 sum_{j>=1} exp(-2 lambda_j t) |rho(f_j)|^2, a bound on d_tr(rho P_t, sigma)^2."""
    coeffs = np.abs(state_coefficients(basis, rho)[1:]) ** 2
    return float(0.25 * np.sum(np.exp(-2 * basis.eigenvalues[1:] * t) * coeffs))


def ergodicity_bound_uniform(basis: SpectralBasis, t: float) -> float:
    """1/4 sum_{j>=1} exp(-2 lambda_j t) ||f_j||^2, uniform over initial states."""
    norms = np.array([operator_norm(f) ** 2 for f in basis.vectors[1:]])
    return float(0.25 * np.sum(np.exp(-2 * basis.eigenvalues[1:] * t) * norms))


def evolve_state(spec: LindbladSpec, rho: DensityState, t: float,
                 tol: float = 1e-9) -> DensityState:
    """rho P_t = exp(t L^dagger) rho."""
    if t < 0:
        raise ValueError("time must be non-negative")
    if rho.dim != spec.dim:
        raise DimensionError("state and generator dimensions differ")
    if t == 0:
        return rho
    d = spec.dim
    out = (expm(t * build_dual(spec).matrix) @ rho.op.reshape(-1)).reshape(d, d)
    out = 0.5 * (out + adjoint(out))
    drift = abs(np.trace(out).real - 1.0)
    if drift > tol:
        raise GeneratorError(f"trace drifted by {drift:.2e} under evolution")
    evals = np.linalg.eigvalsh(out)
    if evals[0] < -max(tol, 1e-10):
        raise GeneratorError(f"evolution produced negative eigenvalue {evals[0]:.2e}")
    out /= np.trace(out).real
    return DensityState.from_matrix(out, tol=max(tol, 1e-10))


def dual_propagator(spec: LindbladSpec, t: float) -> np.ndarray:
    """Matrix of exp(t L^dagger) on row-major vectorised density matrices."""
    if t < 0:
        raise ValueError("time must be non-negative")
    d = spec.dim
    if t == 0:
        return np.eye(d * d, dtype=complex)
    return block_expm(t * build_dual(spec).matrix)


def block_expm(m: np.ndarray) -> np.ndarray:
    """expm(m), exponentiating each connected component of the sparsity graph separately."""
    pattern = csr_matrix(np.abs(m) > 0)
    count, labels = connected_components(pattern, directed=False)
    if count == 1:
        return expm(m)
    out = np.zeros_like(m, dtype=complex)
    for c in range(count):
        idx = np.flatnonzero(labels == c)
        out[np.ix_(idx, idx)] = expm(m[np.ix_(idx, idx)])
    return out


def evolve_many(spec: LindbladSpec, states: Sequence[DensityState], t: float,
                tol: float = 1e-9) -> list[DensityState]:
    """evolve_state for many initial states sharing one propagator."""
    prop = dual_propagator(spec, t)
    d = spec.dim
    out = []
    for rho in states:
        if rho.dim != d:
            raise DimensionError("state and generator dimensions differ")
        m = (prop @ rho.op.reshape(-1)).reshape(d, d)
        m = 0.5 * (m + adjoint(m))
        drift = abs(np.trace(m).real - 1.0)
        if drift > tol:
            raise GeneratorError(f"trace drifted by {drift:.2e} under evolution")
        out.append(DensityState.from_matrix(m / np.trace(m).real, tol=max(tol, 1e-10)))
    return out


def sampled_trace_distances(spec: LindbladSpec, sigma: DensityState,
                            states: Sequence[DensityState], t: float) -> np.ndarray:
    """d_tr(rho P_t, sigma) for every sampled rho."""
    return np.array([trace_distance(r, sigma) for r in evolve_many(spec, states, t)])


def check_time_reversal(spec: LindbladSpec, sigma: DensityState, times: Sequence[float],
                        ops: Sequence[np.ndarray], horizon: float | None = None) -> float:
    """|tr(sigma a_1(t_1)...a_n(t_n)) - tr(sigma a_1(T-t_1)...a_n(T-t_n))|.

    ``times`` ascending in [0, T]; ``T`` defaults to the last time.
    """
    times = [float(t) for t in times]
    if len(times) != len(ops) or not ops:
        raise ValueError("need one time per operator")
    if any(b < a for a, b in zip(times, times[1:])) or times[0] < 0:
        raise ValueError("times must be ascending and non-negative")
    T = times[-1] if horizon is None else float(horizon)
    if T < times[-1]:
        raise ValueError("horizon precedes the last time")
    d = spec.dim
    gen = build_generator(spec).matrix
    ops = [as_operator(a, d) for a in ops]

    def P(s: float, a: np.ndarray) -> np.ndarray:
        if s == 0:
            return a
        return (expm(s * gen) @ a.reshape(-1)).reshape(d, d)

    n = len(ops)
    # forward: P_{t1}(a1 P_{t2-t1}(a2 ... P_{tn-t(n-1)}(an)))
    y = ops[-1]
    for k in range(n - 2, -1, -1):
        y = ops[k] @ P(times[k + 1] - times[k], y)
    forward = np.trace(sigma.op @ P(times[0], y))

    # reversed: times T - t_k, relabelled ascending as s[1] <= ... <= s[n], s[0] = 0
    # value P_{s1}( ... P_{s(n-1)-s(n-2)}(P_{sn-s(n-1)}(a1) a2) ... an)
    s = [0.0] + [T - t for t in reversed(times)]
    x = P(s[n] - s[n - 1], ops[0])
    for k in range(1, n):
        x = P(s[n - k] - s[n - k - 1], x @ ops[k])
    backward = np.trace(sigma.op @ x)
    return float(abs(forward - backward))


def dirichlet_form(spec: LindbladSpec, space: GnsSpace, a) -> float:
    """sum_j ||[l_j*, a]||_sigma^2."""
    return float(sum(gns_norm(space, adjoint(ell) @ a - a @ adjoint(ell)) ** 2
                     for ell in spec.jumps))
