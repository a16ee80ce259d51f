"""Operators, density states, the GNS inner product and state divergences.

Operators are plain square ``numpy`` arrays.  States carry a validated
density matrix together with a faithfulness flag; a :class:`GnsSpace` caches
the inverse of a faithful state for repeated inner products.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

HERMITIAN_TOL = 1e-10
POSITIVITY_TOL = 1e-10
TRACE_TOL = 1e-10
FAITHFUL_TOL = 1e-10
LOG_FLOOR = 1e-12


class DimensionError(ValueError):
    """Operands live on spaces of different dimension."""


class StateError(ValueError):
    """A matrix fails the density-matrix or faithfulness requirements."""


def as_operator(a, dim: int | None = None) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"operator must be square, got shape {a.shape}")
    if dim is not None and a.shape[0] != dim:
        raise DimensionError(f"expected dimension {dim}, got {a.shape[0]}")
    return a


def adjoint(a) -> np.ndarray:
    return np.conj(np.asarray(a)).T


def is_hermitian(a, tol: float = HERMITIAN_TOL) -> bool:
    a = np.asarray(a)
    return bool(np.max(np.abs(a - adjoint(a)), initial=0.0) <= tol)


def hermitian_part(a) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    return 0.5 * (a + adjoint(a))


@dataclass(frozen=True)
class DensityState:
    """Positive unit-trace matrix.  Diagonal states double as distributions."""

    op: np.ndarray
    faithful: bool

    @property
    def dim(self) -> int:
        return self.op.shape[0]

    @classmethod
    def from_matrix(cls, rho, tol: float = POSITIVITY_TOL) -> "DensityState":
        rho = as_operator(rho)
        if not is_hermitian(rho, tol):
            raise StateError("density matrix is not Hermitian")
        rho = hermitian_part(rho)
        evals = np.linalg.eigvalsh(rho)
        if evals[0] < -tol:
            raise StateError(f"density matrix has negative eigenvalue {evals[0]:.3e}")
        if abs(np.trace(rho).real - 1.0) > TRACE_TOL:
            raise StateError(f"trace {np.trace(rho).real!r} differs from 1")
        rho.setflags(write=False)
        return cls(op=rho, faithful=bool(evals[0] > FAITHFUL_TOL))

    @classmethod
    def from_probabilities(cls, p) -> "DensityState":
        return cls.from_matrix(np.diag(np.asarray(p, dtype=float)))

    @classmethod
    def maximally_mixed(cls, dim: int) -> "DensityState":
        return cls.from_matrix(np.eye(dim) / dim)

    @classmethod
    def gibbs(cls, h, beta: float) -> "DensityState":
        """Thermal state exp(-beta h)/Z for Hermitian ``h``."""
        h = as_operator(h)
        evals, evecs = np.linalg.eigh(hermitian_part(h))
        w = np.exp(-beta * (evals - evals.min()))
        w /= w.sum()
        return cls.from_matrix((evecs * w) @ adjoint(evecs))

    def expect(self, a) -> complex:
        """The state evaluated on ``a``, i.e. tr(rho a)."""
        return complex(np.trace(self.op @ np.asarray(a)))


@dataclass(frozen=True)
class GnsSpace:
    """L2(sigma): End(H) with <a, b> = tr(a* sigma b) for faithful sigma."""

    sigma: DensityState
    sigma_inverse: np.ndarray = field(repr=False)

    @classmethod
    def of(cls, sigma: DensityState) -> "GnsSpace":
        if not sigma.faithful:
            raise StateError("GNS inner product requires a faithful state")
        evals, evecs = np.linalg.eigh(sigma.op)
        inv = (evecs / evals) @ adjoint(evecs)
        inv.setflags(write=False)
        return cls(sigma=sigma, sigma_inverse=inv)

    @property
    def dim(self) -> int:
        return self.sigma.dim

    def sqrt_factors(self) -> tuple[np.ndarray, np.ndarray]:
        """sigma^{1/2} and sigma^{-1/2}."""
        evals, evecs = np.linalg.eigh(self.sigma.op)
        root = np.sqrt(evals)
        return (evecs * root) @ adjoint(evecs), (evecs / root) @ adjoint(evecs)


def _check_dims(*ops, dim: int) -> None:
    for a in ops:
        if np.shape(a) != (dim, dim):
            raise DimensionError(f"expected {dim}x{dim} operator, got shape {np.shape(a)}")


def gns_inner(space: GnsSpace, a, b) -> complex:
    _check_dims(a, b, dim=space.dim)
    a = np.asarray(a)
    return complex(np.trace(adjoint(a) @ space.sigma.op @ np.asarray(b)))


def gns_norm(space: GnsSpace, a) -> float:
    return float(np.sqrt(max(gns_inner(space, a, a).real, 0.0)))


def operator_norm(a) -> float:
    a = np.asarray(a)
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a, 2))


def trace_distance(rho: DensityState, sigma: DensityState) -> float:
    """Half the trace norm of rho - sigma, via the spectrum of the difference."""
    if rho.dim != sigma.dim:
        raise DimensionError(f"dimensions {rho.dim} and {sigma.dim} differ")
    # averaging over both orderings makes the result exactly symmetric
    diff = hermitian_part(rho.op - sigma.op)
    total = np.abs(np.linalg.eigvalsh(diff)).sum() + np.abs(np.linalg.eigvalsh(-diff)).sum()
    return float(min(0.25 * total, 1.0))


def chi2_divergence(rho: DensityState, space: GnsSpace) -> float:
    """tr((rho - sigma) sigma^{-1} (rho - sigma))."""
    if rho.dim != space.dim:
        raise DimensionError(f"dimensions {rho.dim} and {space.dim} differ")
    d = rho.op - space.sigma.op
    return float(max(np.trace(d @ space.sigma_inverse @ d).real, 0.0))


def _log_on_support(evals: np.ndarray, evecs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    support = evals > LOG_FLOOR
    logs = np.zeros_like(evals)
    logs[support] = np.log(evals[support])
    return (evecs * logs) @ adjoint(evecs), evecs[:, support]


def relative_entropy(rho: DensityState, sigma: DensityState) -> float:
    """Ent(rho|sigma) = tr(rho (log rho - log sigma)), with 0 log 0 = 0."""
    if rho.dim != sigma.dim:
        raise DimensionError(f"dimensions {rho.dim} and {sigma.dim} differ")
    r_vals, r_vecs = np.linalg.eigh(rho.op)
    s_vals, s_vecs = np.linalg.eigh(sigma.op)
    log_rho, rho_support = _log_on_support(r_vals, r_vecs)
    log_sigma, sigma_support = _log_on_support(s_vals, s_vecs)
    # support(rho) must lie in the range of the sigma support projector
    proj = sigma_support @ adjoint(sigma_support)
    leak = rho_support - proj @ rho_support
    if leak.size and np.max(np.abs(leak)) > np.sqrt(LOG_FLOOR):
        raise StateError("support of rho is not contained in support of sigma")
    return float(np.trace(rho.op @ (log_rho - log_sigma)).real)


def random_state(dim: int, rng: np.random.Generator, rank: int | None = None) -> DensityState:
    """Wishart-type sample G G*/tr(G G*) with complex Gaussian G."""
    k = dim if rank is None else rank
    g = rng.standard_normal((dim, k)) + 1j * rng.standard_normal((dim, k))
    m = g @ adjoint(g)
    return DensityState.from_matrix(m / np.trace(m).real)


def random_operator(dim: int, rng: np.random.Generator) -> np.ndarray:
    return rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))


def random_hermitian(dim: int, rng: np.random.Generator) -> np.ndarray:
    return hermitian_part(random_operator(dim, rng))
