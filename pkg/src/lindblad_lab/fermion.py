"""Fermionic Ornstein-Uhlenbeck semigroup on N modes.

The CAR algebra is realised on (C^2)^{(x) N} by the Jordan-Wigner
transformation.  The generator, its closed-form eigenbasis and the uniform
mixing bound are all exposed, together with the classical walk obtained by
restricting to diagonal matrices.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import reduce

import numpy as np
from scipy.special import expit

from .lindblad import LindbladSpec, build_generator
from .linops import DensityState, adjoint

MAX_MODES = 10

SIGMA_PLUS = np.array([[0, 1], [0, 0]], dtype=float)
SIGMA_MINUS = np.array([[0, 0], [1, 0]], dtype=float)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=float)
EYE2 = np.eye(2)

# single-mode labels (i, j) in the order used for Gram and norm tables
MODE_LABELS = ((0, 0), (1, 0), (0, 1), (1, 1))


@dataclass(frozen=True)
class FermionSystem:
    N: int
    beta: float
    omegas: tuple[float, ...]

    def __post_init__(self):
        if not 1 <= self.N <= MAX_MODES:
            raise ValueError(f"mode count must be in 1..{MAX_MODES}, got {self.N}")
        if self.beta < 0:
            raise ValueError("beta must be non-negative")
        omegas = tuple(float(w) for w in self.omegas)
        if len(omegas) != self.N:
            raise ValueError(f"need {self.N} frequencies, got {len(omegas)}")
        object.__setattr__(self, "omegas", omegas)

    @property
    def dim(self) -> int:
        return 2 ** self.N

    @property
    def half_energies(self) -> np.ndarray:
        """beta * omega_k / 2."""
        return self.beta * np.array(self.omegas) / 2

    @property
    def rate_floor(self) -> float:
        """min_k 2 cosh(beta omega_k / 2)."""
        return float(np.min(2 * np.cosh(self.half_energies)))

    def hamiltonian(self) -> np.ndarray:
        pairs = jordan_wigner(self)
        return sum(w * (ad @ a) for w, (a, ad) in zip(self.omegas, pairs))

    def gibbs_state(self) -> DensityState:
        # product state; built mode by mode to stay exact at large beta*omega
        factors = []
        for x in self.half_energies:
            # occupation basis: index 0 is n=0, index 1 is n=1 (n = diag(0, 1))
            p1 = float(expit(-2 * x))
            factors.append(np.diag([1 - p1, p1]))
        return DensityState.from_matrix(reduce(np.kron, factors))


def _kron_all(mats) -> np.ndarray:
    return reduce(np.kron, mats)


def jordan_wigner(sys: FermionSystem) -> list[tuple[np.ndarray, np.ndarray]]:
    """Pairs (a_k, a_k*) with a_k = sz^{(k-1)} (x) s+ (x) 1^{(N-k)}."""
    N = sys.N
    out = []
    for k in range(N):
        a = _kron_all([SIGMA_Z] * k + [SIGMA_PLUS] + [EYE2] * (N - k - 1))
        ad = _kron_all([SIGMA_Z] * k + [SIGMA_MINUS] + [EYE2] * (N - k - 1))
        out.append((a, ad))
    return out


def car_residual(pairs) -> float:
    """Max entry deviation from the canonical anticommutation relations."""
    dim = pairs[0][0].shape[0]
    eye = np.eye(dim)
    worst = 0.0
    for h, (ah, ahd) in enumerate(pairs):
        for k, (ak, akd) in enumerate(pairs):
            worst = max(worst,
                        np.max(np.abs(ah @ ak + ak @ ah)),
                        np.max(np.abs(ahd @ akd + akd @ ahd)),
                        np.max(np.abs(ah @ akd + akd @ ah - (h == k) * eye)))
    return float(worst)


def parity_operator(sys: FermionSystem) -> np.ndarray:
    """w = prod_k (2 n_k - 1)."""
    pairs = jordan_wigner(sys)
    return reduce(lambda x, y: x @ y, [2 * (ad @ a) - np.eye(sys.dim) for a, ad in pairs])


def build_fermi_generator(sys: FermionSystem) -> LindbladSpec:
    """Jumps e^{b w_k/4} v_k and e^{-b w_k/4} v_k* with v_k = w a_k."""
    w = parity_operator(sys)
    jumps = []
    for x, (a, _) in zip(sys.half_energies, jordan_wigner(sys)):
        v = w @ a
        jumps.append(math.exp(x / 2) * v)
        jumps.append(math.exp(-x / 2) * adjoint(v))
    return LindbladSpec(sys.dim, tuple(jumps))


def gram_table(x: float) -> np.ndarray:
    """A(omega): squared GNS norms of the single-mode factors, rows = first label."""
    return np.array([[1.0, expit(-2 * x)], [expit(2 * x), 1.0]])


def norm_table(x: float) -> np.ndarray:
    """B(omega): operator norms of the single-mode factors."""
    return np.array([[1.0, 1.0], [1.0, math.exp(abs(x))]])


@dataclass(frozen=True)
class FermiEigensystem:
    labels: tuple[tuple[tuple[int, int], ...], ...]
    vectors: tuple[np.ndarray, ...]
    eigenvalues: np.ndarray
    gns_norms: np.ndarray
    op_norms: np.ndarray


def mode_factor(a: np.ndarray, ad: np.ndarray, label: tuple[int, int], x: float) -> np.ndarray:
    n = ad @ a
    eye = np.eye(a.shape[0])
    if label == (0, 0):
        return eye
    if label == (1, 0):
        return a
    if label == (0, 1):
        return ad
    return math.exp(x) * n - math.exp(-x) * (eye - n)


def fermi_eigensystem(sys: FermionSystem, build_vectors: bool = True) -> FermiEigensystem:
    """Closed-form eigenpairs of -L labelled by alpha in ({0,1}x{0,1})^N.

    ``gns_norms`` holds squared L2(sigma) norms (products of A entries),
    ``op_norms`` the operator norms (products of B entries).
    """
    xs = sys.half_energies
    pairs = jordan_wigner(sys) if build_vectors else None
    labels, vectors, evals, gns, ops = [], [], [], [], []
    for alpha in itertools.product(MODE_LABELS, repeat=sys.N):
        labels.append(alpha)
        evals.append(2 * sum((i + j) * math.cosh(x) for (i, j), x in zip(alpha, xs)))
        gns.append(math.prod(gram_table(x)[i, j] for (i, j), x in zip(alpha, xs)))
        ops.append(math.prod(norm_table(x)[i, j] for (i, j), x in zip(alpha, xs)))
        if build_vectors:
            factors = [mode_factor(a, ad, lab, x) for (a, ad), lab, x in zip(pairs, alpha, xs)]
            vectors.append(reduce(lambda p, q: p @ q, factors))
    return FermiEigensystem(tuple(labels), tuple(vectors), np.array(evals),
                            np.array(gns), np.array(ops))


def fermi_uniform_sum(sys: FermionSystem, t: float) -> float:
    """sum_{alpha != 0} e^{-2 lambda_alpha t} ||g_alpha||^2 / ||g_alpha||_sigma^2, as a product."""
    total = 1.0
    for x in sys.half_energies:
        c = math.cosh(x)
        total *= 1 + 4 * c * c * math.exp(-4 * c * t) + math.exp(2 * abs(x) - 8 * c * t)
    return total - 1.0


def fermi_mixing_bound(sys: FermionSystem, t: float) -> float:
    """((1 + 9 e^{-2 Lambda (t-1)})^N - 1) / 4, a bound on sup_rho d_tr(rho P_t, sigma)^2."""
    if t < 0:
        raise ValueError("time must be non-negative")
    lam = sys.rate_floor
    return float(math.expm1(sys.N * math.log1p(9 * math.exp(-2 * lam * (t - 1))))) / 4


def fermi_mixing_time(sys: FermionSystem, epsilon: float) -> float:
    """1 + log(9N / log(1 + 4 eps^2)) / (2 Lambda)."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    return 1 + math.log(9 * sys.N / math.log1p(4 * epsilon ** 2)) / (2 * sys.rate_floor)


def hypercube_restriction(sys: FermionSystem) -> np.ndarray:
    """Action of L on diagonal matrices as a 2^N x 2^N classical generator.

    Entry (x, y) is the coefficient of f(y) in (L f)(x) for f on {0,1}^N.
    """
    d = sys.dim
    L = build_generator(build_fermi_generator(sys))
    q = np.zeros((d, d))
    for y in range(d):
        e = np.zeros((d, d))
        e[y, y] = 1.0
        image = L.apply(e)
        q[:, y] = np.real(np.diag(image))
    # rows of a Markov generator sum to zero; remove round-off only
    q[np.abs(q) < 1e-14] = 0.0
    return q


def occupation(sys: FermionSystem, index: int) -> tuple[int, ...]:
    """Occupation numbers of computational basis vector ``index`` (mode 1 first)."""
    return tuple((index >> (sys.N - 1 - k)) & 1 for k in range(sys.N))


def fermi_spectral_basis(sys: FermionSystem):
    """The closed-form eigenvectors, normalised in L2(sigma), as a SpectralBasis."""
    from .lindblad import SpectralBasis
    from .linops import GnsSpace

    es = fermi_eigensystem(sys)
    order = np.argsort(es.eigenvalues, kind="stable")
    vectors = tuple(es.vectors[k] / math.sqrt(es.gns_norms[k]) for k in order)
    return SpectralBasis(es.eigenvalues[order], vectors, GnsSpace.of(sys.gibbs_state()))
