"""Bosonic Ornstein-Uhlenbeck semigroup.

Two routes are provided.  The exact route works in the Weyl algebra with
normal-ordered polynomials, on which the adjoint Lindblad action closes, so
eigen-relations can be checked without truncation error.  The truncated
route represents a_k, a_k* on a finite Fock space and is used wherever traces
are needed (norms, evolution, moments).

Exact-rational mode: build the system with :meth:`BosonSystem.exact` from the
rationals ``q_k = exp(beta*omega_k/2)``; every derived constant is then a
:class:`fractions.Fraction`.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from numbers import Number
from typing import Iterable, Mapping

import numpy as np
import sympy

from .lindblad import LindbladSpec
from .linops import DensityState, adjoint

MAX_DEGREE = 24
PRUNE_TOL = 1e-14
TAIL_TOL = 1e-12


class CutoffError(ValueError):
    """Truncation too small for the requested Gibbs-tail accuracy."""


@dataclass(frozen=True)
class BosonSystem:
    beta: float
    omegas: tuple[float, ...]
    exp_half: tuple = field(default=(), repr=False)

    def __post_init__(self):
        omegas = tuple(float(w) for w in self.omegas)
        if not omegas:
            raise ValueError("need at least one mode")
        if self.beta <= 0 or any(w <= 0 for w in omegas):
            raise ValueError("beta and all frequencies must be strictly positive")
        object.__setattr__(self, "omegas", omegas)
        if not self.exp_half:
            object.__setattr__(self, "exp_half",
                               tuple(math.exp(self.beta * w / 2) for w in omegas))

    @classmethod
    def exact(cls, exp_half: Iterable) -> "BosonSystem":
        """System with exp(beta*omega_k/2) = q_k given as rationals (beta fixed to 1)."""
        qs = tuple(Fraction(q) for q in exp_half)
        if any(q <= 1 for q in qs):
            raise ValueError("exp(beta*omega/2) must exceed 1")
        return cls(1.0, tuple(2 * math.log(q) for q in qs), qs)

    @property
    def N(self) -> int:
        return len(self.omegas)

    @property
    def is_exact(self) -> bool:
        return isinstance(self.exp_half[0], Fraction)

    @property
    def exp_minus_half(self) -> tuple:
        return tuple(1 / q for q in self.exp_half)

    @property
    def sh(self) -> tuple:
        """sinh(beta omega_k / 2)."""
        return tuple((q - 1 / q) / 2 for q in self.exp_half)

    @property
    def gammas(self) -> tuple:
        """gamma_k = e^{-x}/(2 sh x), the mean occupation number."""
        return tuple((1 / q) / (q - 1 / q) for q in self.exp_half)

    @property
    def deltas(self) -> tuple:
        """delta_k = e^{x}/(2 sh x) = gamma_k + 1."""
        return tuple(q / (q - 1 / q) for q in self.exp_half)

    @property
    def rate_floor(self) -> float:
        """Lambda = min_k 2 sh(beta omega_k / 2)."""
        return float(min(2 * s for s in self.sh))

    def eigenvalue(self, ell) -> Number:
        """lambda_ell = 2 sum_k sh(beta omega_k/2) ell_k."""
        return 2 * sum(s * e for s, e in zip(self.sh, ell))


MultiIndex = tuple[int, ...]


class NormalOrderedElement:
    """Finite sum of c_{p,q} (a*)^p a^q over multi-indices, kept normal ordered."""

    __slots__ = ("N", "terms")

    def __init__(self, N: int, terms: Mapping[tuple[MultiIndex, MultiIndex], Number] | None = None):
        self.N = N
        self.terms: dict[tuple[MultiIndex, MultiIndex], Number] = {}
        for (p, q), c in (terms or {}).items():
            p, q = tuple(p), tuple(q)
            if len(p) != N or len(q) != N or min(p + q) < 0:
                raise ValueError(f"bad multi-index pair {(p, q)} for {N} modes")
            self._accumulate(p, q, c)
        self._prune()

    # construction helpers
    @classmethod
    def identity(cls, N: int, coeff: Number = 1) -> "NormalOrderedElement":
        z = (0,) * N
        return cls(N, {(z, z): coeff})

    @classmethod
    def monomial(cls, p: MultiIndex, q: MultiIndex, coeff: Number = 1) -> "NormalOrderedElement":
        return cls(len(p), {(tuple(p), tuple(q)): coeff})

    @classmethod
    def annihilator(cls, N: int, k: int) -> "NormalOrderedElement":
        return cls.monomial((0,) * N, _unit(N, k))

    @classmethod
    def creator(cls, N: int, k: int) -> "NormalOrderedElement":
        return cls.monomial(_unit(N, k), (0,) * N)

    def _accumulate(self, p, q, c) -> None:
        key = (p, q)
        self.terms[key] = self.terms.get(key, 0) + c

    def _prune(self) -> None:
        for key in [k for k, c in self.terms.items() if _is_negligible(c)]:
            del self.terms[key]

    # algebra
    def copy(self) -> "NormalOrderedElement":
        out = NormalOrderedElement(self.N)
        out.terms = dict(self.terms)
        return out

    def __add__(self, other: "NormalOrderedElement") -> "NormalOrderedElement":
        out = self.copy()
        for (p, q), c in other.terms.items():
            out._accumulate(p, q, c)
        out._prune()
        return out

    def __neg__(self) -> "NormalOrderedElement":
        return self.scale(-1)

    def __sub__(self, other: "NormalOrderedElement") -> "NormalOrderedElement":
        return self + (-other)

    def scale(self, c: Number) -> "NormalOrderedElement":
        out = NormalOrderedElement(self.N)
        out.terms = {k: c * v for k, v in self.terms.items()}
        out._prune()
        return out

    def __mul__(self, other):
        if isinstance(other, NormalOrderedElement):
            return self.product(other)
        return self.scale(other)

    __rmul__ = scale

    def product(self, other: "NormalOrderedElement") -> "NormalOrderedElement":
        """Normal-ordered product via a^q (a*)^r = sum_k k! C(q,k) C(r,k) (a*)^{r-k} a^{q-k}."""
        if other.N != self.N:
            raise ValueError("mode counts differ")
        out = NormalOrderedElement(self.N)
        for (p, q), c1 in self.terms.items():
            for (r, s), c2 in other.terms.items():
                ranges = [range(min(qi, ri) + 1) for qi, ri in zip(q, r)]
                for k in itertools.product(*ranges):
                    w = 1
                    for qi, ri, ki in zip(q, r, k):
                        w *= math.factorial(ki) * math.comb(qi, ki) * math.comb(ri, ki)
                    new_p = tuple(pi + ri - ki for pi, ri, ki in zip(p, r, k))
                    new_q = tuple(qi + si - ki for qi, si, ki in zip(q, s, k))
                    out._accumulate(new_p, new_q, w * c1 * c2)
        out._prune()
        return out

    def commutator(self, other: "NormalOrderedElement") -> "NormalOrderedElement":
        return self.product(other) - other.product(self)

    def max_abs_coefficient(self) -> float:
        return max((abs(complex(c)) for c in self.terms.values()), default=0.0)

    def degree(self) -> int:
        return max((sum(p) + sum(q) for p, q in self.terms), default=0)

    def __eq__(self, other) -> bool:
        return isinstance(other, NormalOrderedElement) and (self - other).terms == {}

    def __repr__(self) -> str:
        body = " + ".join(f"{c}*(a*)^{p} a^{q}" for (p, q), c in sorted(self.terms.items()))
        return f"NormalOrderedElement(N={self.N}, {body or '0'})"


def _unit(N: int, k: int) -> MultiIndex:
    return tuple(int(i == k) for i in range(N))


def _is_negligible(c) -> bool:
    if isinstance(c, (int, Fraction)):
        return c == 0
    if isinstance(c, sympy.Basic):
        return sympy.simplify(c) == 0
    return abs(c) < PRUNE_TOL


def apply_boson_generator(sys: BosonSystem, x: NormalOrderedElement) -> NormalOrderedElement:
    """L x = sum_k e^{b w/2}(2 a* x a - {a* a, x}) + e^{-b w/2}(2 a x a* - {a a*, x})."""
    N = sys.N
    out = NormalOrderedElement(N)
    for k in range(N):
        a = NormalOrderedElement.annihilator(N, k)
        ad = NormalOrderedElement.creator(N, k)
        up, down = sys.exp_half[k], sys.exp_minus_half[k]
        t1 = ad.commutator(x).product(a) + ad.product(x.commutator(a))
        t2 = a.commutator(x).product(ad) + a.product(x.commutator(ad))
        out = out + t1.scale(up) + t2.scale(down)
    return out


def _check_guard(l, m) -> None:
    if sum(l) + sum(m) > MAX_DEGREE:
        raise ValueError(f"|l|+|m| exceeds the guard {MAX_DEGREE}")


def eigenvector_g(sys: BosonSystem, l: MultiIndex, m: MultiIndex,
                  form: str = "normal") -> NormalOrderedElement:
    """g_{l,m}; ``form='normal'`` uses the gamma sum, ``'antinormal'`` the delta sum reordered."""
    l, m = tuple(l), tuple(m)
    if len(l) != sys.N or len(m) != sys.N:
        raise ValueError("multi-index length must equal the mode count")
    _check_guard(l, m)
    N = sys.N
    out = NormalOrderedElement(N)
    for j in itertools.product(*[range(min(li, mi) + 1) for li, mi in zip(l, m)]):
        c = (-1) ** sum(j)
        for li, mi, ji in zip(l, m, j):
            c *= math.factorial(ji) * math.comb(li, ji) * math.comb(mi, ji)
        lj = tuple(li - ji for li, ji in zip(l, j))
        mj = tuple(mi - ji for mi, ji in zip(m, j))
        if form == "normal":
            w = math.prod(g ** ji for g, ji in zip(sys.gammas, j))
            out = out + NormalOrderedElement.monomial(lj, mj, c * w)
        elif form == "antinormal":
            w = math.prod(d ** ji for d, ji in zip(sys.deltas, j))
            zero = (0,) * N
            term = NormalOrderedElement.monomial(zero, mj).product(
                NormalOrderedElement.monomial(lj, zero))
            out = out + term.scale(c * w)
        else:
            raise ValueError(f"unknown form {form!r}")
    return out


def generating_coefficient(sys: BosonSystem, l: MultiIndex, m: MultiIndex,
                           form: str = "normal") -> NormalOrderedElement:
    """l! m! [z^l w^m] of exp(-sum gamma z w) e^{z a*} e^{w a} (or the delta/antinormal product).

    Expands the exponential product directly by Cauchy products of the three
    series, independently of the closed finite sum for g_{l,m}.
    """
    l, m = tuple(l), tuple(m)
    N = sys.N
    zero = (0,) * N
    consts = sys.gammas if form == "normal" else sys.deltas
    out = NormalOrderedElement(N)
    # exp(-c z w) contributes (z w)^j (-c)^j / j!, then z^{l-j} (a*)^{l-j}/(l-j)!, w^{m-j} a^{m-j}/(m-j)!
    for j in itertools.product(*[range(min(li, mi) + 1) for li, mi in zip(l, m)]):
        coeff = Fraction(1) if sys.is_exact else 1.0
        for k in range(N):
            coeff *= (-consts[k]) ** j[k] / math.factorial(j[k])
            coeff /= math.factorial(l[k] - j[k]) * math.factorial(m[k] - j[k])
        lj = tuple(li - ji for li, ji in zip(l, j))
        mj = tuple(mi - ji for mi, ji in zip(m, j))
        if form == "normal":
            term = NormalOrderedElement.monomial(lj, mj)
        else:
            term = NormalOrderedElement.monomial(zero, mj).product(NormalOrderedElement.monomial(lj, zero))
        out = out + term.scale(coeff)
    norm = math.prod(math.factorial(x) for x in l + m)
    return out.scale(norm)


def check_eigenrelation(sys: BosonSystem, l: MultiIndex, m: MultiIndex) -> float:
    """Max coefficient of L g_{l,m} + lambda_{l+m} g_{l,m}."""
    g = eigenvector_g(sys, l, m)
    lam = sys.eigenvalue(tuple(a + b for a, b in zip(l, m)))
    return apply_boson_generator(sys, g).__add__(g.scale(lam)).max_abs_coefficient()


def norm_squared_closed_form(sys: BosonSystem, l: MultiIndex, m: MultiIndex) -> float:
    """||g_{l,m}||_sigma^2 = l! m! gamma^l delta^m."""
    val = 1.0
    for li, mi, g, d in zip(l, m, sys.gammas, sys.deltas):
        val *= math.factorial(li) * math.factorial(mi) * float(g) ** li * float(d) ** mi
    return val


# ---------------------------------------------------------------------------
# truncated Fock space


@dataclass(frozen=True)
class TruncatedFock:
    """Fock space with occupations 0..M per mode; a_k, a_k* as dense matrices."""

    N: int
    M: int

    @property
    def dim(self) -> int:
        return (self.M + 1) ** self.N

    def single_mode(self) -> tuple[np.ndarray, np.ndarray]:
        a = np.diag(np.sqrt(np.arange(1, self.M + 1, dtype=float)), k=1)
        return a, a.T.copy()

    def ladder(self) -> list[tuple[np.ndarray, np.ndarray]]:
        a1, ad1 = self.single_mode()
        eye = np.eye(self.M + 1)
        out = []
        for k in range(self.N):
            mats = [eye] * self.N
            a = reduce(np.kron, mats[:k] + [a1] + mats[k + 1:])
            ad = reduce(np.kron, mats[:k] + [ad1] + mats[k + 1:])
            out.append((a, ad))
        return out

    def occupations(self) -> list[tuple[int, ...]]:
        return list(itertools.product(range(self.M + 1), repeat=self.N))

    def thermal_state(self, sys: BosonSystem) -> DensityState:
        return DensityState.from_matrix(np.diag(reduce(np.kron, thermal_weights(sys, self.M))))

    def matrix(self, x: NormalOrderedElement) -> np.ndarray:
        """Dense matrix of a normal-ordered element (exact on the low-occupation block)."""
        a1, ad1 = self.single_mode()
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for (p, q), c in x.terms.items():
            factors = [np.linalg.matrix_power(ad1, pk) @ np.linalg.matrix_power(a1, qk)
                       for pk, qk in zip(p, q)]
            out += complex(c) * reduce(np.kron, factors)
        return out


def thermal_weights(sys: BosonSystem, M: int) -> list[np.ndarray]:
    """Per-mode Gibbs weights on {0..M}, normalised on the truncated range."""
    out = []
    for w in sys.omegas:
        p = np.exp(-sys.beta * w * np.arange(M + 1))
        out.append(p / p.sum())
    return out


def choose_cutoff(sys: BosonSystem, degree: int, tail: float = TAIL_TOL) -> int:
    """Smallest M whose dropped weight (n+1)^degree exp(-beta*omega_min*n) is below
    ``tail`` relative to the peak of that profile, and which passes _check_cutoff."""
    x = sys.beta * min(sys.omegas)
    peak = max(degree * math.log(n + 1) - x * n for n in range(degree + int(degree / x) + 2))
    M = degree + int(math.ceil(-math.log(tail) / x)) + 1
    while degree * math.log(M + 1) - x * M - peak >= math.log(tail):
        M += 1
    return M


def _check_cutoff(sys: BosonSystem, M: int, degree: int, tail: float = TAIL_TOL) -> None:
    x = sys.beta * min(sys.omegas)
    if M <= degree or math.exp(-x * (M - degree)) >= tail:
        raise CutoffError(f"cutoff M={M} leaves Gibbs tail above {tail:g} at degree {degree}")


def truncated_inner(sys: BosonSystem, x: NormalOrderedElement, y: NormalOrderedElement,
                    M: int) -> complex:
    """<x, y>_sigma = tr(x* sigma y) with a truncated thermal sigma.

    sigma is a product over modes, so each monomial pair contributes a product
    of single-mode truncated traces.
    """
    a1, ad1 = TruncatedFock(1, M).single_mode()
    weights = thermal_weights(sys, M)
    cache: dict = {}

    def mono(p, q):
        key = (p, q)
        if key not in cache:
            cache[key] = np.linalg.matrix_power(ad1, p) @ np.linalg.matrix_power(a1, q)
        return cache[key]

    total = 0j
    for (p, q), c in x.terms.items():
        for (r, s), d in y.terms.items():
            val = complex(np.conj(complex(c)) * complex(d))
            for k in range(sys.N):
                xm, ym = mono(p[k], q[k]), mono(r[k], s[k])
                # tr(xm^T diag(w) ym) for real xm
                val *= float(np.einsum("ij,i,ij->", xm, weights[k], ym))
            total += val
    return total


def gns_norm_g(sys: BosonSystem, l: MultiIndex, m: MultiIndex, M: int | None = None,
               crosscheck: bool = True) -> dict:
    """Closed-form ||g_{l,m}||^2 next to its truncated-trace value.

    With ``crosscheck`` the trace is recomputed at 2M and both values must
    agree to 1e-8 relative.
    """
    degree = sum(l) + sum(m)
    if M is None:
        M = choose_cutoff(sys, degree)
    _check_cutoff(sys, M, degree)
    g = eigenvector_g(sys, l, m)
    numeric = truncated_inner(sys, g, g, M).real
    if crosscheck:
        doubled = truncated_inner(sys, g, g, 2 * M).real
        if abs(doubled - numeric) > 1e-8 * max(abs(doubled), 1e-300):
            raise CutoffError(f"truncated norms at M={M} and 2M disagree")
    closed = norm_squared_closed_form(sys, l, m)
    return {"closed_form": closed, "truncated": numeric,
            "relative_error": abs(numeric - closed) / closed, "cutoff": M}


def gns_gram(sys: BosonSystem, pairs, M: int | None = None) -> np.ndarray:
    """Gram matrix of {g_{l,m}} for the given (l, m) pairs via truncated traces."""
    pairs = [(tuple(l), tuple(m)) for l, m in pairs]
    degree = max(sum(l) + sum(m) for l, m in pairs)
    if M is None:
        M = choose_cutoff(sys, degree)
    _check_cutoff(sys, M, degree)
    gs = [eigenvector_g(sys, l, m) for l, m in pairs]
    return np.array([[truncated_inner(sys, x, y, M) for y in gs] for x in gs])


def generating_function_matrix(sys: BosonSystem, z, w, M: int) -> list[np.ndarray]:
    """Per-mode truncated matrices of exp(-gamma z w) e^{z a*} e^{w a}."""
    from scipy.linalg import expm

    a1, ad1 = TruncatedFock(1, M).single_mode()
    return [np.exp(-float(g) * zk * wk) * expm(zk * ad1) @ expm(wk * a1)
            for g, zk, wk in zip(sys.gammas, z, w)]


def generating_inner_truncated(sys: BosonSystem, zt, wt, z, w, M: int) -> complex:
    """<g(zt, wt), g(z, w)>_sigma by truncated traces."""
    left = generating_function_matrix(sys, zt, wt, M)
    right = generating_function_matrix(sys, z, w, M)
    weights = thermal_weights(sys, M)
    val = 1 + 0j
    for x, y, p in zip(left, right, weights):
        val *= np.trace(adjoint(x) @ (p[:, None] * y))
    return complex(val)


def generating_inner_closed(sys: BosonSystem, zt, wt, z, w) -> complex:
    """exp(sum_k gamma_k conj(zt_k) z_k + delta_k conj(wt_k) w_k)."""
    s = sum(float(g) * np.conj(a) * b + float(d) * np.conj(c) * e
            for g, d, a, b, c, e in zip(sys.gammas, sys.deltas, zt, z, wt, w))
    return complex(np.exp(s))


def truncated_generator_spec(sys: BosonSystem, M: int) -> LindbladSpec:
    """Jumps e^{b w/4} a_k and e^{-b w/4} a_k* on the truncated Fock space."""
    fock = TruncatedFock(sys.N, M)
    jumps = []
    for q, (a, ad) in zip(sys.exp_half, fock.ladder()):
        jumps.append(math.sqrt(float(q)) * a)
        jumps.append(ad / math.sqrt(float(q)))
    return LindbladSpec(fock.dim, tuple(jumps))


def truncated_thermal_state(sys: BosonSystem, M: int) -> DensityState:
    return DensityState.from_matrix(np.diag(reduce(np.kron, thermal_weights(sys, M))))


def moment(rho: DensityState, fock: TruncatedFock, l: MultiIndex, m: MultiIndex) -> complex:
    """rho((a*)^l a^m)."""
    op = np.eye(fock.dim, dtype=complex)
    for (a, ad), lk, mk in zip(fock.ladder(), l, m):
        op = op @ np.linalg.matrix_power(ad, lk) @ np.linalg.matrix_power(a, mk)
    return rho.expect(op)


def moment_class_check(rho: DensityState, fock: TruncatedFock, K: float, degree: int) -> bool:
    """|rho((a*)^l a^m)|^2 <= l! m! K^{|l|+|m|} for all |l|, |m| <= degree.

    The l = m = 0 case forces K >= 1.
    """
    if rho.dim != fock.dim:
        raise ValueError("state does not live on the given Fock space")
    ladder = fock.ladder()
    powers = []
    for a, ad in ladder:
        powers.append(([np.linalg.matrix_power(ad, k) for k in range(degree + 1)],
                       [np.linalg.matrix_power(a, k) for k in range(degree + 1)]))
    indices = [idx for idx in itertools.product(range(degree + 1), repeat=fock.N)
               if sum(idx) <= degree]
    for l in indices:
        left = reduce(lambda x, y: x @ y, [powers[k][0][l[k]] for k in range(fock.N)])
        for m in indices:
            right = reduce(lambda x, y: x @ y, [powers[k][1][m[k]] for k in range(fock.N)])
            val = abs(rho.expect(left @ right)) ** 2
            bound = math.prod(math.factorial(x) for x in l + m) * K ** (sum(l) + sum(m))
            if val > bound * (1 + 1e-12):
                return False
    return True


@dataclass(frozen=True)
class BoseBoundConstants:
    K: float
    T: float
    A: float
    rate: float


def bose_constants(sys: BosonSystem, K: float) -> BoseBoundConstants:
    """Constants of the moment-class bound as constructed in its proof.

    K is raised to max(K, 1, sqrt(2) max gamma_k); T = log(6K)/(2 Lambda) and
    A = max(6K, 4 e^{2 Lambda T}).
    """
    lam = sys.rate_floor
    if lam <= 0:
        raise ValueError("rate floor Lambda must be positive")
    K_eff = max(float(K), 1.0, math.sqrt(2) * max(float(g) for g in sys.gammas))
    T = math.log(6 * K_eff) / (2 * lam)
    A = max(6 * K_eff, 4 * math.exp(2 * lam * T))
    return BoseBoundConstants(K_eff, T, A, lam)


def bose_bound(sys: BosonSystem, K: float, t: float) -> float:
    """((1 + A e^{-2 Lambda t})^N - 1)/4, bounding d_tr(rho P_t, sigma)^2 on the K-moment class."""
    c = bose_constants(sys, K)
    return math.expm1(sys.N * math.log1p(c.A * math.exp(-2 * c.rate * t))) / 4


def bose_mixing_time(sys: BosonSystem, K: float, epsilon: float) -> float:
    """log(A N / log(1 + 4 eps^2)) / (2 Lambda)."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    c = bose_constants(sys, K)
    return math.log(c.A * sys.N / math.log1p(4 * epsilon ** 2)) / (2 * c.rate)


# ---------------------------------------------------------------------------
# classical birth-death restriction

_m = sympy.Symbol("m")


def birth_rate(sys: BosonSystem, k: int, level):
    return 2 * (level + 1) * sys.exp_minus_half[k]


def death_rate(sys: BosonSystem, k: int, level):
    return 2 * level * sys.exp_half[k]


def classical_birth_death(sys: BosonSystem, M: int) -> np.ndarray:
    """Generator of independent birth-death chains on {0..M}^N (births blocked at M)."""
    single = []
    for k in range(sys.N):
        q = np.zeros((M + 1, M + 1))
        for lvl in range(M + 1):
            if lvl < M:
                q[lvl, lvl + 1] = float(birth_rate(sys, k, lvl))
            if lvl > 0:
                q[lvl, lvl - 1] = float(death_rate(sys, k, lvl))
            q[lvl, lvl] = -q[lvl].sum()
        single.append(q)
    eye = np.eye(M + 1)
    total = np.zeros(((M + 1) ** sys.N,) * 2)
    for k in range(sys.N):
        total += reduce(np.kron, [single[j] if j == k else eye for j in range(sys.N)])
    return total


def _sym(c):
    return sympy.Rational(c.numerator, c.denominator) if isinstance(c, Fraction) else sympy.Float(c, 30)


def chebyshev_like_eigenfunctions(sys: BosonSystem, ell: int, k: int = 0) -> sympy.Poly:
    """Unnormalised f_ell(m) = sum_j C(ell,j) C(m, ell-j) (-1)^j gamma^j as a polynomial in m.

    The normalisation (gamma delta)^{-ell/2} is omitted since it can be
    irrational in exact mode; see :func:`classical_normalisation`.
    """
    g = _sym(sys.gammas[k])
    expr = sum(sympy.binomial(ell, j) * sympy.ff(_m, ell - j) / sympy.factorial(ell - j)
               * (-1) ** j * g ** j for j in range(ell + 1))
    domain = sympy.QQ if sys.is_exact else sympy.RR
    return sympy.Poly(sympy.expand(expr), _m, domain=domain)


def classical_normalisation(sys: BosonSystem, ell: int, k: int = 0) -> float:
    return float((float(sys.gammas[k]) * float(sys.deltas[k])) ** (-ell / 2))


def apply_classical_generator(sys: BosonSystem, f: sympy.Poly, k: int = 0) -> sympy.Poly:
    """(L_cl f)(m) = c+(m)[f(m+1) - f(m)] + c-(m)[f(m-1) - f(m)] on polynomials."""
    up, down = _sym(sys.exp_minus_half[k]), _sym(sys.exp_half[k])
    fm = f.as_expr()
    expr = (2 * (_m + 1) * up * (fm.subs(_m, _m + 1) - fm)
            + 2 * _m * down * (fm.subs(_m, _m - 1) - fm))
    return sympy.Poly(sympy.expand(expr), _m, domain=f.domain)


def classical_eigen_residual(sys: BosonSystem, ell: int, k: int = 0):
    """-L_cl f_ell - 4 sh ell f_ell as a polynomial; identically zero in exact mode."""
    f = chebyshev_like_eigenfunctions(sys, ell, k)
    lam = 2 * _sym(sys.eigenvalue(_unit(sys.N, k))) * ell
    return (-apply_classical_generator(sys, f, k) - f * lam)
