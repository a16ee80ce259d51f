"""Casimir Lindblad generators L = -sum_j ad_{l_j}^2 on End(V).

The l_j form an orthonormal basis of i g_0 for the inner product
<a, b> = kappa(a*, b) built from the Killing form.  Every quantity here is
computed in the representation itself: structure constants come from a
least-squares solve over the span of the represented basis, so built-in and
user-supplied matrices go through the same code path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np
import sympy

from .lindblad import (LindbladSpec, SpectralBasis, Superoperator, build_generator,
                       check_ergodic, commutator_map, spectral_decomposition)
from .linops import DensityState, GnsSpace, adjoint, is_hermitian, operator_norm
from .rootsys import (RootDatum, WeightVec, build_root_datum, casimir_scalar, compute_g0,
                      predicted_spectrum, shell, weyl_dimension)

CLOSURE_TOL = 1e-9
HERMITIAN_BASIS_TOL = 1e-12
FRAME_TOL = 1e-9
CLUSTER_REL_TOL = 1e-6
DECAY_TAIL_TOL = 1e-12
MAX_DECAY_SHELL = 400


class RepresentationError(ValueError):
    """Matrices fail the Lie-algebra representation checks."""


@dataclass(frozen=True)
class MatrixLieRep:
    algebra_label: RootDatum | None
    dim_V: int
    basis: tuple[np.ndarray, ...] = field(repr=False)
    hermitian_basis: tuple[np.ndarray, ...] = field(repr=False)
    highest_weight: WeightVec | None = None
    name: str = ""

    @property
    def dim_g(self) -> int:
        return len(self.hermitian_basis)


@dataclass(frozen=True)
class KillingFrame:
    ell: tuple[np.ndarray, ...] = field(repr=False)
    rep: MatrixLieRep = field(repr=False)

    @property
    def dim_V(self) -> int:
        return self.rep.dim_V

    def spec(self) -> LindbladSpec:
        """The generator written with jumps l_j: 2 l a l - {l^2, a} = -ad_l^2 a."""
        return LindbladSpec(self.dim_V, self.ell)


# ---------------------------------------------------------------------------
# linear algebra over the represented span


def _vec(mats: Sequence[np.ndarray]) -> np.ndarray:
    return np.column_stack([np.asarray(m, dtype=complex).reshape(-1) for m in mats])


def _real_vec(mats: Sequence[np.ndarray]) -> np.ndarray:
    v = _vec(mats)
    return np.vstack([v.real, v.imag])


def structure_constants(basis: Sequence[np.ndarray]) -> tuple[np.ndarray, float]:
    """c[a, b, e] with [x_a, x_b] = sum_e c[a, b, e] x_e, plus the max solve residual."""
    B = _vec(basis)
    d = len(basis)
    comms = [basis[a] @ basis[b] - basis[b] @ basis[a] for a in range(d) for b in range(d)]
    C = _vec(comms)
    coef, *_ = np.linalg.lstsq(B, C, rcond=None)
    residual = float(np.max(np.abs(B @ coef - C), initial=0.0))
    return coef.T.reshape(d, d, d), residual


def adjoint_matrices(c: np.ndarray) -> np.ndarray:
    """ad_a as d x d matrices: (ad_a)[e, b] = c[a, b, e]."""
    return np.transpose(c, (0, 2, 1))


def killing_form(basis: Sequence[np.ndarray]) -> np.ndarray:
    c, res = structure_constants(basis)
    if res > CLOSURE_TOL * max(1.0, max(operator_norm(x) for x in basis) ** 2):
        raise RepresentationError(f"basis not closed under commutators (residual {res:.2e})")
    ad = adjoint_matrices(c)
    return np.einsum("aij,bji->ab", ad, ad)


def hermitian_span(basis: Sequence[np.ndarray], tol: float = 1e-10) -> tuple[np.ndarray, ...]:
    """Real basis of the Hermitian elements of span_C(basis), assuming *-closure.

    Candidates x + x* and i(x - x*) are reduced to a real-linearly independent
    set by an SVD of their real coordinates.
    """
    cands = []
    for x in basis:
        x = np.asarray(x, dtype=complex)
        cands.append(x + adjoint(x))
        cands.append(1j * (x - adjoint(x)))
    R = _real_vec(cands)
    u, s, _ = np.linalg.svd(R, full_matrices=False)
    rank = int(np.sum(s > tol * max(s[0], 1.0)))
    n = np.asarray(basis[0]).shape[0]
    out = []
    for k in range(rank):
        col = u[:, k]
        m = (col[: n * n] + 1j * col[n * n:]).reshape(n, n)
        out.append(0.5 * (m + adjoint(m)))
    return tuple(out)


def _in_span(basis: Sequence[np.ndarray], mats: Sequence[np.ndarray]) -> float:
    B = _vec(basis)
    C = _vec(mats)
    coef, *_ = np.linalg.lstsq(B, C, rcond=None)
    return float(np.max(np.abs(B @ coef - C), initial=0.0))


def make_rep(matrices: Sequence[np.ndarray], datum: RootDatum | None = None,
             highest_weight: WeightVec | None = None, name: str = "") -> MatrixLieRep:
    """Validate matrices spanning pi(g) and attach a Hermitian basis of pi(i g_0).

    Checks commutator closure, closure under adjoints (unitarity of the
    compact form), semisimplicity of the Killing form and irreducibility.
    """
    mats = tuple(np.asarray(m, dtype=complex) for m in matrices)
    if not mats:
        raise RepresentationError("empty basis")
    n = mats[0].shape[0]
    if any(m.shape != (n, n) for m in mats):
        raise RepresentationError("basis matrices must be square and of equal size")
    _, res = structure_constants(mats)
    scale = max(1.0, max(operator_norm(x) for x in mats) ** 2)
    if res > CLOSURE_TOL * scale:
        raise RepresentationError(f"basis not closed under commutators (residual {res:.2e})")
    if _in_span(mats, [adjoint(m) for m in mats]) > CLOSURE_TOL * scale:
        raise RepresentationError("span is not closed under adjoints; not a unitary compact form")
    herm = hermitian_span(mats)
    if len(herm) != len(mats):
        raise RepresentationError(
            f"Hermitian span has real dimension {len(herm)}, expected {len(mats)} (basis dependent?)")
    if any(not is_hermitian(h, HERMITIAN_BASIS_TOL) for h in herm):
        raise RepresentationError("Hermitian basis failed the Hermiticity check")
    if not check_ergodic(LindbladSpec(n, herm)):
        raise RepresentationError("representation is reducible: commutant is larger than C 1")
    if datum is not None:
        dim_g = datum.rank + 2 * len(datum.positive_roots)
        if dim_g != len(mats):
            raise RepresentationError(f"{datum.name} has dimension {dim_g}, basis has {len(mats)} elements")
    if highest_weight is not None:
        if datum is None:
            raise RepresentationError("a highest weight needs a root datum")
        if len(highest_weight.coords) != datum.rank or not highest_weight.is_dominant:
            raise RepresentationError(f"highest weight {highest_weight} is not dominant for {datum.name}")
        if weyl_dimension(datum, highest_weight) != n:
            raise RepresentationError(
                f"V_{highest_weight} has dimension {weyl_dimension(datum, highest_weight)}, matrices act on C^{n}")
    return MatrixLieRep(datum, n, mats, herm, highest_weight, name)


def killing_orthonormalize(rep: MatrixLieRep, start: Sequence[np.ndarray] | None = None) -> KillingFrame:
    """Orthonormal frame of i g_0 for kappa(a*, b) by symmetric orthonormalisation.

    ``start`` overrides the Hermitian starting basis (used to test frame
    independence).
    """
    herm = tuple(start) if start is not None else rep.hermitian_basis
    G = killing_form(herm)
    if np.max(np.abs(G.imag), initial=0.0) > 1e-8 * max(1.0, np.max(np.abs(G))):
        raise RepresentationError("Killing Gram matrix is not real on Hermitian elements")
    G = 0.5 * (G.real + G.real.T)
    evals, evecs = np.linalg.eigh(G)
    if evals[0] <= 1e-10 * max(1.0, evals[-1]):
        raise RepresentationError("Killing Gram not positive definite (wrong real form or degenerate basis)")
    inv_sqrt = (evecs / np.sqrt(evals)) @ evecs.T
    ell = tuple(sum(inv_sqrt[j, a] * herm[a] for a in range(len(herm))) for j in range(len(herm)))
    ell = tuple(0.5 * (x + adjoint(x)) for x in ell)
    frame = KillingFrame(ell, rep)
    if frame_gram_residual(frame) > FRAME_TOL:
        raise RepresentationError("orthonormalised frame fails the Gram check")
    return frame


def frame_gram_residual(frame: KillingFrame) -> float:
    G = killing_form(frame.ell)
    return float(np.max(np.abs(G - np.eye(len(frame.ell)))))


def build_casimir_generator(frame: KillingFrame) -> Superoperator:
    d = frame.dim_V
    m = np.zeros((d * d, d * d), dtype=complex)
    for ell in frame.ell:
        ad = commutator_map(ell)
        m -= ad @ ad
    return Superoperator(d, m)


def trace_state(dim: int) -> DensityState:
    return DensityState.maximally_mixed(dim)


def casimir_spectral_basis(frame: KillingFrame) -> SpectralBasis:
    L = build_casimir_generator(frame)
    return spectral_decomposition(L, GnsSpace.of(trace_state(frame.dim_V)))


def clusters(evals: np.ndarray, rel_tol: float = CLUSTER_REL_TOL) -> list[tuple[int, int]]:
    """Index ranges [start, stop) of eigenvalue clusters (ascending input)."""
    out = []
    start = 0
    for k in range(1, len(evals) + 1):
        if k == len(evals) or evals[k] - evals[k - 1] > rel_tol * max(1.0, abs(evals[k])):
            out.append((start, k))
            start = k
    return out


def numeric_spectrum(basis: SpectralBasis) -> list[tuple[float, int]]:
    return [(float(np.mean(basis.eigenvalues[a:b])), b - a) for a, b in clusters(basis.eigenvalues)]


def compare_with_prediction(rep: MatrixLieRep, basis: SpectralBasis | None = None) -> dict:
    """Numeric clusters against the root-theoretic spectrum."""
    if rep.algebra_label is None or rep.highest_weight is None:
        raise RepresentationError("representation carries no root datum / highest weight")
    if basis is None:
        basis = casimir_spectral_basis(killing_orthonormalize(rep))
    predicted = predicted_spectrum(rep.algebra_label, rep.highest_weight)
    numeric = numeric_spectrum(basis)
    pred_list = list(predicted.items())
    mult_ok = len(pred_list) == len(numeric) and all(
        m == pm for (_, m), (_, pm) in zip(numeric, pred_list))
    dev = max((abs(v - float(pv)) for (v, _), (pv, _) in zip(numeric, pred_list)), default=0.0) \
        if len(pred_list) == len(numeric) else math.inf
    return {"predicted": predicted, "numeric": numeric,
            "multiplicities_match": mult_ok, "max_value_deviation": dev}


# ---------------------------------------------------------------------------
# gap, decay constant and norm bound


def decay_constant(datum: RootDatum, gap: float, tail_tol: float = DECAY_TAIL_TOL,
                   max_shell: int = MAX_DECAY_SHELL) -> tuple[float, int]:
    """A = 1/2 e^gap (sum_mu e^{-2 c_mu} dim(V_mu)^3)^{1/2} over nonzero root-lattice dominant mu.

    Shells sum(n) = s are added until det(A) + 1 consecutive shells each add
    less than ``tail_tol`` of the partial sum.  Returns (A, last shell).
    """
    index = int(round(abs(sympy.Matrix(datum.cartan).det())))
    total = 0.0
    quiet = 0
    s = 0
    for s in range(1, max_shell + 1):
        contrib = 0.0
        for mu in shell(datum.rank, s):
            if not datum.in_root_lattice(mu):
                continue
            c = float(casimir_scalar(datum, mu))
            contrib += math.exp(-2 * c + 3 * math.log(weyl_dimension(datum, mu)))
        total += contrib
        quiet = quiet + 1 if total > 0 and contrib < tail_tol * total else 0
        if quiet > index:
            break
    else:
        raise ArithmeticError("decay-constant series did not converge within the shell limit")
    return 0.5 * math.exp(gap) * math.sqrt(total), s


@dataclass(frozen=True)
class DecayReport:
    gap: float
    g0: Fraction
    A_constant: float
    shells: int
    bound: Callable[[float], float] = field(repr=False)


def gap_and_decay(rep: MatrixLieRep, basis: SpectralBasis | None = None) -> DecayReport:
    if rep.algebra_label is None:
        raise RepresentationError("gap_and_decay needs the root datum of the algebra")
    if basis is None:
        basis = casimir_spectral_basis(killing_orthonormalize(rep))
    gap = float(basis.eigenvalues[1])
    g0 = compute_g0(rep.algebra_label).g0
    A, shells = decay_constant(rep.algebra_label, gap)
    return DecayReport(gap, g0, A, shells, lambda t: A * math.exp(-gap * t))


@dataclass(frozen=True)
class NormBoundReport:
    max_ratio: float
    max_identity_residual: float
    cluster_sizes: tuple[int, ...]


def check_norm_bound(basis: SpectralBasis, rel_tol: float = CLUSTER_REL_TOL) -> NormBoundReport:
    """Operator norm against sqrt(cluster dim) times the L2(sigma) norm, per eigencluster.

    Also evaluates sum_i b_i* b_i - dim(B) 1 over each orthonormal cluster.
    """
    from .linops import gns_norm

    space = basis.space
    eye = np.eye(space.dim)
    worst_ratio, worst_id, sizes = 0.0, 0.0, []
    for a, b in clusters(basis.eigenvalues, rel_tol):
        size = b - a
        sizes.append(size)
        acc = np.zeros_like(eye, dtype=complex)
        for v in basis.vectors[a:b]:
            worst_ratio = max(worst_ratio, operator_norm(v) / (math.sqrt(size) * gns_norm(space, v)))
            acc += adjoint(v) @ v
        worst_id = max(worst_id, float(np.max(np.abs(acc - size * eye))))
    return NormBoundReport(worst_ratio, worst_id, tuple(sizes))


# ---------------------------------------------------------------------------
# built-in representations


def _unit(n: int, i: int, j: int) -> np.ndarray:
    m = np.zeros((n, n), dtype=complex)
    m[i, j] = 1
    return m


def sl_rep(n: int) -> MatrixLieRep:
    """Defining representation of sl_n, 2 <= n <= 5."""
    if not 2 <= n <= 5:
        raise ValueError("sl_n defined for 2 <= n <= 5")
    basis = [_unit(n, i, j) for i in range(n) for j in range(n) if i != j]
    basis += [_unit(n, i, i) - _unit(n, i + 1, i + 1) for i in range(n - 1)]
    datum = build_root_datum("A", n - 1)
    return make_rep(basis, datum, WeightVec((1,) + (0,) * (n - 2)), f"sl{n}")


_SO_DATA = {3: ("A", 1, (2,)), 5: ("B", 2, (1, 0)), 6: ("A", 3, (0, 1, 0)), 7: ("B", 3, (1, 0, 0))}


def so_rep(n: int) -> MatrixLieRep:
    """Defining representation of so_n, 3 <= n <= 7 (so_4 carries no simple root datum)."""
    if not 3 <= n <= 7:
        raise ValueError("so_n defined for 3 <= n <= 7")
    basis = [_unit(n, i, j) - _unit(n, j, i) for i in range(n) for j in range(i + 1, n)]
    datum = hw = None
    if n in _SO_DATA:
        kind, r, coords = _SO_DATA[n]
        datum, hw = build_root_datum(kind, r), WeightVec(coords)
    return make_rep(basis, datum, hw, f"so{n}")


_SP_DATA = {1: ("A", 1, (1,)), 2: ("B", 2, (0, 1)), 3: ("C", 3, (1, 0, 0))}


def symplectic_form(n: int) -> np.ndarray:
    return np.block([[np.zeros((n, n)), np.eye(n)], [-np.eye(n), np.zeros((n, n))]])


def sp_rep(n: int) -> MatrixLieRep:
    """Defining representation of sp_{2n}, 1 <= n <= 3: X^T J + J X = 0."""
    if not 1 <= n <= 3:
        raise ValueError("sp_2n defined for 1 <= n <= 3")
    from scipy.linalg import null_space

    m = 2 * n
    J = symplectic_form(n)
    # real solutions X of X^T J + J X = 0, by linear algebra on vec(X)
    rows = []
    for k in range(m * m):
        e = np.zeros(m * m)
        e[k] = 1
        X = e.reshape(m, m)
        rows.append((X.T @ J + J @ X).reshape(-1))
    sols = null_space(np.array(rows).T)
    basis = [sols[:, k].reshape(m, m).astype(complex) for k in range(sols.shape[1])]
    kind, r, coords = _SP_DATA[n]
    return make_rep(basis, build_root_datum(kind, r), WeightVec(coords), f"sp{m}")


def sl2_matrices(n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """e, f, h on C^n: e = sum sqrt(x(n-x)) E_{x,x+1}, f = e^T, h = diag(n+1-2x)."""
    if n < 1:
        raise ValueError("dimension must be positive")
    x = np.arange(1, n)
    e = np.diag(np.sqrt(x * (n - x)).astype(float), k=1)
    h = np.diag((n + 1 - 2 * np.arange(1, n + 1)).astype(float))
    return e, e.T.copy(), h


def sl2_rep(n: int) -> MatrixLieRep:
    """The n-dimensional irreducible representation of sl_2, n >= 2."""
    if n < 2:
        raise ValueError("sl2 irrep needs n >= 2")
    e, f, h = sl2_matrices(n)
    return make_rep([e, f, h], build_root_datum("A", 1), WeightVec((n - 1,)), f"sl2[{n}]")


def adjoint_rep(rep: MatrixLieRep) -> MatrixLieRep:
    """Adjoint representation from the structure constants in a Killing frame (Hermitian matrices)."""
    frame = killing_orthonormalize(rep)
    c, _ = structure_constants(frame.ell)
    ad = adjoint_matrices(c)
    mats = [0.5 * (m + adjoint(m)) for m in ad]
    datum = rep.algebra_label
    hw = datum.theta if datum is not None else None
    return make_rep(mats, datum, hw, f"ad({rep.name})")


def builtin_rep(algebra: str, n: int | None = None) -> MatrixLieRep:
    """'sl2' (with n = irrep dimension), 'sl3', 'so5', 'sp4', 'adj-sl3', ..."""
    algebra = algebra.lower()
    if algebra.startswith("adj-"):
        return adjoint_rep(builtin_rep(algebra[4:], n))
    if algebra == "sl2":
        return sl2_rep(n if n is not None else 2)
    kind, size = algebra[:2], int(algebra[2:])
    if kind == "sl":
        return sl_rep(size)
    if kind == "so":
        return so_rep(size)
    if kind == "sp":
        if size % 2:
            raise ValueError("sp needs an even matrix size")
        return sp_rep(size // 2)
    raise ValueError(f"unknown algebra {algebra!r}")


# ---------------------------------------------------------------------------
# sl2 closed forms


def sl2_generator(n: int) -> Superoperator:
    """-1/4 (ad_e ad_f + ad_f ad_e + 1/2 ad_h^2) on End(C^n)."""
    e, f, h = sl2_matrices(n)
    ae, af, ah = commutator_map(e), commutator_map(f), commutator_map(h)
    return Superoperator(n, -0.25 * (ae @ af + af @ ae + 0.5 * ah @ ah))


def _comb(a: int, b: int) -> int:
    return math.comb(a, b) if 0 <= b <= a else 0


def _gamma_sum(n: int, i: int, ell: int, x: int) -> int:
    return sum((-1) ** (ell - j) * math.comb(ell, j) * _comb(x + i - j - 1, i) * _comb(n - x + j, i)
               for j in range(ell + 1))


def sl2_explicit_eigenvectors(n: int) -> dict[tuple[int, int], np.ndarray]:
    """v^{(i)}_l for 0 <= i < n, 0 <= l <= 2i, orthonormal for tr(a* b)/n.

    Each entry is assembled exactly: the integer alternating sum is squared
    and combined with the rational prefactors before a single square root.
    """
    if not 2 <= n <= 40:
        raise ValueError("n must be in 2..40")
    out = {}
    f = math.factorial
    for i in range(n):
        for ell in range(2 * i + 1):
            shift = i - ell
            v = np.zeros((n, n))
            pref_sq = Fraction(f(i) ** 2 * n, f(ell) ** 2 * math.comb(2 * i, ell) * math.comb(n + i, 2 * i + 1))
            for x in range(1, n + 1):
                col = x + shift
                if not 1 <= col <= n:
                    continue
                s = _gamma_sum(n, i, ell, x)
                if s == 0:
                    continue
                root_sq = Fraction(f(x - 1) * f(n - x - i + ell), f(x - 1 + i - ell) * f(n - x))
                v[x - 1, col - 1] = math.copysign(math.sqrt(pref_sq * root_sq * s * s), s)
            out[(i, ell)] = v
    return out


@dataclass(frozen=True)
class ClassicalRestriction:
    n: int
    generator: np.ndarray
    exact_generator: tuple[tuple[Fraction, ...], ...] = field(repr=False)
    eigenfunctions: dict = field(repr=False)
    coefficients: dict = field(repr=False)
    normalisation_sq: dict = field(repr=False)


def _cl_rates(n: int, x: int) -> tuple[Fraction, Fraction]:
    return Fraction(x * (n - x), 2), Fraction((x - 1) * (n - x + 1), 2)


def sl2_classical_restriction(n: int) -> ClassicalRestriction:
    """Birth-death chain on {1..n} from L restricted to diagonal matrices.

    ``eigenfunctions[i]`` holds the unnormalised values
    sum_j (-1)^{i-j} C(i,j) C(x-1,j) C(n-x,i-j), x = 1..n, whose normalised
    version has unit uniform-L2 norm; ``normalisation_sq[i]`` is the squared
    prefactor.  ``coefficients[i]`` lists rational monomial coefficients in x.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    Q = [[Fraction(0)] * n for _ in range(n)]
    for x in range(1, n + 1):
        up, down = _cl_rates(n, x)
        if x < n:
            Q[x - 1][x] += up
        if x > 1:
            Q[x - 1][x - 2] += down
        Q[x - 1][x - 1] -= up + down
    eig, coeffs, norms = {}, {}, {}
    X = sympy.Symbol("x")
    f = math.factorial
    for i in range(n):
        vals = [sum((-1) ** (i - j) * math.comb(i, j) * _comb(x - 1, j) * _comb(n - x, i - j)
                    for j in range(i + 1)) for x in range(1, n + 1)]
        eig[i] = [Fraction(v) for v in vals]
        norms[i] = Fraction(f(i) ** 2 * f(n - i - 1) * (2 * i + 1) * n, f(n + i))
        poly = sum(((-1) ** (i - j) * math.comb(i, j)
                    * sympy.binomial(X - 1, j).expand(func=True)
                    * sympy.binomial(n - X, i - j).expand(func=True)) for j in range(i + 1))
        coeffs[i] = [sympy.Rational(c) for c in sympy.Poly(sympy.expand(poly), X).all_coeffs()[::-1]] \
            if i > 0 else [sympy.Rational(1)]
    return ClassicalRestriction(
        n, np.array([[float(q) for q in row] for row in Q]), tuple(tuple(r) for r in Q), eig, coeffs, norms)


def classical_form_agreement(n: int, i: int) -> bool:
    """Both displayed expressions for gamma^{(i)} agree exactly (compared through squares and signs)."""
    f = math.factorial
    p1_sq = Fraction(n, math.comb(2 * i, i) * math.comb(n + i, 2 * i + 1))
    p2_sq = Fraction(f(i) ** 2 * f(n - i - 1) * (2 * i + 1) * n, f(n + i))
    for x in range(1, n + 1):
        s1 = sum((-1) ** (i - j) * math.comb(i, j) * _comb(x + i - j - 1, i) * _comb(n - x + j, i)
                 for j in range(i + 1))
        s2 = sum((-1) ** (i - j) * math.comb(i, j) * _comb(x - 1, j) * _comb(n - x, i - j)
                 for j in range(i + 1))
        if (s1 > 0) != (s2 > 0) or (s1 < 0) != (s2 < 0) or p1_sq * s1 * s1 != p2_sq * s2 * s2:
            return False
    return True


def classical_eigen_residual(cr: ClassicalRestriction, i: int) -> Fraction:
    """Max |(-L_cl g)(x) - i(i+1)/2 g(x)| in exact arithmetic."""
    g = cr.eigenfunctions[i]
    lam = Fraction(i * (i + 1), 2)
    worst = Fraction(0)
    for row, gx in zip(cr.exact_generator, g):
        val = -sum((q * gy for q, gy in zip(row, g)), Fraction(0)) - lam * gx
        worst = max(worst, abs(val))
    return worst


def diagonal_embedding_residual(n: int, f_values: Sequence[float]) -> float:
    """max |L(diag f) - diag(L_cl f)| using the sl2 generator."""
    L = sl2_generator(n)
    cr = sl2_classical_restriction(n)
    f_values = np.asarray(f_values, dtype=float)
    lhs = L.apply(np.diag(f_values))
    rhs = np.diag(cr.generator @ f_values)
    return float(np.max(np.abs(lhs - rhs)))


# ---------------------------------------------------------------------------
# carre du champ


def carre_du_champ(L: Superoperator, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Gamma(a, b) = 1/2 (L(ab) - L(a) b - a L(b))."""
    return 0.5 * (L.apply(a @ b) - L.apply(a) @ b - a @ L.apply(b))


def gamma_two(L: Superoperator, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Gamma_2(a, b) = 1/2 (L Gamma(a,b) - Gamma(La, b) - Gamma(a, Lb))."""
    return 0.5 * (L.apply(carre_du_champ(L, a, b)) - carre_du_champ(L, L.apply(a), b)
                  - carre_du_champ(L, a, L.apply(b)))


def bakry_emery_margin(L: Superoperator, a: np.ndarray, constant: float = 0.25) -> float:
    """Smallest eigenvalue of Gamma_2(a, a*) - constant * Gamma(a, a*)."""
    m = gamma_two(L, a, adjoint(a)) - constant * carre_du_champ(L, a, adjoint(a))
    return float(np.linalg.eigvalsh(0.5 * (m + adjoint(m)))[0])


def gamma_calculus_check(frame: KillingFrame, samples: int | Sequence[np.ndarray],
                         rng: np.random.Generator | None = None) -> float:
    """Minimum over sampled a of the smallest eigenvalue of Gamma_2(a,a*) - Gamma(a,a*)/4."""
    from .linops import random_operator

    L = build_casimir_generator(frame)
    if isinstance(samples, int):
        rng = rng if rng is not None else np.random.default_rng(0)
        samples = [random_operator(frame.dim_V, rng) for _ in range(samples)]
    return min(bakry_emery_margin(L, np.asarray(a, dtype=complex)) for a in samples)


def tensor_identity_residual(frame: KillingFrame) -> float:
    """max |sum_ij [l_i,l_j] (x) [l_i,l_j] + sum_j l_j (x) l_j|."""
    lhs = sum(np.kron(x @ y - y @ x, x @ y - y @ x) for x in frame.ell for y in frame.ell)
    rhs = -sum(np.kron(x, x) for x in frame.ell)
    return float(np.max(np.abs(lhs - rhs)))


# ---------------------------------------------------------------------------
# angular-momentum normalisation


def spin_matrices(n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """J_x, J_y, J_z for spin n on C^{2n+1}, with [J_x, J_y] = i J_z."""
    if n < 1:
        raise ValueError("spin must be a positive integer")
    m = np.arange(n, -n - 1, -1, dtype=float)
    jp = np.diag(np.sqrt(n * (n + 1) - m[1:] * (m[1:] + 1)), k=1)
    jm = jp.T
    return (jp + jm) / 2, (jp - jm) / 2j, np.diag(m)


def so3_demo(n: int) -> dict:
    """Spectrum and gap of -sum_j ad_{J_j}^2 on End(C^{2n+1}); gap 2 in this normalisation."""
    J = spin_matrices(n)
    spec = LindbladSpec(2 * n + 1, J)
    L = build_generator(spec)
    basis = spectral_decomposition(L, GnsSpace.of(trace_state(2 * n + 1)))
    return {"spec": spec, "basis": basis, "gap": float(basis.eigenvalues[1]),
            "spectrum": numeric_spectrum(basis)}
