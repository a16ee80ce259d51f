import math
from fractions import Fraction

import numpy as np
import pytest
import sympy

from lindblad_lab.boson import (CutoffError, BosonSystem, NormalOrderedElement, TruncatedFock,
                                apply_boson_generator, bose_bound, bose_constants, bose_mixing_time,
                                chebyshev_like_eigenfunctions, check_eigenrelation,
                                classical_birth_death, classical_eigen_residual, classical_normalisation,
                                eigenvector_g, generating_coefficient, generating_inner_closed,
                                generating_inner_truncated, gns_gram, gns_norm_g, moment,
                                moment_class_check, norm_squared_closed_form, truncated_generator_spec,
                                truncated_thermal_state)
from lindblad_lab.lindblad import build_dual, build_generator
from lindblad_lab.linops import DensityState

A = NormalOrderedElement.annihilator
AD = NormalOrderedElement.creator


def _low_block(m, k):
    return m[:k, :k]


def test_system_validation():
    with pytest.raises(ValueError):
        BosonSystem(0.0, (1.0,))
    with pytest.raises(ValueError):
        BosonSystem(1.0, ())
    with pytest.raises(ValueError):
        BosonSystem.exact([Fraction(1, 2)])


def test_thermal_constants():
    sys = BosonSystem(0.9, (1.3,))
    x = 0.9 * 1.3
    assert sys.gammas[0] == pytest.approx(1 / math.expm1(x))
    assert sys.deltas[0] == pytest.approx(sys.gammas[0] + 1)
    assert sys.sh[0] == pytest.approx(math.sinh(x / 2))
    assert sys.eigenvalue((3,)) == pytest.approx(6 * math.sinh(x / 2))


def test_exact_system_uses_rationals():
    sys = BosonSystem.exact([Fraction(3, 2)])
    assert sys.is_exact
    assert sys.gammas[0] == Fraction(4, 5)
    assert sys.deltas[0] == Fraction(9, 5)


def test_canonical_commutation():
    one = NormalOrderedElement.identity(2)
    assert A(2, 0).commutator(AD(2, 0)) == one
    assert A(2, 0).commutator(AD(2, 1)) == NormalOrderedElement(2)
    assert A(2, 1).commutator(A(2, 0)) == NormalOrderedElement(2)


def test_product_matches_truncated_matrices(rng):
    fock = TruncatedFock(1, 14)
    x = NormalOrderedElement.monomial((2,), (1,), 0.5) + NormalOrderedElement.monomial((0,), (3,), -1.0)
    y = NormalOrderedElement.monomial((1,), (2,), 2.0) + NormalOrderedElement.identity(1, 0.25)
    lhs = fock.matrix(x.product(y))
    rhs = fock.matrix(x) @ fock.matrix(y)
    assert np.allclose(_low_block(lhs, 8), _low_block(rhs, 8))
    assert x * y == x.product(y)


def test_arithmetic_and_degree():
    x = NormalOrderedElement.monomial((2,), (1,), 3)
    assert (x - x) == NormalOrderedElement(1)
    assert (-x).max_abs_coefficient() == 3
    assert x.degree() == 3
    assert x.scale(0) == NormalOrderedElement(1)


def test_generator_matches_truncated_superoperator():
    sys = BosonSystem(1.0, (1.0,))
    M = 20
    fock = TruncatedFock(1, M)
    L = build_generator(truncated_generator_spec(sys, M))
    x = NormalOrderedElement.monomial((2,), (1,), 1.0) + NormalOrderedElement.monomial((0,), (2,), 0.3)
    lhs = fock.matrix(apply_boson_generator(sys, x))
    rhs = L.apply(fock.matrix(x))
    # rows/columns far below the cutoff are unaffected by truncation
    assert np.allclose(_low_block(lhs, M - 4), _low_block(rhs, M - 4), atol=1e-10)


@pytest.mark.parametrize("l,m", [((0,), (0,)), ((1,), (0,)), ((2,), (3,)), ((4,), (4,))])
def test_eigenrelation_single_mode(l, m):
    assert check_eigenrelation(BosonSystem(1.0, (1.0,)), l, m) < 1e-10


def test_eigenrelation_two_modes():
    sys = BosonSystem(0.7, (1.0, 1.6))
    for l, m in [((1, 0), (0, 1)), ((1, 1), (1, 0)), ((2, 0), (0, 2))]:
        assert check_eigenrelation(sys, l, m) < 1e-10


def test_eigenrelation_exact_mode_is_zero():
    sys = BosonSystem.exact([Fraction(5, 3)])
    g = eigenvector_g(sys, (3,), (2,))
    lam = sys.eigenvalue((5,))
    assert apply_boson_generator(sys, g) + g.scale(lam) == NormalOrderedElement(1)


def test_both_forms_agree():
    sys = BosonSystem.exact([Fraction(3, 2), Fraction(2)])
    for l, m in [((2, 1), (1, 2)), ((0, 3), (3, 0))]:
        assert eigenvector_g(sys, l, m) == eigenvector_g(sys, l, m, "antinormal")
    with pytest.raises(ValueError):
        eigenvector_g(sys, (1, 0), (0, 1), "weyl")


def test_generating_coefficients_match_closed_sum():
    sys = BosonSystem.exact([Fraction(7, 4)])
    for l, m in [((3,), (2,)), ((1,), (4,))]:
        g = eigenvector_g(sys, l, m)
        assert generating_coefficient(sys, l, m) == g
        assert generating_coefficient(sys, l, m, "antinormal") == g


def test_guard_and_index_validation():
    sys = BosonSystem(1.0, (1.0,))
    with pytest.raises(ValueError):
        eigenvector_g(sys, (20,), (5,))
    with pytest.raises(ValueError):
        eigenvector_g(sys, (1, 0), (0,))


def test_norms_match_truncated_traces():
    sys = BosonSystem(1.0, (1.0,))
    for l, m in [((0,), (0,)), ((1,), (2,)), ((3,), (1,))]:
        out = gns_norm_g(sys, l, m)
        assert out["relative_error"] < 1e-6
        assert out["closed_form"] == pytest.approx(norm_squared_closed_form(sys, l, m))


def test_small_cutoff_rejected():
    with pytest.raises(CutoffError):
        gns_norm_g(BosonSystem(1.0, (1.0,)), (2,), (2,), M=6)


def test_gram_matrix_is_diagonal():
    sys = BosonSystem(1.2, (1.0,))
    pairs = [((0,), (0,)), ((1,), (0,)), ((0,), (1,)), ((1,), (1,)), ((2,), (0,))]
    gram = gns_gram(sys, pairs)
    off = gram - np.diag(np.diag(gram))
    assert np.max(np.abs(off)) < 1e-8 * np.max(np.abs(gram))


def test_generating_function_inner_product():
    sys = BosonSystem(1.0, (1.0, 1.5))
    zt, wt, z, w = (0.3, -0.2), (0.1j, 0.2), (0.2 + 0.1j, 0.1), (0.25, -0.15)
    closed = generating_inner_closed(sys, zt, wt, z, w)
    numeric = generating_inner_truncated(sys, zt, wt, z, w, 60)
    assert abs(closed - numeric) < 1e-8 * abs(closed)


def test_truncated_thermal_is_stationary_away_from_cutoff():
    sys = BosonSystem(1.0, (1.0,))
    M = 40
    spec = truncated_generator_spec(sys, M)
    sigma = truncated_thermal_state(sys, M)
    assert np.max(np.abs(build_dual(spec).apply(sigma.op))) < 1e-15


def test_moments_and_moment_class():
    fock = TruncatedFock(1, 10)
    rho = DensityState.from_probabilities([0.5, 0.5] + [0.0] * 9)
    assert moment(rho, fock, (1,), (1,)) == pytest.approx(0.5)
    assert moment_class_check(rho, fock, 1.0, 3)
    excited = DensityState.from_probabilities([0.0] * 3 + [1.0] + [0.0] * 7)
    assert not moment_class_check(excited, fock, 1.0, 3)
    assert moment_class_check(excited, fock, 4.0, 3)


def test_bound_constants_from_proof():
    sys = BosonSystem(1.0, (1.0,))
    c = bose_constants(sys, 1.0)
    assert c.K == pytest.approx(max(1.0, math.sqrt(2) * sys.gammas[0]))
    assert c.A == pytest.approx(24 * c.K)
    assert c.rate == pytest.approx(2 * math.sinh(0.5))
    # a large occupation forces the effective K up
    hot = BosonSystem(0.05, (1.0,))
    assert bose_constants(hot, 1.0).K == pytest.approx(math.sqrt(2) * hot.gammas[0])


def test_bound_decreasing_and_mixing_time():
    sys = BosonSystem(1.0, (1.0, 2.0))
    vals = [bose_bound(sys, 3.0, t) for t in np.linspace(0, 6, 13)]
    assert all(b2 < b1 for b1, b2 in zip(vals, vals[1:]))
    eps = 0.1
    t = bose_mixing_time(sys, 3.0, eps)
    assert bose_bound(sys, 3.0, t) <= eps ** 2 * (1 + 1e-9)


def test_classical_chain_eigenfunctions_numerically():
    sys = BosonSystem(0.8, (1.0,))
    M = 60
    q = classical_birth_death(sys, M)
    assert np.allclose(q.sum(axis=1), 0)
    levels = np.arange(M + 1)
    for ell in range(5):
        f = chebyshev_like_eigenfunctions(sys, ell)
        vals = np.array([float(f.eval(int(k))) for k in levels])
        lam = 4 * sys.sh[0] * ell
        assert np.allclose((q @ vals)[:M], -lam * vals[:M], rtol=1e-9, atol=1e-9 * np.max(np.abs(vals)))


def test_classical_chain_is_diagonal_restriction():
    sys = BosonSystem(1.0, (1.0,))
    M = 15
    L = build_generator(truncated_generator_spec(sys, M))
    q = classical_birth_death(sys, M)
    f = np.arange(M + 1, dtype=float) ** 2
    restricted = np.diag(L.apply(np.diag(f))).real
    assert np.allclose(restricted[:M], (q @ f)[:M])


def test_classical_exact_residual_zero():
    sys = BosonSystem.exact([Fraction(3, 2)])
    for ell in range(6):
        assert classical_eigen_residual(sys, ell).is_zero
        # classical eigenvalue is twice the quantum lambda_ell
        assert 4 * sys.sh[0] * ell == 2 * sys.eigenvalue((ell,))


def test_classical_eigenfunction_coefficients_rational():
    sys = BosonSystem.exact([Fraction(3, 2)])
    f = chebyshev_like_eigenfunctions(sys, 2)
    # f_2(m) = C(m,2) - 2 gamma m + gamma^2, gamma = 4/5
    expected = sympy.Poly(sympy.Rational(1, 2) * sympy.Symbol("m") * (sympy.Symbol("m") - 1)
                          - sympy.Rational(8, 5) * sympy.Symbol("m") + sympy.Rational(16, 25),
                          sympy.Symbol("m"), domain=sympy.QQ)
    assert f == expected


def test_classical_normalisation_makes_unit_norm():
    sys = BosonSystem(1.0, (1.0,))
    M = 200
    pi = np.exp(-np.arange(M + 1) * 1.0)
    pi /= pi.sum()
    for ell in range(5):
        f = chebyshev_like_eigenfunctions(sys, ell)
        vals = np.array([float(f.eval(k)) for k in range(M + 1)])
        norm2 = np.sum(pi * vals ** 2) * classical_normalisation(sys, ell) ** 2
        assert norm2 == pytest.approx(1.0, rel=1e-9)
