
import numpy as np
import pytest
from scipy.linalg import block_diag

from lindblad_lab.casimir import (RepresentationError, adjoint_rep, build_casimir_generator, builtin_rep,
                                  casimir_spectral_basis, check_norm_bound, classical_eigen_residual,
                                  classical_form_agreement, clusters, compare_with_prediction,
                                  decay_constant, diagonal_embedding_residual, frame_gram_residual,
                                  gamma_calculus_check, gap_and_decay, killing_form, killing_orthonormalize,
                                  make_rep, numeric_spectrum, so3_demo, sl2_classical_restriction,
                                  sl2_explicit_eigenvectors, sl2_generator, sl2_matrices, sl2_rep, sl_rep,
                                  so_rep, sp_rep, tensor_identity_residual, trace_state)
from lindblad_lab.lindblad import build_generator, check_detailed_balance
from lindblad_lab.rootsys import WeightVec, build_root_datum, compute_g0

PAULI = (np.array([[0, 1], [1, 0]], dtype=complex), np.array([[0, -1j], [1j, 0]]),
         np.array([[1, 0], [0, -1]], dtype=complex))


def _direct_killing(frame):
    # ad matrices in the frame basis via least squares, then tr(ad x ad y)
    ell = frame.ell
    basis = np.array([x.reshape(-1) for x in ell]).T
    ads = []
    for x in ell:
        cols = [np.linalg.lstsq(basis, (x @ y - y @ x).reshape(-1), rcond=None)[0] for y in ell]
        ads.append(np.array(cols).T)
    return np.array([[np.trace(a @ b) for b in ads] for a in ads])


def test_sl2_frame_is_scaled_pauli():
    frame = killing_orthonormalize(sl2_rep(2))
    got = sum(np.kron(x, x) for x in frame.ell)
    expected = sum(np.kron(p, p) for p in PAULI) / 8
    assert np.allclose(got, expected, atol=1e-12)


@pytest.mark.parametrize("name,n", [("sl2", 3), ("sl3", None), ("sp4", None), ("so5", None)])
def test_frame_is_killing_orthonormal(name, n):
    frame = killing_orthonormalize(builtin_rep(name, n))
    assert frame_gram_residual(frame) < 1e-9
    # Hermitian frame elements pair to minus the identity under tr(ad ad) of the complex algebra
    k = _direct_killing(frame)
    assert np.allclose(np.abs(k), np.eye(len(frame.ell)), atol=1e-9)
    for x in frame.ell:
        assert np.allclose(x, x.conj().T)


def test_casimir_element_is_scalar():
    for rep in (sl2_rep(4), sl_rep(3), sp_rep(2)):
        frame = killing_orthonormalize(rep)
        c = sum(x @ x for x in frame.ell)
        assert np.allclose(c, c[0, 0] * np.eye(rep.dim_V), atol=1e-10)


def test_generator_is_minus_sum_of_squared_adjoints():
    frame = killing_orthonormalize(sl_rep(3))
    L = build_casimir_generator(frame)
    a = np.arange(9, dtype=complex).reshape(3, 3) + 1j
    direct = -sum(x @ (x @ a - a @ x) - (x @ a - a @ x) @ x for x in frame.ell)
    assert np.allclose(L.apply(a), direct)
    assert np.allclose(build_generator(frame.spec()).matrix, L.matrix)
    assert check_detailed_balance(frame.spec(), trace_state(3)).holds_sufficient


@pytest.mark.parametrize("n", range(2, 7))
def test_sl2_spectrum(n):
    basis = casimir_spectral_basis(killing_orthonormalize(sl2_rep(n)))
    expected = sorted(i * (i + 1) / 2 for i in range(n) for _ in range(2 * i + 1))
    assert np.allclose(basis.eigenvalues, expected, atol=1e-10)
    assert numeric_spectrum(basis)[1][1] == 3


@pytest.mark.parametrize("name", ["sl3", "adj-sl3", "sp4", "so5", "sp6", "so7", "so6", "adj-sl2"])
def test_spectrum_matches_root_prediction(name):
    cmp = compare_with_prediction(builtin_rep(name))
    assert cmp["multiplicities_match"]
    assert cmp["max_value_deviation"] < 1e-8


def test_gap_at_least_g0_and_decay_constant():
    rep = builtin_rep("sl2", 2)
    dec = gap_and_decay(rep)
    assert dec.gap == pytest.approx(1.0)
    assert dec.g0 == 1
    assert dec.A_constant == pytest.approx(2.7067, abs=1e-4)
    assert dec.bound(0.0) == pytest.approx(dec.A_constant)
    for name in ("sl3", "sp4", "so5"):
        r = builtin_rep(name)
        assert gap_and_decay(r).gap >= float(compute_g0(r.algebra_label).g0) - 1e-9


def test_decay_constant_sums_converge():
    a1 = build_root_datum("A1")
    # sum over even k >= 2 of e^{-k(k+2)/4} (k+1)^3 by hand
    import math
    manual = sum(math.exp(-2 * k * (k + 2) / 8) * (k + 1) ** 3 for k in range(2, 200, 2))
    A, _ = decay_constant(a1, 1.0)
    assert A == pytest.approx(0.5 * math.e * math.sqrt(manual), rel=1e-10)


@pytest.mark.parametrize("name,n", [("sl2", 5), ("sl3", None), ("adj-sl3", None), ("sp4", None)])
def test_norm_bound(name, n):
    rep = check_norm_bound(casimir_spectral_basis(killing_orthonormalize(builtin_rep(name, n))))
    assert rep.max_ratio <= 1 + 1e-8
    assert rep.max_identity_residual < 1e-8


def test_clusters():
    assert clusters(np.array([0.0, 1.0, 1.0 + 1e-9, 2.0])) == [(0, 1), (1, 3), (3, 4)]


def test_make_rep_rejects_bad_input():
    e, f, h = sl2_matrices(2)
    with pytest.raises(RepresentationError):
        make_rep([e, h])  # not closed
    with pytest.raises(RepresentationError):
        make_rep([block_diag(x, x) for x in (e, f, h)])  # reducible
    with pytest.raises(RepresentationError):
        make_rep([e, f, h], build_root_datum("A2"))  # wrong algebra dimension
    with pytest.raises(RepresentationError):
        make_rep([e, f, h], build_root_datum("A1"), WeightVec((2,)))  # wrong module
    assert make_rep([e, f, h], build_root_datum("A1"), WeightVec((1,))).dim_V == 2


def test_killing_form_sl2_standard_basis():
    e, f, h = sl2_matrices(2)
    k = killing_form([e, f, h]).real
    assert np.allclose(k, [[0, 4, 0], [4, 0, 0], [0, 0, 8]])


def test_adjoint_rep_dimension():
    rep = adjoint_rep(sl_rep(3))
    assert rep.dim_V == 8 and rep.dim_g == 8
    assert so_rep(5).dim_V == 5 and sp_rep(2).dim_V == 4


def test_builtin_rep_errors():
    with pytest.raises(ValueError):
        builtin_rep("e8")
    with pytest.raises(ValueError):
        sl2_rep(1)


def test_explicit_sl2_eigenvectors():
    n = 5
    vecs = sl2_explicit_eigenvectors(n)
    L = sl2_generator(n)
    keys = sorted(vecs)
    gram = np.array([[np.trace(vecs[a].T @ vecs[b]) / n for b in keys] for a in keys])
    assert np.allclose(gram, np.eye(n * n), atol=1e-12)
    for (i, _), v in vecs.items():
        assert np.allclose(L.apply(v), -i * (i + 1) / 2 * v, atol=1e-10)


def test_classical_restriction_exact():
    for n in range(2, 12):
        cr = sl2_classical_restriction(n)
        assert all(sum(row) == 0 for row in cr.exact_generator)
        for i in range(n):
            assert classical_eigen_residual(cr, i) == 0
            assert classical_form_agreement(n, i)
    cr = sl2_classical_restriction(6)
    ev = np.sort(-np.linalg.eigvals(cr.generator).real)
    assert np.allclose(ev, [i * (i + 1) / 2 for i in range(6)])


def test_classical_normalisation_gives_unit_norm():
    n = 7
    cr = sl2_classical_restriction(n)
    for i in range(n):
        norm = cr.normalisation_sq[i] * sum(v * v for v in cr.eigenfunctions[i]) / n
        assert norm == 1


def test_diagonal_embedding(rng):
    assert diagonal_embedding_residual(6, rng.standard_normal(6)) < 1e-10


def test_gamma_calculus(rng):
    for rep in (sl2_rep(3), sl_rep(3)):
        frame = killing_orthonormalize(rep)
        assert gamma_calculus_check(frame, 30, rng) >= -1e-8
        assert tensor_identity_residual(frame) < 1e-8


def test_so3_example():
    out = so3_demo(2)
    assert out["gap"] == pytest.approx(2.0)
    values = [round(v, 8) for v, _ in out["spectrum"]]
    mults = [m for _, m in out["spectrum"]]
    assert values == [0, 2, 6, 12, 20]
    assert mults == [1, 3, 5, 7, 9]
