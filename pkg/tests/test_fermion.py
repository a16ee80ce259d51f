import itertools
import math

import numpy as np
import pytest

from lindblad_lab.checks import fermion_deviation
from lindblad_lab.fermion import (FermionSystem, build_fermi_generator, car_residual, fermi_eigensystem,
                                  fermi_mixing_bound, fermi_mixing_time, fermi_spectral_basis,
                                  fermi_uniform_sum, hypercube_restriction, jordan_wigner, occupation,
                                  parity_operator)
from lindblad_lab.lindblad import (build_generator, check_detailed_balance, ergodicity_bound_uniform,
                                   evolve_many, spectral_decomposition)
from lindblad_lab.linops import GnsSpace, operator_norm, random_state, trace_distance


def test_system_validation():
    with pytest.raises(ValueError):
        FermionSystem(0, 1.0, ())
    with pytest.raises(ValueError):
        FermionSystem(2, 1.0, (1.0,))
    with pytest.raises(ValueError):
        FermionSystem(1, -1.0, (1.0,))


@pytest.mark.parametrize("N", [1, 2, 3, 4])
def test_car_relations(N):
    assert car_residual(jordan_wigner(FermionSystem(N, 1.0, (1.0,) * N))) < 1e-14


def test_parity_anticommutes_with_modes():
    sys = FermionSystem(3, 1.0, (1.0,) * 3)
    w = parity_operator(sys)
    assert np.allclose(w @ w, np.eye(8))
    for a, _ in jordan_wigner(sys):
        assert np.allclose(w @ a + a @ w, 0)


def test_gibbs_state_matches_hamiltonian():
    sys = FermionSystem(2, 0.7, (1.0, 2.5))
    h = sys.hamiltonian()
    expected = np.diag(np.exp(-0.7 * np.diag(h).real))
    assert np.allclose(sys.gibbs_state().op, expected / np.trace(expected), atol=1e-14)


def test_gibbs_state_stable_at_large_beta():
    sys = FermionSystem(1, 800.0, (1.0,))
    assert np.isfinite(sys.gibbs_state().op).all()


def test_generator_detailed_balance():
    sys = FermionSystem(2, 1.3, (1.0, 0.4))
    rep = check_detailed_balance(build_fermi_generator(sys), sys.gibbs_state())
    assert rep.holds_sufficient and rep.residual_sufficient < 1e-12


@pytest.mark.parametrize("N,beta", [(1, 0.0), (2, 0.5), (3, 2.0)])
def test_closed_forms_match_numerics(N, beta):
    sys = FermionSystem(N, beta, tuple(1.0 + 0.3 * k for k in range(N)))
    assert fermion_deviation(sys) < 1e-9


def test_single_mode_eigenvalues_by_hand():
    # occupation-basis computation: a and a* decay at 2 ch(x), n - <n> at 4 ch(x)
    x = 0.6
    sys = FermionSystem(1, 2 * x, (1.0,))
    es = fermi_eigensystem(sys)
    c = math.cosh(x)
    assert sorted(es.eigenvalues) == pytest.approx([0, 2 * c, 2 * c, 4 * c])


def test_op_norms_and_gram_numerically():
    sys = FermionSystem(2, 1.5, (1.0, 0.5))
    es = fermi_eigensystem(sys)
    space = GnsSpace.of(sys.gibbs_state())
    for v, g, b in zip(es.vectors, es.gns_norms, es.op_norms):
        assert np.trace(v.conj().T @ space.sigma.op @ v).real == pytest.approx(g, rel=1e-12)
        assert operator_norm(v) == pytest.approx(b, rel=1e-12)


def test_uniform_sum_matches_brute_force():
    sys = FermionSystem(3, 1.1, (1.0, 0.7, 1.6))
    es = fermi_eigensystem(sys)
    for t in (0.0, 0.4, 1.5):
        brute = sum(math.exp(-2 * lam * t) * b * b / g
                    for lam, g, b in zip(es.eigenvalues, es.gns_norms, es.op_norms)) - 1
        assert fermi_uniform_sum(sys, t) == pytest.approx(brute, rel=1e-12)
        basis = fermi_spectral_basis(sys)
        assert ergodicity_bound_uniform(basis, t) == pytest.approx(brute / 4, rel=1e-10)


def test_mixing_bound_dominates_uniform_sum():
    for beta in (0.0, 0.5, 2.0):
        sys = FermionSystem(3, beta, (1.0, 1.0, 2.0))
        for t in (1.0, 1.5, 3.0):
            assert fermi_uniform_sum(sys, t) / 4 <= fermi_mixing_bound(sys, t)


def test_mixing_bound_at_mixing_time():
    sys = FermionSystem(4, 1.0, (1.0,) * 4)
    eps = 0.05
    t = fermi_mixing_time(sys, eps)
    assert fermi_mixing_bound(sys, t) <= eps ** 2 * (1 + 1e-9)
    with pytest.raises(ValueError):
        fermi_mixing_time(sys, 0.0)


def test_sampled_distance_below_mixing_bound(rng):
    sys = FermionSystem(2, 1.0, (1.0, 1.0))
    spec, sigma = build_fermi_generator(sys), sys.gibbs_state()
    states = [random_state(4, rng) for _ in range(50)]
    for t in (1.0, 2.0):
        d = max(trace_distance(r, sigma) for r in evolve_many(spec, states, t))
        assert 4 * d * d <= fermi_mixing_bound(sys, t)


def test_spectral_basis_is_orthonormal_eigenbasis():
    sys = FermionSystem(2, 0.8, (1.0, 1.4))
    basis = fermi_spectral_basis(sys)
    L = build_generator(build_fermi_generator(sys))
    sigma = sys.gibbs_state().op
    gram = np.array([[np.trace(x.conj().T @ sigma @ y) for y in basis.vectors] for x in basis.vectors])
    assert np.allclose(gram, np.eye(16), atol=1e-12)
    for lam, f in zip(basis.eigenvalues, basis.vectors):
        assert np.allclose(L.apply(f), -lam * f, atol=1e-10)


def test_numeric_spectrum_at_five_modes():
    sys = FermionSystem(5, 0.5, (1.0, 1.1, 1.2, 1.3, 1.4))
    numeric = spectral_decomposition(build_generator(build_fermi_generator(sys)),
                                     GnsSpace.of(sys.gibbs_state())).eigenvalues
    closed = np.sort(fermi_eigensystem(sys, build_vectors=False).eigenvalues)
    assert np.max(np.abs(numeric - closed)) < 1e-9


def test_hypercube_restriction_is_reversible_walk():
    sys = FermionSystem(3, 0.9, (1.0, 0.5, 2.0))
    q = hypercube_restriction(sys)
    assert np.allclose(q.sum(axis=1), 0, atol=1e-13)
    off = q - np.diag(np.diag(q))
    assert (off >= 0).all()
    pi = np.diag(sys.gibbs_state().op).real
    assert np.allclose(pi[:, None] * q, (pi[:, None] * q).T, atol=1e-13)
    # jumps only between neighbours of the hypercube
    for x, y in itertools.product(range(8), repeat=2):
        flips = sum(a != b for a, b in zip(occupation(sys, x), occupation(sys, y)))
        if flips > 1:
            assert q[x, y] == 0


def test_occupation_order():
    sys = FermionSystem(3, 1.0, (1.0,) * 3)
    assert occupation(sys, 0b100) == (1, 0, 0)
