import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import logm

from lindblad_lab.linops import (DensityState, DimensionError, GnsSpace, StateError, chi2_divergence,
                                 gns_inner, gns_norm, operator_norm, random_state, relative_entropy,
                                 trace_distance)


def _variational_trace_distance(rho, sigma):
    # sup over projectors P of tr(P(rho - sigma)) = half the nuclear norm
    return 0.5 * np.linalg.svd(rho.op - sigma.op, compute_uv=False).sum()


def test_density_state_rejects_non_states():
    with pytest.raises(StateError):
        DensityState.from_matrix(np.diag([1.5, -0.5]))
    with pytest.raises(StateError):
        DensityState.from_matrix(np.diag([0.5, 0.6]))
    with pytest.raises(DimensionError):
        DensityState.from_matrix(np.ones((2, 3)))


def test_faithfulness_flag():
    assert DensityState.maximally_mixed(3).faithful
    assert not DensityState.from_probabilities([1.0, 0.0]).faithful


def test_gibbs_matches_direct_exponential():
    h = np.diag([0.0, 1.0, 3.0])
    s = DensityState.gibbs(h, 0.7)
    p = np.exp(-0.7 * np.diag(h))
    assert np.allclose(np.diag(s.op).real, p / p.sum(), atol=1e-14)


def test_random_state_is_full_rank_and_normalised(rng):
    s = random_state(5, rng)
    assert s.faithful
    assert abs(np.trace(s.op) - 1) < 1e-12
    assert np.linalg.eigvalsh(s.op).min() > 0


def test_trace_distance_matches_variational_form(rng):
    for d in (2, 3, 6):
        rho, sigma = random_state(d, rng), random_state(d, rng)
        assert abs(trace_distance(rho, sigma) - _variational_trace_distance(rho, sigma)) < 1e-12


def test_trace_distance_is_a_metric(rng):
    for _ in range(50):
        a, b, c = (random_state(4, rng) for _ in range(3))
        assert trace_distance(a, b) == pytest.approx(trace_distance(b, a), abs=0)
        assert trace_distance(a, c) <= trace_distance(a, b) + trace_distance(b, c) + 1e-10
        assert trace_distance(a, a) < 1e-14


def test_trace_distance_of_orthogonal_pure_states():
    a = DensityState.from_probabilities([1, 0])
    b = DensityState.from_probabilities([0, 1])
    assert trace_distance(a, b) == pytest.approx(1.0)


def test_gns_inner_matches_definition(rng):
    sigma = random_state(3, rng)
    space = GnsSpace.of(sigma)
    a, b = rng.standard_normal((2, 3, 3)) + 1j * rng.standard_normal((2, 3, 3))
    expected = np.trace(a.conj().T @ sigma.op @ b)
    assert abs(gns_inner(space, a, b) - expected) < 1e-12
    assert gns_norm(space, a) ** 2 == pytest.approx(np.trace(a.conj().T @ sigma.op @ a).real)


def test_gns_inner_positive_definite(rng):
    space = GnsSpace.of(random_state(4, rng))
    for _ in range(20):
        a = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        assert gns_inner(space, a, a).real > 0


def test_operator_norm_is_largest_singular_value(rng):
    a = rng.standard_normal((4, 4))
    assert operator_norm(a) == pytest.approx(np.linalg.norm(a, 2))


def test_chi2_is_gns_norm_of_density_ratio(rng):
    rho, sigma = random_state(3, rng), random_state(3, rng)
    x = np.linalg.solve(sigma.op, rho.op) - np.eye(3)
    expected = np.trace(x.conj().T @ sigma.op @ x).real
    assert chi2_divergence(rho, GnsSpace.of(sigma)) == pytest.approx(expected, rel=1e-10)


def test_relative_entropy_matches_logm(rng):
    rho, sigma = random_state(4, rng), random_state(4, rng)
    expected = np.trace(rho.op @ (logm(rho.op) - logm(sigma.op))).real
    assert relative_entropy(rho, sigma) == pytest.approx(expected, rel=1e-9)


def test_relative_entropy_with_rank_deficient_rho():
    rho = DensityState.from_probabilities([1.0, 0.0])
    sigma = DensityState.from_probabilities([0.25, 0.75])
    assert relative_entropy(rho, sigma) == pytest.approx(np.log(4))


def test_chi2_equality_case():
    rho = DensityState.from_probabilities([0.75, 0.25])
    sigma = DensityState.from_probabilities([0.5, 0.5])
    assert chi2_divergence(rho, GnsSpace.of(sigma)) == pytest.approx(0.25)
    assert 4 * trace_distance(rho, sigma) ** 2 == pytest.approx(0.25)


def test_chi2_vanishes_at_sigma(rng):
    sigma = random_state(4, rng)
    assert chi2_divergence(sigma, GnsSpace.of(sigma)) < 1e-12


def test_chi2_via_variational_sup(rng):
    # sup over ||a||_sigma = 1 of |rho(a) - sigma(a)|^2, attained at the density ratio
    rho, sigma = random_state(3, rng), random_state(3, rng)
    space = GnsSpace.of(sigma)
    chi2 = chi2_divergence(rho, space)
    for _ in range(200):
        a = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        a /= gns_norm(space, a)
        assert abs(np.trace(rho.op @ a) - np.trace(sigma.op @ a)) ** 2 <= chi2 + 1e-10


def test_relative_entropy_rejects_support_violation():
    rho = DensityState.from_probabilities([0.5, 0.5])
    sigma = DensityState.from_probabilities([1.0, 0.0])
    with pytest.raises(StateError):
        relative_entropy(rho, sigma)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 5), st.integers(0, 2**32 - 1))
def test_divergence_chain_property(d, seed):
    rng = np.random.default_rng(seed)
    rho, sigma = random_state(d, rng), random_state(d, rng)
    chi2 = chi2_divergence(rho, GnsSpace.of(sigma))
    assert 4 * trace_distance(rho, sigma) ** 2 <= chi2 + 1e-10
    assert relative_entropy(rho, sigma) <= chi2 + 1e-10
