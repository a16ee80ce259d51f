"""Numerical invariant checks shared by the ``verify`` command and the tests.

Each check returns a :class:`CheckResult` carrying the measured worst-case
value and the tolerance it was compared with.  ``scale`` multiplies every
tolerance (0.5 under ``--strict``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from . import boson, casimir, fermion, rootsys
from .lindblad import (LindbladSpec, ad_sigma_construction, build_generator, check_detailed_balance,
                       check_time_reversal, ergodicity_bound, evolve_many,
                       spectral_decomposition)
from .linops import (DensityState, GnsSpace, chi2_divergence, random_operator, random_state,
                     relative_entropy, trace_distance)


@dataclass(frozen=True)
class CheckResult:
    name: str
    value: float
    tolerance: float
    passed: bool
    detail: str = ""

    def as_dict(self) -> dict:
        return {"name": self.name, "value": self.value, "tolerance": self.tolerance,
                "passed": self.passed, "detail": self.detail}


def _flag(name: str, ok: bool, detail: str = "") -> CheckResult:
    return CheckResult(name, 0.0 if ok else 1.0, 0.0, bool(ok), detail)


# --- root systems -----------------------------------------------------------

def g0_table(max_rank: int = 8, **_) -> CheckResult:
    bad = [name for name, res in rootsys.g0_table(max_rank)
           if res.g0 != rootsys.expected_g0(*rootsys.parse_type(name))]
    return _flag("g0-table", not bad, "mismatch: " + ",".join(bad) if bad else "all types exact")


# --- Casimir ------------------------------------------------------------------

def sl2_spectra(max_n: int = 8, scale: float = 1.0, **_) -> CheckResult:
    worst, bad = 0.0, []
    for n in range(2, max_n + 1):
        basis = casimir.casimir_spectral_basis(casimir.killing_orthonormalize(casimir.sl2_rep(n)))
        expected = np.sort(np.concatenate([[i * (i + 1) / 2] * (2 * i + 1) for i in range(n)]))
        worst = max(worst, float(np.max(np.abs(basis.eigenvalues - expected))),
                    abs(float(basis.eigenvalues[1]) - 1.0))
        if len(casimir.clusters(basis.eigenvalues)) != n:
            bad.append(n)
    return CheckResult("casimir-sl2-spectra", worst, 1e-8 * scale, worst <= 1e-8 * scale and not bad,
                       f"n=2..{max_n}")


def cross_oracle(names=("sl3", "adj-sl3", "sp4", "so5"), scale: float = 1.0, **_) -> CheckResult:
    worst, bad = 0.0, []
    for name in names:
        cmp = casimir.compare_with_prediction(casimir.builtin_rep(name))
        worst = max(worst, cmp["max_value_deviation"])
        if not cmp["multiplicities_match"]:
            bad.append(name)
    tol = 1e-8 * scale
    return CheckResult("casimir-cross-oracle", worst, tol, worst <= tol and not bad,
                       ",".join(names) + (f"; multiplicity mismatch {bad}" if bad else ""))


def norm_bound(names=(("sl2", 4), ("sl3", None), ("adj-sl3", None), ("sp4", None)),
               scale: float = 1.0, **_) -> CheckResult:
    ratio, ident = 0.0, 0.0
    for name, n in names:
        rep = casimir.builtin_rep(name, n)
        rep_basis = casimir.casimir_spectral_basis(casimir.killing_orthonormalize(rep))
        rep_report = casimir.check_norm_bound(rep_basis)
        ratio, ident = max(ratio, rep_report.max_ratio), max(ident, rep_report.max_identity_residual)
    tol = 1e-8 * scale
    excess = max(ratio - 1.0, ident)
    return CheckResult("casimir-norm-bound", excess, tol, excess <= tol,
                       f"max ratio {ratio:.17g}, identity residual {ident:.3g}")


def gamma_calculus(samples: int = 50, seed: int = 0, scale: float = 1.0, **_) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst_margin, worst_tensor = math.inf, 0.0
    for name, n in (("sl2", 3), ("sl2", 4), ("sl3", None)):
        frame = casimir.killing_orthonormalize(casimir.builtin_rep(name, n))
        worst_margin = min(worst_margin, casimir.gamma_calculus_check(frame, samples, rng))
        worst_tensor = max(worst_tensor, casimir.tensor_identity_residual(frame))
    tol = 1e-8 * scale
    value = max(-worst_margin, worst_tensor)
    return CheckResult("gamma-calculus", value, tol, value <= tol,
                       f"min margin {worst_margin:.6g}, tensor identity {worst_tensor:.3g}")


def sl2_classical(max_n: int = 12, **_) -> CheckResult:
    bad = []
    for n in range(2, max_n + 1):
        cr = casimir.sl2_classical_restriction(n)
        if any(casimir.classical_eigen_residual(cr, i) != 0 for i in range(n)):
            bad.append(n)
        if not all(casimir.classical_form_agreement(n, i) for i in range(n)):
            bad.append(n)
    return _flag("sl2-classical-exact", not bad, f"n=2..{max_n}")


def casimir_trace_bound(max_n: int = 4, samples: int = 100, seed: int = 0,
                        times=(0.0, 0.5, 1.0, 2.0, 4.0), scale: float = 1.0, **_) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = -math.inf
    for n in range(2, max_n + 1):
        frame = casimir.killing_orthonormalize(casimir.sl2_rep(n))
        worst = max(worst, _trace_bound_excess(frame.spec(), casimir.trace_state(n),
                                               casimir.casimir_spectral_basis(frame), rng, samples, times))
    tol = 1e-9 * scale
    return CheckResult("casimir-trace-bound", worst, tol, worst <= tol, f"sl2 n=2..{max_n}")


def _trace_bound_excess(spec, sigma, basis, rng, samples, times) -> float:
    states = [random_state(spec.dim, rng) for _ in range(samples)]
    worst = -math.inf
    for t in times:
        for rho, rho_t in zip(states, evolve_many(spec, states, t)):
            worst = max(worst, trace_distance(rho_t, sigma) ** 2 - ergodicity_bound(basis, rho, t))
    return worst


# --- fermions -----------------------------------------------------------------

def fermion_closed_forms(max_N: int = 3, betas=(0.0, 0.5, 2.0), scale: float = 1.0, **_) -> CheckResult:
    worst = 0.0
    for N in range(1, max_N + 1):
        for beta in betas:
            omegas = tuple(1.0 + 0.25 * k for k in range(N))
            worst = max(worst, fermion_deviation(fermion.FermionSystem(N, beta, omegas)))
    tol = 1e-9 * scale
    return CheckResult("fermion-closed-forms", worst, tol, worst <= tol, f"N<={max_N}")


def fermion_deviation(sys: fermion.FermionSystem) -> float:
    """Worst deviation of closed-form eigenvalues, Gram entries and norms from numerics."""
    spec = fermion.build_fermi_generator(sys)
    sigma = sys.gibbs_state()
    L = build_generator(spec)
    numeric = spectral_decomposition(L, GnsSpace.of(sigma)).eigenvalues
    es = fermion.fermi_eigensystem(sys)
    worst = float(np.max(np.abs(np.sort(es.eigenvalues) - numeric)))
    V = np.array(es.vectors)
    flat = V.reshape(len(V), -1)
    # tr(x* sigma y) is the flat dot product of x and sigma y
    gram = flat.conj() @ (sigma.op @ V).reshape(len(V), -1).T
    worst = max(worst, float(np.max(np.abs(gram - np.diag(es.gns_norms)))))
    worst = max(worst, float(np.max(np.abs(np.linalg.norm(V, 2, axis=(1, 2)) - es.op_norms))))
    d = sys.dim
    images = (L.matrix @ flat.T).T.reshape(-1, d, d)
    worst = max(worst, float(np.max(np.abs(images + es.eigenvalues[:, None, None] * V))))
    return worst


def fermion_trace_bound(max_N: int = 2, samples: int = 100, seed: int = 0,
                        times=(0.0, 0.5, 1.0, 2.0, 4.0), scale: float = 1.0, **_) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = -math.inf
    for N in range(1, max_N + 1):
        sys = fermion.FermionSystem(N, 1.0, (1.0,) * N)
        worst = max(worst, _trace_bound_excess(fermion.build_fermi_generator(sys), sys.gibbs_state(),
                                               fermion.fermi_spectral_basis(sys), rng, samples, times))
    tol = 1e-9 * scale
    return CheckResult("fermion-trace-bound", worst, tol, worst <= tol, f"N<={max_N}")


def fermion_mixing(max_N: int = 2, samples: int = 100, seed: int = 0, times=(1.0, 2.0, 3.0),
                   scale: float = 1.0, **_) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = -math.inf
    for N in range(1, max_N + 1):
        sys = fermion.FermionSystem(N, 1.0, (1.0,) * N)
        spec, sigma = fermion.build_fermi_generator(sys), sys.gibbs_state()
        states = [random_state(sys.dim, rng) for _ in range(samples)]
        for t in times:
            d = max(trace_distance(r, sigma) for r in evolve_many(spec, states, t))
            worst = max(worst, 4 * d * d - fermion.fermi_mixing_bound(sys, t))
    tol = 1e-10 * scale
    return CheckResult("fermion-mixing-bound", worst, tol, worst <= tol, f"N<={max_N}, t>=1")


# --- bosons -------------------------------------------------------------------

def boson_eigen(max_degree_1: int = 6, max_degree_2: int = 3, scale: float = 1.0, **_) -> CheckResult:
    worst = 0.0
    for sys, D in ((boson.BosonSystem(1.0, (1.0,)), max_degree_1),
                   (boson.BosonSystem(0.7, (1.0, 1.6)), max_degree_2)):
        for l, m in boson_index_pairs(sys.N, D):
            worst = max(worst, boson.check_eigenrelation(sys, l, m),
                        (boson.eigenvector_g(sys, l, m) - boson.eigenvector_g(sys, l, m, "antinormal"))
                        .max_abs_coefficient())
    tol = 1e-10 * scale
    return CheckResult("boson-eigen-relations", worst, tol, worst <= tol)


def boson_index_pairs(N: int, max_degree: int):
    idx = [c for s in range(max_degree + 1) for c in _tuples(N, s)]
    return [(l, m) for l in idx for m in idx if sum(l) + sum(m) <= max_degree]


def _tuples(N: int, s: int):
    return [tuple(c.coords) for c in rootsys.shell(N, s)]


def boson_norms(max_degree: int = 3, scale: float = 1.0, **_) -> CheckResult:
    sys = boson.BosonSystem(1.0, (1.0,))
    worst = 0.0
    for l, m in boson_index_pairs(1, max_degree):
        worst = max(worst, boson.gns_norm_g(sys, l, m)["relative_error"])
    tol = 1e-6 * scale
    return CheckResult("boson-norms", worst, tol, worst <= tol)


def boson_classical(max_ell: int = 10, **_) -> CheckResult:
    sys = boson.BosonSystem.exact([Fraction(3, 2)])
    bad = [ell for ell in range(max_ell + 1) if not boson.classical_eigen_residual(sys, ell).is_zero]
    lam_ok = all(2 * sys.eigenvalue((ell,)) == 4 * sys.sh[0] * ell for ell in range(max_ell + 1))
    return _flag("boson-classical-exact", not bad and lam_ok, f"ell<={max_ell}, q=3/2")


# --- linops / lindblad -------------------------------------------------------

def divergence_chain(dims=(2, 3, 4, 8), pairs: int = 500, seed: int = 0, scale: float = 1.0, **_) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = -math.inf
    for d in dims:
        worst = max(worst, divergence_excess(d, pairs, rng))
    tol = 1e-10 * scale
    return CheckResult("divergence-chain", worst, tol, worst <= tol, f"dims {list(dims)}, {pairs} pairs")


def divergence_excess(dim: int, pairs: int, rng: np.random.Generator) -> float:
    """max over sampled pairs of max(4 d_tr^2 - chi2, Ent - chi2)."""
    worst = -math.inf
    for _ in range(pairs):
        rho, sigma = random_state(dim, rng), random_state(dim, rng)
        chi2 = chi2_divergence(rho, GnsSpace.of(sigma))
        worst = max(worst, 4 * trace_distance(rho, sigma) ** 2 - chi2, relative_entropy(rho, sigma) - chi2)
    return worst


def thermal_construction(dim: int, beta: float, rng: np.random.Generator) -> tuple[LindbladSpec, DensityState]:
    """Generator from matrix units |i><j| of a random thermal state, with random weights."""
    energies = np.sort(rng.uniform(0, 2, dim))
    sigma = DensityState.from_probabilities(np.exp(-beta * energies) / np.exp(-beta * energies).sum())
    pairs = []
    for i in range(dim):
        for j in range(i + 1, dim):
            c = rng.uniform(0.3, 1.5)
            v = np.zeros((dim, dim), dtype=complex)
            v[i, j] = c
            w = -beta * (energies[i] - energies[j])
            pairs += [(w, v), (-w, v.conj().T)]
    return ad_sigma_construction(sigma, pairs), sigma


def detailed_balance(trials: int = 5, seed: int = 0, scale: float = 1.0, **_) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for k in range(trials):
        spec, sigma = thermal_construction(2 + k % 3, 0.8, rng)
        worst = max(worst, check_detailed_balance(spec, sigma).residual_sufficient)
    tol = 1e-10 * scale
    return CheckResult("detailed-balance", worst, tol, worst <= tol)


def time_reversal(seed: int = 0, scale: float = 1.0, **_) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for n in (2, 3):
        spec, sigma = thermal_construction(3, 1.0, rng)
        times = np.sort(rng.uniform(0, 1.5, n))
        ops = [random_operator(3, rng) for _ in range(n)]
        worst = max(worst, check_time_reversal(spec, sigma, times, ops))
    tol = 1e-8 * scale
    return CheckResult("time-reversal", worst, tol, worst <= tol, "n=2,3")


SUITES: dict[str, list[tuple[str, Callable, dict]]] = {
    "core": [
        ("g0-table", g0_table, {}),
        ("casimir-sl2-spectra", sl2_spectra, {"max_n": 5}),
        ("casimir-cross-oracle", cross_oracle, {"names": ("sl3", "sp4")}),
        ("casimir-norm-bound", norm_bound, {"names": (("sl2", 4), ("sl3", None))}),
        ("gamma-calculus", gamma_calculus, {"samples": 20}),
        ("sl2-classical-exact", sl2_classical, {"max_n": 8}),
        ("casimir-trace-bound", casimir_trace_bound, {"max_n": 3, "samples": 50}),
        ("fermion-closed-forms", fermion_closed_forms, {"max_N": 2}),
        ("fermion-trace-bound", fermion_trace_bound, {"max_N": 2, "samples": 50}),
        ("fermion-mixing-bound", fermion_mixing, {"max_N": 2, "samples": 50}),
        ("boson-eigen-relations", boson_eigen, {"max_degree_1": 5, "max_degree_2": 3}),
        ("boson-norms", boson_norms, {"max_degree": 2}),
        ("boson-classical-exact", boson_classical, {"max_ell": 6}),
        ("divergence-chain", divergence_chain, {"dims": (2, 3), "pairs": 100}),
        ("detailed-balance", detailed_balance, {}),
        ("time-reversal", time_reversal, {}),
    ],
    "full": [
        ("g0-table", g0_table, {}),
        ("casimir-sl2-spectra", sl2_spectra, {"max_n": 8}),
        ("casimir-cross-oracle", cross_oracle, {}),
        ("casimir-norm-bound", norm_bound, {}),
        ("gamma-calculus", gamma_calculus, {"samples": 200}),
        ("sl2-classical-exact", sl2_classical, {"max_n": 30}),
        ("casimir-trace-bound", casimir_trace_bound, {"max_n": 6, "samples": 500}),
        ("fermion-closed-forms", fermion_closed_forms, {"max_N": 4}),
        ("fermion-trace-bound", fermion_trace_bound, {"max_N": 4, "samples": 500}),
        ("fermion-mixing-bound", fermion_mixing, {"max_N": 3, "samples": 500}),
        ("boson-eigen-relations", boson_eigen, {"max_degree_1": 8, "max_degree_2": 4}),
        ("boson-norms", boson_norms, {"max_degree": 4}),
        ("boson-classical-exact", boson_classical, {"max_ell": 10}),
        ("divergence-chain", divergence_chain, {"dims": (2, 3, 4, 8), "pairs": 500}),
        ("detailed-balance", detailed_balance, {"trials": 12}),
        ("time-reversal", time_reversal, {}),
    ],
}
