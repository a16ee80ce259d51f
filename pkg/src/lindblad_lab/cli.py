"""Command-line front end: ``lindblad-lab <command> [options]``.

Every command writes a single report (JSON by default) holding the inputs,
library version, tolerances and results.  Reports contain no timing unless
``--timing`` is given, so identical arguments give identical bytes.

Exit status: 0 pass, 1 numerical check failed, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Any

import numpy as np

from . import __version__, boson, casimir, checks, fermion, rootsys, serialize
from .lindblad import (NonErgodicError, build_generator, check_detailed_balance, check_ergodic,
                       ergodicity_bound_uniform, sampled_trace_distances, spectral_decomposition,
                       spectral_gap)
from .linops import (HERMITIAN_TOL, LOG_FLOOR, DensityState, DimensionError, GnsSpace, StateError,
                     chi2_divergence, random_state, relative_entropy, trace_distance)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
THREADS_ENV = "LINDBLAD_LAB_THREADS"
MAX_BOSON_DIM = 64  # dense superoperator of size dim^2
DEFAULT_FORMAT = {"g0-table": "md", "decay-curve": "csv"}


class UsageError(Exception):
    pass


class Report:
    """One command's output; ``header``/``rows`` back the csv and md formats."""

    def __init__(self, command: str, inputs: dict, tolerances: dict | None = None):
        self.command = command
        self.inputs = inputs
        self.tolerances = tolerances or {}
        self.results: dict[str, Any] = {}
        self.passed = True
        self.header: list[str] | None = None
        self.rows: list[list[Any]] = []
        self.comments: list[str] = []

    def as_dict(self) -> dict:
        return {"command": self.command, "inputs": self.inputs, "version": __version__,
                "tolerances": self.tolerances, "results": self.results, "passed": self.passed}


# --- argument parsing ---------------------------------------------------------

def _float_list(text: str) -> tuple[float, ...]:
    try:
        vals = tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _times(text: str) -> tuple[float, ...]:
    """'0,0.5,1' or 'start:stop:step' (stop inclusive)."""
    if ":" in text:
        try:
            a, b, h = (float(x) for x in text.split(":"))
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad time range {text!r}")
        if h <= 0 or b < a:
            raise argparse.ArgumentTypeError(f"bad time range {text!r}")
        n = int(math.floor((b - a) / h + 1e-9))
        return tuple(round(a + k * h, 12) for k in range(n + 1))
    return _float_list(text)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="seed for random sampling (default 0)")
    common.add_argument("-o", "--output", help="write the report here instead of stdout")
    common.add_argument("--format", choices=("json", "csv", "md"), help="report format")
    common.add_argument("--strict", action="store_true", help="halve every tolerance")
    common.add_argument("--timing", action="store_true", help="include wall-clock timings")

    parser = argparse.ArgumentParser(prog="lindblad-lab",
                                     description="Spectra and ergodicity bounds of reversible Lindblad generators.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("divergence", parents=[common], help="sample 4 d_tr^2 <= chi2 and Ent <= chi2")
    p.add_argument("--dims", type=_int_list, default=(2, 3, 4, 8))
    p.add_argument("--pairs", type=int, default=500)

    p = sub.add_parser("lindblad-spectrum", parents=[common], help="spectrum of a generator given as JSON")
    p.add_argument("--generator", required=True, help="generator JSON {dim, hamiltonian?, jumps}")
    p.add_argument("--sigma", help="reference state as operator JSON (default: maximally mixed)")

    p = sub.add_parser("fermion", parents=[common], help="fermionic closed forms and mixing bound")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--omegas", type=_float_list, required=True)
    p.add_argument("--t", type=float, default=2.0)
    p.add_argument("--epsilon", type=float, default=0.01)
    p.add_argument("--samples", type=int, default=100)

    p = sub.add_parser("boson", parents=[common], help="bosonic eigen-relations or moment-class bound")
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--omegas", type=_float_list, default=(1.0,))
    mode = p.add_mutually_exclusive_group(required=True)
    mode.add_argument("--check-eigen", action="store_true")
    mode.add_argument("--bound", action="store_true")
    p.add_argument("--max-degree", type=int, default=4)
    p.add_argument("--K", type=float, default=1.0)
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--epsilon", type=float, default=0.01)

    p = sub.add_parser("g0-table", parents=[common], help="gap table over the simple types")
    p.add_argument("--max-rank", type=int, default=8)

    p = sub.add_parser("casimir", parents=[common], help="Casimir scalars and Casimir generators")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--type", dest="type_label", help="simple type, e.g. F4 (with --mu)")
    src.add_argument("--algebra", help="built-in representation: sl2, sl3, sp4, so5, adj-sl3, ...")
    src.add_argument("--rep-file", help="JSON {matrices, type?, highest_weight?}")
    p.add_argument("--mu", type=_int_list, help="dominant weight in fundamental-weight coordinates")
    p.add_argument("--n", type=int, help="dimension parameter of the built-in representation")
    p.add_argument("--report", default="spectrum,gap",
                   help="comma list from spectrum,gap,norm-bound,gamma")
    p.add_argument("--samples", type=int, default=200, help="sampled operators for the gamma report")

    p = sub.add_parser("verify", parents=[common], help="run an invariant suite")
    p.add_argument("--suite", choices=sorted(checks.SUITES), default="core")

    p = sub.add_parser("decay-curve", parents=[common], help="CSV of t, bound, sampled sup d_tr")
    p.add_argument("--system", choices=("fermion", "casimir", "boson"), required=True)
    p.add_argument("--N", type=int, help="modes (default 2 for fermion, 1 for boson)")
    p.add_argument("--n", type=int, default=4, help="sl2 irrep dimension")
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--omegas", type=_float_list)
    p.add_argument("--times", type=_times, default=_times("0:5:0.5"))
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--cutoff", type=int, default=30, help="boson Fock cutoff per mode")
    p.add_argument("--K", type=float, default=4.0)
    return parser


# --- helpers ------------------------------------------------------------------

def _scale(args) -> float:
    return 0.5 if args.strict else 1.0


def _workers(n_tasks: int) -> int:
    env = os.environ.get(THREADS_ENV)
    cap = os.cpu_count() or 1
    if env:
        try:
            cap = max(1, int(env))
        except ValueError:
            raise UsageError(f"{THREADS_ENV} must be a positive integer, got {env!r}")
    return max(1, min(cap, n_tasks))


def _child_seeds(seed: int, n: int) -> list[int]:
    return [int(s.generate_state(1)[0]) for s in np.random.SeedSequence(seed).spawn(n)]


def _load_json(path: str) -> Any:
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}")
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path} is not valid JSON: {exc}")


def _fermion_system(N, beta, omegas) -> fermion.FermionSystem:
    if omegas is None:
        omegas = (1.0,) * N
    if len(omegas) == 1 and N > 1:
        omegas = omegas * N
    if len(omegas) != N:
        raise UsageError(f"--omegas needs {N} values, got {len(omegas)}")
    return fermion.FermionSystem(N, beta, tuple(omegas))


def _value_multiplicity(evals, rel_tol=casimir.CLUSTER_REL_TOL) -> list[dict]:
    evals = np.sort(np.asarray(evals, dtype=float))
    return [{"value": float(np.mean(evals[a:b])), "multiplicity": b - a}
            for a, b in casimir.clusters(evals, rel_tol)]


# --- commands -----------------------------------------------------------------

def cmd_divergence(args) -> Report:
    if any(d < 1 for d in args.dims) or args.pairs < 1:
        raise UsageError("--dims entries and --pairs must be positive")
    tol = 1e-10 * _scale(args)
    rep = Report("divergence", {"dims": list(args.dims), "pairs": args.pairs, "seed": args.seed},
                 {"violation": tol, "log_floor": LOG_FLOOR})
    rng = np.random.default_rng(args.seed)
    rep.header = ["dim", "max_4dtr2_minus_chi2", "max_ent_minus_chi2", "violations"]
    per_dim = []
    for d in args.dims:
        w_tr, w_ent, bad = -math.inf, -math.inf, 0
        for _ in range(args.pairs):
            rho, sigma = random_state(d, rng), random_state(d, rng)
            chi2 = chi2_divergence(rho, GnsSpace.of(sigma))
            a = 4 * trace_distance(rho, sigma) ** 2 - chi2
            b = relative_entropy(rho, sigma) - chi2
            w_tr, w_ent = max(w_tr, a), max(w_ent, b)
            bad += int(a > tol or b > tol)
        per_dim.append({"dim": d, "max_4dtr2_minus_chi2": w_tr, "max_ent_minus_chi2": w_ent,
                        "violations": bad})
        rep.rows.append([d, w_tr, w_ent, bad])
        rep.passed &= bad == 0
    rep.results = {"per_dim": per_dim}
    return rep


def cmd_lindblad_spectrum(args) -> Report:
    try:
        spec = serialize.spec_from_json(_load_json(args.generator))
        if args.sigma:
            sigma = DensityState.from_matrix(serialize.operator_from_json(_load_json(args.sigma)))
        else:
            sigma = DensityState.maximally_mixed(spec.dim)
        if sigma.dim != spec.dim:
            raise DimensionError(f"state has dimension {sigma.dim}, generator {spec.dim}")
    except (ValueError, StateError, DimensionError) as exc:
        raise UsageError(str(exc))
    tol = 1e-9 * _scale(args)
    rep = Report("lindblad-spectrum", {"generator": args.generator, "sigma": args.sigma},
                 {"detailed_balance": tol, "hermitian": HERMITIAN_TOL})
    db = check_detailed_balance(spec, sigma, tol)
    rep.results["detailed_balance"] = {"sufficient": db.holds_sufficient, "necessary": db.holds_necessary,
                                       "residual_sufficient": db.residual_sufficient,
                                       "residual_necessary": db.residual_necessary}
    if not db.holds_necessary:
        rep.results["note"] = "generator is not self-adjoint in L2(sigma); no spectral basis"
        rep.passed = False
        return rep
    basis = spectral_decomposition(build_generator(spec), GnsSpace.of(sigma))
    rep.results["ergodic"] = check_ergodic(spec)
    try:
        rep.results["gap"] = spectral_gap(basis)
    except NonErgodicError:
        rep.results["gap"] = None
    rep.results["eigenvalues"] = _value_multiplicity(basis.eigenvalues)
    rep.header = ["index", "eigenvalue"]
    rep.rows = [[k, float(v)] for k, v in enumerate(basis.eigenvalues)]
    return rep


def cmd_fermion(args) -> Report:
    if args.N < 1 or args.N > fermion.MAX_MODES:
        raise UsageError(f"--N must lie in 1..{fermion.MAX_MODES}")
    try:
        sys_ = _fermion_system(args.N, args.beta, args.omegas)
    except ValueError as exc:
        raise UsageError(str(exc))
    tol = 1e-10 * _scale(args)
    rep = Report("fermion", {"N": args.N, "beta": args.beta, "omegas": list(sys_.omegas), "t": args.t,
                             "epsilon": args.epsilon, "samples": args.samples, "seed": args.seed},
                 {"bound_violation": tol})
    es = fermion.fermi_eigensystem(sys_, build_vectors=False)
    rep.results["eigenvalues"] = _value_multiplicity(es.eigenvalues)
    rep.results["gap"] = float(np.sort(es.eigenvalues)[1])
    bound = fermion.fermi_mixing_bound(sys_, args.t)
    rep.results["bound"] = bound
    rep.results["mixing_time"] = fermion.fermi_mixing_time(sys_, args.epsilon)
    rep.header = ["value", "multiplicity"]
    rep.rows = [[e["value"], e["multiplicity"]] for e in rep.results["eigenvalues"]]
    if args.N <= 5 and args.samples > 0:
        rng = np.random.default_rng(args.seed)
        states = [random_state(sys_.dim, rng) for _ in range(args.samples)]
        d = sampled_trace_distances(fermion.build_fermi_generator(sys_), sys_.gibbs_state(), states, args.t)
        observed = float(4 * np.max(d) ** 2)
        rep.results["sampled_max_4dtr2"] = observed
        if args.t >= 1:
            rep.passed = observed <= bound + tol
        else:
            rep.results["note"] = "bound applies for t >= 1; not compared"
    return rep


def cmd_boson(args) -> Report:
    try:
        sys_ = boson.BosonSystem(args.beta, tuple(args.omegas))
    except ValueError as exc:
        raise UsageError(str(exc))
    inputs = {"beta": args.beta, "omegas": list(args.omegas)}
    if args.check_eigen:
        if not 0 <= args.max_degree <= boson.MAX_DEGREE:
            raise UsageError(f"--max-degree must lie in 0..{boson.MAX_DEGREE}")
        tol = 1e-10 * _scale(args)
        rep = Report("boson", {**inputs, "mode": "check-eigen", "max_degree": args.max_degree},
                     {"residual": tol})
        rep.header = ["l", "m", "eigenvalue", "residual", "form_difference"]
        worst = 0.0
        for l, m in checks.boson_index_pairs(sys_.N, args.max_degree):
            res = boson.check_eigenrelation(sys_, l, m)
            diff = (boson.eigenvector_g(sys_, l, m)
                    - boson.eigenvector_g(sys_, l, m, "antinormal")).max_abs_coefficient()
            lam = float(sys_.eigenvalue(tuple(a + b for a, b in zip(l, m))))
            rep.rows.append([_idx(l), _idx(m), lam, float(res), float(diff)])
            worst = max(worst, res, diff)
        rep.results = {"pairs": len(rep.rows), "max_residual": float(worst)}
        rep.passed = worst <= tol
        return rep
    if args.K <= 0 or args.epsilon <= 0:
        raise UsageError("--K and --epsilon must be positive")
    rep = Report("boson", {**inputs, "mode": "bound", "K": args.K, "t": args.t, "epsilon": args.epsilon})
    c = boson.bose_constants(sys_, args.K)
    rep.results = {"K_effective": c.K, "T": c.T, "A": c.A, "rate": c.rate,
                   "bound": boson.bose_bound(sys_, args.K, args.t),
                   "mixing_time": boson.bose_mixing_time(sys_, args.K, args.epsilon)}
    rep.header = list(rep.results)
    rep.rows = [list(rep.results.values())]
    return rep


def _idx(t: tuple[int, ...]) -> str:
    return "-".join(str(x) for x in t)


def cmd_g0_table(args) -> Report:
    if args.max_rank < 2 or args.max_rank > rootsys.MAX_RANK:
        raise UsageError(f"--max-rank must lie in 2..{rootsys.MAX_RANK}")
    rep = Report("g0-table", {"max_rank": args.max_rank})
    rep.header = ["type", "g0", "minimizer", "expected"]
    table = []
    for name, res in rootsys.g0_table(args.max_rank):
        expected = rootsys.expected_g0(*rootsys.parse_type(name))
        table.append({"type": name, "g0": res.g0, "minimizer": str(res.minimizer), "expected": expected})
        rep.rows.append([name, str(res.g0), str(res.minimizer), str(expected)])
        rep.passed &= res.g0 == expected
    rep.results = {"table": table}
    return rep


def cmd_casimir(args) -> Report:
    if args.type_label:
        return _casimir_scalar(args)
    reports = [r.strip() for r in args.report.split(",") if r.strip()]
    unknown = set(reports) - {"spectrum", "gap", "norm-bound", "gamma"}
    if unknown:
        raise UsageError(f"unknown --report entries: {', '.join(sorted(unknown))}")
    try:
        if args.rep_file:
            rep_obj = _rep_from_file(args.rep_file)
            inputs = {"rep_file": args.rep_file}
        else:
            rep_obj = casimir.builtin_rep(args.algebra, args.n)
            inputs = {"algebra": args.algebra, "n": args.n}
    except (ValueError, casimir.RepresentationError) as exc:
        raise UsageError(str(exc))
    scale = _scale(args)
    tols = {"value": 1e-8 * scale, "norm_ratio": 1e-8 * scale, "gamma": 1e-8 * scale}
    rep = Report("casimir", {**inputs, "report": reports, "samples": args.samples, "seed": args.seed}, tols)
    frame = casimir.killing_orthonormalize(rep_obj)
    basis = casimir.casimir_spectral_basis(frame)
    rep.results["dim_V"] = rep_obj.dim_V
    rep.results["dim_g"] = rep_obj.dim_g
    if "spectrum" in reports:
        rep.results["spectrum"] = _value_multiplicity(basis.eigenvalues)
        rep.header = ["value", "multiplicity"]
        rep.rows = [[e["value"], e["multiplicity"]] for e in rep.results["spectrum"]]
        if rep_obj.algebra_label is not None and rep_obj.highest_weight is not None:
            cmp = casimir.compare_with_prediction(rep_obj, basis)
            rep.results["prediction"] = {"matches": cmp["multiplicities_match"],
                                         "max_value_deviation": cmp["max_value_deviation"]}
            rep.passed &= cmp["multiplicities_match"] and cmp["max_value_deviation"] <= tols["value"]
    if "gap" in reports:
        gap = float(basis.eigenvalues[1])
        out = {"gap": gap}
        if rep_obj.algebra_label is not None:
            dec = casimir.gap_and_decay(rep_obj, basis)
            out.update({"g0": dec.g0, "gap_over_g0": gap / float(dec.g0), "A": dec.A_constant,
                        "shells": dec.shells})
            rep.passed &= gap >= float(dec.g0) - tols["value"]
        rep.results["gap"] = out
    if "norm-bound" in reports:
        nb = casimir.check_norm_bound(basis)
        rep.results["norm_bound"] = {"max_ratio": nb.max_ratio,
                                     "max_identity_residual": nb.max_identity_residual}
        rep.passed &= nb.max_ratio <= 1 + tols["norm_ratio"] and nb.max_identity_residual <= tols["norm_ratio"]
    if "gamma" in reports:
        rng = np.random.default_rng(args.seed)
        margin = casimir.gamma_calculus_check(frame, args.samples, rng)
        tensor = casimir.tensor_identity_residual(frame)
        rep.results["gamma"] = {"min_margin": margin, "tensor_identity_residual": tensor}
        rep.passed &= margin >= -tols["gamma"] and tensor <= tols["gamma"]
    return rep


def _casimir_scalar(args) -> Report:
    if args.mu is None:
        raise UsageError("--type needs --mu")
    try:
        datum = rootsys.build_root_datum(args.type_label)
        mu = rootsys.WeightVec(tuple(args.mu))
        if len(mu.coords) != datum.rank:
            raise ValueError(f"--mu needs {datum.rank} coordinates for {datum.name}")
        c = rootsys.casimir_scalar(datum, mu)
    except ValueError as exc:
        raise UsageError(str(exc))
    rep = Report("casimir", {"type": datum.name, "mu": list(args.mu)})
    rep.results = {"casimir_scalar": c, "numerator": rootsys.casimir_numerator(datum, mu),
                   "dimension": rootsys.weyl_dimension(datum, mu),
                   "in_root_lattice": datum.in_root_lattice(mu)}
    rep.header = list(rep.results)
    rep.rows = [[str(v) for v in rep.results.values()]]
    return rep


def _rep_from_file(path: str) -> casimir.MatrixLieRep:
    data = _load_json(path)
    if not isinstance(data, dict) or "matrices" not in data:
        raise UsageError(f"{path}: expected an object with a 'matrices' list")
    mats = [serialize.operator_from_json(m) for m in data["matrices"]]
    datum = rootsys.build_root_datum(data["type"]) if data.get("type") else None
    hw = data.get("highest_weight")
    hw = rootsys.WeightVec(tuple(int(x) for x in hw)) if hw is not None else None
    if hw is not None and datum is None:
        raise UsageError(f"{path}: 'highest_weight' needs 'type'")
    return casimir.make_rep(mats, datum, hw, name=os.path.basename(path))


def cmd_verify(args) -> Report:
    suite = checks.SUITES[args.suite]
    scale = _scale(args)
    seeds = _child_seeds(args.seed, len(suite))
    timings: list[float] = [0.0] * len(suite)

    def run(k: int):
        name, fn, kw = suite[k]
        t0 = time.perf_counter()
        try:
            res = fn(seed=seeds[k], scale=scale, **kw)
        except Exception as exc:  # a crashing check is a failed check
            res = checks.CheckResult(name, math.inf, 0.0, False, f"{type(exc).__name__}: {exc}")
        timings[k] = time.perf_counter() - t0
        return res

    with ThreadPoolExecutor(max_workers=_workers(len(suite))) as pool:
        results = list(pool.map(run, range(len(suite))))
    rep = Report("verify", {"suite": args.suite, "seed": args.seed},
                 {r.name: r.tolerance for r in results})
    rep.results = {"checks": [_finite(r.as_dict()) for r in results]}
    rep.passed = all(r.passed for r in results)
    rep.header = ["name", "passed", "value", "tolerance", "detail"]
    rep.rows = [[r.name, r.passed, _finite(r.value), r.tolerance, r.detail] for r in results]
    if args.timing:
        rep.results["timing"] = {r.name: t for r, t in zip(results, timings)}
    return rep


def _finite(x):
    if isinstance(x, dict):
        return {k: _finite(v) for k, v in x.items()}
    if isinstance(x, float) and not math.isfinite(x):
        return None
    return x


def cmd_decay_curve(args) -> Report:
    if args.samples < 1:
        raise UsageError("--samples must be positive")
    rng = np.random.default_rng(args.seed)
    scale = _scale(args)
    rep = Report("decay-curve", {"system": args.system, "times": list(args.times), "samples": args.samples,
                                 "seed": args.seed}, {"row_excess": 1e-9 * scale})
    if args.system == "fermion":
        args.N = args.N or 2
        sys_ = _fermion_system(args.N, args.beta, args.omegas)
        rep.inputs.update({"N": args.N, "beta": args.beta, "omegas": list(sys_.omegas)})
        spec, sigma = fermion.build_fermi_generator(sys_), sys_.gibbs_state()
        basis = fermion.fermi_spectral_basis(sys_)
        bound = lambda t: ergodicity_bound_uniform(basis, t)
        states = [random_state(sys_.dim, rng) for _ in range(args.samples)]
    elif args.system == "casimir":
        if args.n < 2:
            raise UsageError("--n must be at least 2")
        rep.inputs.update({"algebra": "sl2", "n": args.n})
        frame = casimir.killing_orthonormalize(casimir.sl2_rep(args.n))
        spec, sigma = frame.spec(), casimir.trace_state(args.n)
        basis = casimir.casimir_spectral_basis(frame)
        bound = lambda t: ergodicity_bound_uniform(basis, t)
        states = [random_state(args.n, rng) for _ in range(args.samples)]
    else:
        spec, sigma, bound, states = _boson_curve_setup(args, rng, rep)
    rep.header = ["t", "bound", "sampled_sup_dtr"]
    for t in args.times:
        b = min(1.0, math.sqrt(max(bound(t), 0.0)))
        s = float(np.max(sampled_trace_distances(spec, sigma, states, t)))
        rep.rows.append([float(t), b, s])
        rep.passed &= s <= b + rep.tolerances["row_excess"]
    rep.results = {"rows": [dict(zip(rep.header, r)) for r in rep.rows]}
    if rep.comments:
        rep.results["caveat"] = " ".join(rep.comments)
    return rep


def _boson_curve_setup(args, rng, rep: Report):
    args.N = args.N or 1
    omegas = args.omegas or (1.0,) * args.N
    if len(omegas) != args.N:
        raise UsageError(f"--omegas needs {args.N} values")
    if args.cutoff < 4 or (args.cutoff + 1) ** args.N > MAX_BOSON_DIM:
        raise UsageError(f"--cutoff must be at least 4 with (cutoff+1)^N <= {MAX_BOSON_DIM}")
    sys_ = boson.BosonSystem(args.beta, tuple(omegas))
    fock = boson.TruncatedFock(args.N, args.cutoff)
    rep.inputs.update({"N": args.N, "beta": args.beta, "omegas": list(omegas), "cutoff": args.cutoff,
                       "K": args.K})
    rep.comments = [f"truncation caveat: dense evolution on occupations <= {args.cutoff} per mode;",
                    "the bound is proved for the untruncated semigroup on states in the K-moment class;",
                    f"samples are supported on occupations <= 3 and filtered for the class with K={args.K}"]
    low = [k for k, occ in enumerate(fock.occupations()) if max(occ) <= 3]
    states = []
    tries = 0
    while len(states) < args.samples:
        tries += 1
        if tries > 50 * args.samples:
            raise UsageError(f"K={args.K} admits too few sampled states; raise --K")
        small = random_state(len(low), rng).op
        op = np.zeros((fock.dim, fock.dim), dtype=complex)
        op[np.ix_(low, low)] = small
        rho = DensityState.from_matrix(op)
        if boson.moment_class_check(rho, fock, args.K, 3 * args.N):
            states.append(rho)
    return (boson.truncated_generator_spec(sys_, args.cutoff), boson.truncated_thermal_state(sys_, args.cutoff),
            lambda t: boson.bose_bound(sys_, args.K, t), states)


COMMANDS = {
    "divergence": cmd_divergence,
    "lindblad-spectrum": cmd_lindblad_spectrum,
    "fermion": cmd_fermion,
    "boson": cmd_boson,
    "g0-table": cmd_g0_table,
    "casimir": cmd_casimir,
    "verify": cmd_verify,
    "decay-curve": cmd_decay_curve,
}


# --- output ---------------------------------------------------------------------

def render(rep: Report, fmt: str) -> str:
    if fmt == "json":
        return serialize.dumps(rep.as_dict())
    if rep.header is None:
        raise UsageError(f"command {rep.command} has no tabular output; use --format json")
    if fmt == "csv":
        return serialize.rows_to_csv(rep.header, rep.rows, rep.comments)
    rows = [[serialize.format_float(v) if isinstance(v, float) else v for v in r] for r in rep.rows]
    return "".join(f"> {c}\n" for c in rep.comments) + serialize.rows_to_markdown(rep.header, rows)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse: 0 for --help/--version, 2 otherwise
        return int(exc.code or 0)
    fmt = args.format or DEFAULT_FORMAT.get(args.command, "json")
    if args.command == "boson" and args.check_eigen and args.format is None:
        fmt = "csv"
    t0 = time.perf_counter()
    try:
        rep = COMMANDS[args.command](args)
        if args.timing:
            rep.results.setdefault("timing", {})
            if isinstance(rep.results["timing"], dict):
                rep.results["timing"]["total_seconds"] = time.perf_counter() - t0
        text = render(rep, fmt)
    except UsageError as exc:
        print(f"lindblad-lab {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if not rep.passed:
        print(f"lindblad-lab {args.command}: numerical check failed", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
