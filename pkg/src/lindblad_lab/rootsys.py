"""Exact root-system data for the simple Lie algebras.

Conventions: the Cartan matrix is A_ij = 2(a_i|a_j)/(a_i|a_i), the simple
root a_j has fundamental-weight coordinates A[:, j], and the invariant form
is fixed by a symmetrizer d with (a_i|a_j) = d_i A_ij.  The Gram matrix of
fundamental weights is then S = diag(d) A^{-1}.  All arithmetic is in
``fractions.Fraction``.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable

import sympy

TYPES = ("A", "B", "C", "D", "E", "F", "G")
MIN_RANK = {"A": 1, "B": 2, "C": 3, "D": 4}
EXCEPTIONAL_RANKS = {"E": (6, 7, 8), "F": (4,), "G": (2,)}
MAX_RANK = 12

MULTIPLICITY_MAX_RANK = 4
MULTIPLICITY_MAX_DIM = 2000


class RankError(ValueError):
    """Rank outside the supported range for the given type."""


class GuardError(ValueError):
    """Tensor/character computation exceeds the tractability guard."""


@dataclass(frozen=True, order=True)
class WeightVec:
    """Integer coordinates over the fundamental weights."""

    coords: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(int(c) for c in self.coords))

    @classmethod
    def of(cls, coords: Iterable[int]) -> "WeightVec":
        return cls(tuple(coords))

    @property
    def is_dominant(self) -> bool:
        return all(c >= 0 for c in self.coords)

    def __add__(self, other: "WeightVec") -> "WeightVec":
        return WeightVec(tuple(a + b for a, b in zip(self.coords, other.coords)))

    def __sub__(self, other: "WeightVec") -> "WeightVec":
        return WeightVec(tuple(a - b for a, b in zip(self.coords, other.coords)))

    def __neg__(self) -> "WeightVec":
        return WeightVec(tuple(-a for a in self.coords))

    def __str__(self) -> str:
        return ",".join(str(c) for c in self.coords)


def _chain(r: int) -> list[list[int]]:
    a = [[0] * r for _ in range(r)]
    for i in range(r):
        a[i][i] = 2
        if i + 1 < r:
            a[i][i + 1] = a[i + 1][i] = -1
    return a


def _cartan_and_symmetrizer(kind: str, r: int) -> tuple[list[list[int]], list[Fraction]]:
    one, half = Fraction(1), Fraction(1, 2)
    if kind == "A":
        return _chain(r), [one] * r
    if kind == "B":
        a = _chain(r)
        a[r - 1][r - 2] = -2
        return a, [one] * (r - 1) + [half]
    if kind == "C":
        a = _chain(r)
        a[r - 2][r - 1] = -2
        return a, [half] * (r - 1) + [one]
    if kind == "D":
        a = _chain(r)
        a[r - 2][r - 1] = a[r - 1][r - 2] = 0
        a[r - 3][r - 1] = a[r - 1][r - 3] = -1
        return a, [one] * r
    if kind == "E":
        # chain 1..r-1, extra node r attached to node r-3
        a = _chain(r - 1)
        a = [row + [0] for row in a] + [[0] * (r - 1) + [2]]
        a[r - 4][r - 1] = a[r - 1][r - 4] = -1
        return a, [one] * r
    if kind == "F":
        a = _chain(4)
        a[2][1] = -2
        return a, [one, one, half, half]
    if kind == "G":
        return [[2, -1], [-3, 2]], [one, Fraction(1, 3)]
    raise ValueError(f"unknown type {kind!r}")


def _label(kind: str, r: int) -> str:
    return f"{kind}{r}"


def parse_type(label: str) -> tuple[str, int]:
    """'E6' -> ('E', 6); 'B3' -> ('B', 3)."""
    label = label.strip().upper()
    if len(label) < 2 or label[0] not in TYPES or not label[1:].isdigit():
        raise ValueError(f"cannot parse Lie type {label!r}")
    return label[0], int(label[1:])


def _check_rank(kind: str, r: int) -> None:
    if kind in EXCEPTIONAL_RANKS:
        if r not in EXCEPTIONAL_RANKS[kind]:
            raise RankError(f"type {kind} exists only in ranks {EXCEPTIONAL_RANKS[kind]}")
    elif kind in MIN_RANK:
        if not MIN_RANK[kind] <= r <= MAX_RANK:
            raise RankError(f"type {kind} requires rank in {MIN_RANK[kind]}..{MAX_RANK}, got {r}")
    else:
        raise ValueError(f"unknown type {kind!r}")


def _rational_inverse(a: list[list[int]]) -> tuple[tuple[Fraction, ...], ...]:
    inv = sympy.Matrix(a).inv()
    return tuple(tuple(Fraction(int(x.p), int(x.q)) for x in inv.row(i)) for i in range(len(a)))


@dataclass(frozen=True)
class RootDatum:
    type_label: str
    rank: int
    cartan: tuple[tuple[int, ...], ...]
    symmetrizer: tuple[Fraction, ...]
    cartan_inverse: tuple[tuple[Fraction, ...], ...] = field(repr=False)
    weight_gram: tuple[tuple[Fraction, ...], ...] = field(repr=False)
    two_delta_coeffs: tuple[Fraction, ...] = field(repr=False)
    theta: WeightVec = field(repr=False)

    @property
    def name(self) -> str:
        return _label(self.type_label, self.rank)

    @property
    def simply_laced(self) -> bool:
        return all(d == 1 for d in self.symmetrizer)

    # --- coordinates -------------------------------------------------------
    def root_coords(self, mu: WeightVec) -> tuple[Fraction, ...]:
        """Coefficients over the simple roots, A^{-1} n."""
        return tuple(sum((row[j] * mu.coords[j] for j in range(self.rank)), Fraction(0))
                     for row in self.cartan_inverse)

    def weight_of_root(self, c: Iterable[int]) -> WeightVec:
        c = tuple(c)
        return WeightVec(tuple(sum(self.cartan[i][j] * c[j] for j in range(self.rank))
                               for i in range(self.rank)))

    def simple_root(self, i: int) -> WeightVec:
        return WeightVec(tuple(self.cartan[k][i] for k in range(self.rank)))

    def in_root_lattice(self, mu: WeightVec) -> bool:
        return all(x.denominator == 1 for x in self.root_coords(mu))

    def inner(self, mu: WeightVec, nu: WeightVec) -> Fraction:
        """(mu|nu) via the weight Gram matrix."""
        S = self.weight_gram
        return sum((S[i][j] * mu.coords[i] * nu.coords[j]
                    for i in range(self.rank) for j in range(self.rank)
                    if mu.coords[i] and nu.coords[j]), Fraction(0))

    def pair_root(self, mu: WeightVec, c: tuple[int, ...]) -> Fraction:
        """(mu|alpha) for a root alpha with simple-root coordinates c."""
        return sum((Fraction(mu.coords[k] * c[k]) * self.symmetrizer[k] for k in range(self.rank)),
                   Fraction(0))

    @property
    def rho(self) -> WeightVec:
        return WeightVec((1,) * self.rank)

    @cached_property
    def positive_roots(self) -> tuple[tuple[int, ...], ...]:
        """Positive roots in simple-root coordinates, by closure under simple reflections."""
        r = self.rank
        simple = [tuple(int(i == j) for j in range(r)) for i in range(r)]
        seen = set(simple)
        queue = deque(simple)
        while queue:
            beta = queue.popleft()
            n = self.weight_of_root(beta).coords
            for i in range(r):
                image = tuple(beta[k] - (n[i] if k == i else 0) for k in range(r))
                if all(x >= 0 for x in image) and any(image) and image not in seen:
                    seen.add(image)
                    queue.append(image)
        return tuple(sorted(seen, key=lambda c: (sum(c), c)))

    @cached_property
    def _scaled_gram(self) -> tuple[int, tuple[tuple[int, ...], ...]]:
        den = math.lcm(*(x.denominator for row in self.weight_gram for x in row))
        return den, tuple(tuple(int(x * den) for x in row) for row in self.weight_gram)

    def inner_scaled(self, mu: tuple[int, ...], nu: tuple[int, ...]) -> int:
        """den * (mu|nu) as an integer; den from the weight Gram denominators."""
        _, S = self._scaled_gram
        r = self.rank
        return sum(S[i][j] * mu[i] * nu[j] for i in range(r) if mu[i] for j in range(r) if nu[j])


def build_root_datum(type_label: str, rank: int | None = None) -> RootDatum:
    """Root datum for a simple type; accepts ('B', 3) or the compact label 'B3'."""
    if rank is None:
        kind, rank = parse_type(type_label)
    else:
        kind = type_label.strip().upper()[:1]
    _check_rank(kind, rank)
    a, d = _cartan_and_symmetrizer(kind, rank)
    inv = _rational_inverse(a)
    S = tuple(tuple(d[i] * inv[i][j] for j in range(rank)) for i in range(rank))
    two_delta = tuple(2 * sum(row, Fraction(0)) for row in S)
    datum = RootDatum(kind, rank, tuple(tuple(row) for row in a), tuple(d), inv, S,
                      two_delta, WeightVec((0,) * rank))
    roots = datum.positive_roots
    top = max(roots, key=sum)
    object.__setattr__(datum, "theta", datum.weight_of_root(top))
    return datum


def all_supported(max_classical_rank: int = 8) -> list[RootDatum]:
    out = []
    for kind in ("A", "B", "C", "D"):
        for r in range(MIN_RANK[kind], max_classical_rank + 1):
            out.append(build_root_datum(kind, r))
    for kind, ranks in EXCEPTIONAL_RANKS.items():
        out.extend(build_root_datum(kind, r) for r in ranks)
    return out


def casimir_numerator(datum: RootDatum, mu: WeightVec) -> Fraction:
    """(mu|mu+2 delta)."""
    return datum.inner(mu, mu) + sum((Fraction(n) * t for n, t in zip(mu.coords, datum.two_delta_coeffs)),
                                     Fraction(0))


def casimir_scalar(datum: RootDatum, mu: WeightVec) -> Fraction:
    """c_mu = (mu|mu+2 delta)/(theta|theta+2 delta)."""
    if not mu.is_dominant:
        raise ValueError("casimir_scalar expects a dominant weight")
    return casimir_numerator(datum, mu) / casimir_numerator(datum, datum.theta)


def weyl_dimension(datum: RootDatum, lam: WeightVec) -> int:
    """prod over positive roots of (lam+delta|alpha)/(delta|alpha)."""
    if not lam.is_dominant:
        raise ValueError("weyl_dimension expects a dominant weight")
    shifted = lam + datum.rho
    val = Fraction(1)
    for c in datum.positive_roots:
        val *= datum.pair_root(shifted, c) / datum.pair_root(datum.rho, c)
    if val.denominator != 1:
        raise ArithmeticError(f"non-integral Weyl dimension {val}; root enumeration is inconsistent")
    return int(val)


@dataclass(frozen=True)
class G0Result:
    g0: Fraction
    minimizer: WeightVec
    numerator: Fraction


def _compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def compute_g0(datum: RootDatum) -> G0Result:
    """Minimum of c_mu over nonzero dominant weights in the root lattice.

    Shells sum(n) = s are scanned in order; the scan stops once the linear
    lower bound s * min_j (w_j|2 delta) exceeds the incumbent, which is exact
    because S and the 2-delta coefficients are entrywise positive.  Ties
    favour the highest root, then the lexicographically smallest coordinates.
    """
    theta = datum.theta
    best_val = casimir_numerator(datum, theta)
    best = theta
    slope = min(datum.two_delta_coeffs)
    s = 1
    while s * slope <= best_val:
        for coords in _compositions(s, datum.rank):
            mu = WeightVec(coords)
            if not datum.in_root_lattice(mu):
                continue
            val = casimir_numerator(datum, mu)
            if val < best_val or (val == best_val and best != theta and mu.coords < best.coords):
                best_val, best = val, mu
        s += 1
    theta_val = casimir_numerator(datum, theta)
    return G0Result(best_val / theta_val, best, best_val)


# --- characters ------------------------------------------------------------


def _guard(datum: RootDatum, lam: WeightVec) -> int:
    if datum.rank > MULTIPLICITY_MAX_RANK:
        raise GuardError(f"rank {datum.rank} exceeds the guard {MULTIPLICITY_MAX_RANK}")
    dim = weyl_dimension(datum, lam)
    if dim > MULTIPLICITY_MAX_DIM:
        raise GuardError(f"dimension {dim} exceeds the guard {MULTIPLICITY_MAX_DIM}")
    return dim


def weight_multiplicities(datum: RootDatum, lam: WeightVec, guard: bool = True) -> dict[WeightVec, int]:
    """All weights of V_lam with multiplicities, by the Freudenthal recursion.

    Weights are reached from lam by subtracting simple roots level by level;
    every weight other than lam has some mu + a_i among the weights, so the
    search is complete.
    """
    if not lam.is_dominant:
        raise ValueError("highest weight must be dominant")
    if guard:
        _guard(datum, lam)
    r = datum.rank
    roots = [(c, datum.weight_of_root(c).coords) for c in datum.positive_roots]
    simple = [datum.simple_root(i).coords for i in range(r)]
    rho = datum.rho.coords
    lr = tuple(a + b for a, b in zip(lam.coords, rho))
    top = datum.inner_scaled(lr, lr)

    # depth below lam in simple-root coordinates, tracked as integers
    mult: dict[tuple[int, ...], int] = {lam.coords: 1}
    depth: dict[tuple[int, ...], tuple[int, ...]] = {lam.coords: (0,) * r}
    level = [lam.coords]
    while level:
        candidates = {}
        for mu in level:
            for i, a in enumerate(simple):
                nu = tuple(m - s for m, s in zip(mu, a))
                if nu not in mult and nu not in candidates:
                    candidates[nu] = tuple(d + (k == i) for k, d in enumerate(depth[mu]))
        nxt = []
        for mu in sorted(candidates):
            dep = candidates[mu]
            num = 0
            for c, alpha in roots:
                k = 1
                while all(d - k * ci >= 0 for d, ci in zip(dep, c)):
                    nu = tuple(m + k * a for m, a in zip(mu, alpha))
                    m_nu = mult.get(nu, 0)
                    if m_nu:
                        num += m_nu * datum.inner_scaled(nu, alpha)
                    k += 1
            if num == 0:
                continue
            mr = tuple(m + b for m, b in zip(mu, rho))
            den = top - datum.inner_scaled(mr, mr)
            if den <= 0:
                raise ArithmeticError("Freudenthal denominator vanished at a weight with nonzero numerator")
            value = Fraction(2 * num, den)
            if value.denominator != 1:
                raise ArithmeticError(f"non-integral multiplicity {value} at {mu}")
            mult[mu] = int(value)
            depth[mu] = dep
            nxt.append(mu)
        level = nxt
    return {WeightVec(k): v for k, v in mult.items()}


def dual_weight(datum: RootDatum, lam: WeightVec) -> WeightVec:
    """Highest weight of the dual module, minus the lowest weight of V_lam."""
    weights = weight_multiplicities(datum, lam)
    lowest = min(weights, key=lambda w: sum(datum.root_coords(w)))
    return -lowest


def tensor_decompose(datum: RootDatum, lam1: WeightVec, lam2: WeightVec) -> dict[WeightVec, int]:
    """Multiplicities n(mu) of V_mu in V_lam1 (x) V_lam2 by highest-weight character subtraction."""
    _guard(datum, lam1)
    _guard(datum, lam2)
    char: dict[tuple[int, ...], int] = {}
    w1 = weight_multiplicities(datum, lam1)
    w2 = weight_multiplicities(datum, lam2)
    for a, ma in w1.items():
        for b, mb in w2.items():
            key = (a + b).coords
            char[key] = char.get(key, 0) + ma * mb
    top = lam1 + lam2
    out: dict[WeightVec, int] = {}
    cache: dict[WeightVec, dict[WeightVec, int]] = {}
    while True:
        dominant = [k for k, v in char.items() if v and all(c >= 0 for c in k)]
        if not dominant:
            break
        # highest remaining dominant weight: least depth below lam1 + lam2
        mu = WeightVec(min(dominant, key=lambda k: (sum(datum.root_coords(top - WeightVec(k))), k)))
        n = char[mu.coords]
        if n < 0:
            raise ArithmeticError("negative multiplicity in character subtraction")
        out[mu] = n
        if mu not in cache:
            # constituents may exceed the per-factor dimension guard
            cache[mu] = weight_multiplicities(datum, mu, guard=False)
        for w, m in cache[mu].items():
            char[w.coords] = char.get(w.coords, 0) - n * m
    if any(char.values()):
        raise ArithmeticError("character subtraction left a nonzero remainder")
    return dict(sorted(out.items(), key=lambda kv: kv[0].coords))


def check_prv_bound(datum: RootDatum, lam1: WeightVec, lam2: WeightVec) -> bool:
    """n_{lam1,lam2}(mu) <= dim V_mu on the whole support."""
    return all(n <= weyl_dimension(datum, mu) for mu, n in tensor_decompose(datum, lam1, lam2).items())


def predicted_spectrum(datum: RootDatum, lam: WeightVec) -> dict[Fraction, int]:
    """Eigenvalues of minus the Casimir generator on End(V_lam) with total multiplicities."""
    dec = tensor_decompose(datum, lam, dual_weight(datum, lam))
    spec: dict[Fraction, int] = {}
    for mu, n in dec.items():
        c = casimir_scalar(datum, mu)
        spec[c] = spec.get(c, 0) + n * weyl_dimension(datum, mu)
    return dict(sorted(spec.items()))


def g0_table(max_classical_rank: int = 8) -> list[tuple[str, G0Result]]:
    return [(d.name, compute_g0(d)) for d in all_supported(max_classical_rank)]


def expected_g0(kind: str, r: int) -> Fraction:
    """The closed-form table values, for cross-checking."""
    return {
        "A": Fraction(1), "D": Fraction(1), "E": Fraction(1),
        "B": Fraction(r, 2 * r - 1), "C": Fraction(r, r + 1),
        "F": Fraction(2, 3), "G": Fraction(1, 2),
    }[kind]


def fundamental(datum: RootDatum, i: int, times: int = 1) -> WeightVec:
    """times * w_i with 1-based index i."""
    return WeightVec(tuple(times * int(k == i - 1) for k in range(datum.rank)))


def shell(rank: int, total: int):
    """Dominant weights with coordinate sum ``total``."""
    return (WeightVec(c) for c in _compositions(total, rank))


__all__ = [
    "RootDatum", "WeightVec", "G0Result", "RankError", "GuardError",
    "build_root_datum", "parse_type", "all_supported", "casimir_scalar", "casimir_numerator",
    "weyl_dimension", "compute_g0", "weight_multiplicities", "dual_weight", "tensor_decompose",
    "check_prv_bound", "predicted_spectrum", "g0_table", "expected_g0", "fundamental",
    "shell",
]
