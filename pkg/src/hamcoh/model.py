"""Closed-form Gelfand-Kalinin-Fuchs model for the non-positive-weight cohomology.

The model is the free graded-commutative algebra on

    gamma          degree 2,      weight -2, even
    psi_i          degree 4i,     weight  0, even   (i = 1..n)
    h_i            degree 4i-1,   weight  0, odd    (i = 1..n)

modulo the ideal spanned by the monomials gamma^g psi_1^{k_1}..psi_n^{k_n}
with g + k_1 + 2 k_2 + ... + n k_n > n, carrying the differential d(h_i) =
psi_i, d(gamma) = d(psi_i) = 0 extended as an odd derivation.  Its
cohomology is the theorem-side prediction that the direct Chevalley-
Eilenberg computation is checked against.

On gamma's placement: the classical statement is often transcribed with
gamma in degree 2n-1 and a single exterior power.  That cannot be right as
stated: the ideal explicitly allows gamma^g up to g = n, which forces gamma
even, and the direct computation puts the unique weight -2 class in degree
2 for every n — it is the symplectic form viewed as a 2-cochain, whose
powers die exactly beyond the n-th, matching the ideal bound.  This module
therefore places gamma at degree 2 with exponents 0..n; the discrepancy
against the transcribed placement is reported by the verification suite,
not hidden.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .engine import BettiTable, _certified_ranks, _check_d_squared, _rows_from_ranks
from .linalg import DEFAULT_EXACT_THRESHOLD, DEFAULT_PRIMES, SparseExactMatrix
from .poisson import AlgebraSpec

GAMMA_DEGREE = 2
GAMMA_WEIGHT = -2


@dataclass(frozen=True)
class ModelGenerator:
    kind: str  # "gamma" | "psi" | "h"
    index: int  # 0 for gamma, 1..n otherwise
    degree: int
    weight: int
    parity: int

    def __post_init__(self) -> None:
        if self.parity != self.degree % 2:
            raise ValueError("parity must match degree mod 2")


def model_generators(n: int) -> list[ModelGenerator]:
    if n < 1:
        raise ValueError("n must be >= 1")
    gens = [ModelGenerator("gamma", 0, GAMMA_DEGREE, GAMMA_WEIGHT, 0)]
    for i in range(1, n + 1):
        gens.append(ModelGenerator("psi", i, 4 * i, 0, 0))
        gens.append(ModelGenerator("h", i, 4 * i - 1, 0, 1))
    return gens


@dataclass(frozen=True)
class ModelMonomial:
    """gamma^gamma_exp * prod psi_i^{k_i} * prod h_i^{l_i} in the quotient."""

    gamma_exp: int
    psi_exps: tuple[int, ...]
    h_flags: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.gamma_exp < 0 or any(k < 0 for k in self.psi_exps):
            raise ValueError("negative exponent")
        if any(f not in (0, 1) for f in self.h_flags):
            raise ValueError("h generators are odd; flags must be 0 or 1")
        if len(self.psi_exps) != len(self.h_flags):
            raise ValueError("psi/h length mismatch")

    @property
    def n(self) -> int:
        return len(self.psi_exps)

    @property
    def ideal_load(self) -> int:
        return self.gamma_exp + sum((i + 1) * k for i, k in enumerate(self.psi_exps))

    def in_quotient(self) -> bool:
        return self.ideal_load <= self.n

    @property
    def degree(self) -> int:
        return (GAMMA_DEGREE * self.gamma_exp
                + sum(4 * (i + 1) * k for i, k in enumerate(self.psi_exps))
                + sum((4 * (i + 1) - 1) * f for i, f in enumerate(self.h_flags)))

    @property
    def weight(self) -> int:
        return GAMMA_WEIGHT * self.gamma_exp

    @property
    def parity(self) -> int:
        return sum(self.h_flags) % 2

    def sort_key(self) -> tuple:
        return (self.degree, self.weight, self.gamma_exp, self.psi_exps, self.h_flags)

    def __repr__(self) -> str:
        parts = []
        if self.gamma_exp:
            parts.append("G" if self.gamma_exp == 1 else f"G^{self.gamma_exp}")
        for i, k in enumerate(self.psi_exps):
            if k:
                parts.append(f"P{i + 1}" if k == 1 else f"P{i + 1}^{k}")
        for i, f in enumerate(self.h_flags):
            if f:
                parts.append(f"h{i + 1}")
        return "*".join(parts) if parts else "1"


def model_max_degree(n: int, weight: int = 0) -> int:
    """Largest degree of a nonzero model monomial of the given weight."""
    return 2 * n * n + 5 * n + weight


def _psi_tuples(n: int, load_cap: int) -> list[tuple[int, ...]]:
    out: list[tuple[int, ...]] = []

    def rec(i: int, remaining: int, acc: list[int]) -> None:
        if i == n:
            out.append(tuple(acc))
            return
        step = i + 1
        for k in range(remaining // step + 1):
            acc.append(k)
            rec(i + 1, remaining - step * k, acc)
            acc.pop()

    rec(0, load_cap, [])
    return out


def model_basis(n: int, degree_max: int, weight: int | None = None) -> list[ModelMonomial]:
    """All nonzero model monomials of degree <= degree_max, ordered by
    (degree, weight, lex); optionally restricted to one weight."""
    if n < 1:
        raise ValueError("n must be >= 1")
    out = []
    for g in range(n + 1):
        if weight is not None and GAMMA_WEIGHT * g != weight:
            continue
        for psi in _psi_tuples(n, n - g):
            for flags in itertools.product((0, 1), repeat=n):
                m = ModelMonomial(g, psi, flags)
                if m.degree <= degree_max:
                    out.append(m)
    out.sort(key=ModelMonomial.sort_key)
    return out


def _differential_terms(m: ModelMonomial) -> list[tuple[ModelMonomial, int]]:
    """d(m) as (monomial, coefficient) pairs, ideal members dropped.

    d passes only the odd factors h_j; with h's written in ascending order
    the sign at h_j is (-1)^(number of set flags before j), and the freed
    psi_j commutes to its slot without further sign.
    """
    terms = []
    seen_odd = 0
    for j, flag in enumerate(m.h_flags):
        if not flag:
            continue
        sign = -1 if seen_odd % 2 else 1
        seen_odd += 1
        psi = list(m.psi_exps)
        psi[j] += 1
        flags = list(m.h_flags)
        flags[j] = 0
        new = ModelMonomial(m.gamma_exp, tuple(psi), tuple(flags))
        if new.in_quotient():
            terms.append((new, sign))
    return terms


def model_differential(n: int, degree_max: int,
                       weight: int | None = None) -> dict[int, SparseExactMatrix]:
    """Per-degree matrices of d on the model basis, degrees 0..degree_max."""
    basis = model_basis(n, degree_max + 1, weight)
    by_degree: dict[int, list[ModelMonomial]] = {}
    for m in basis:
        by_degree.setdefault(m.degree, []).append(m)
    index = {d: {m: i for i, m in enumerate(ms)} for d, ms in by_degree.items()}
    mats: dict[int, SparseExactMatrix] = {}
    for d in range(degree_max + 1):
        dom = by_degree.get(d, [])
        cod = by_degree.get(d + 1, [])
        cod_index = index.get(d + 1, {})
        entries: dict[tuple[int, int], int] = {}
        for col, m in enumerate(dom):
            for new, sign in _differential_terms(m):
                row = cod_index.get(new)
                assert row is not None, f"model basis missing {new!r}"
                entries[(row, col)] = entries.get((row, col), 0) + sign
        entries = {k: v for k, v in entries.items() if v}
        mats[d] = SparseExactMatrix(len(cod), len(dom), entries)
    return mats


def predicted_betti(n: int, weight: int, degree_max: int, reduced: bool = True,
                    primes: tuple[int, ...] = DEFAULT_PRIMES,
                    exact_threshold: int = DEFAULT_EXACT_THRESHOLD) -> BettiTable:
    """Model-side Betti table for one non-positive weight.

    Runs the same certified-rank pipeline as the direct computation, just on
    the (tiny) model matrices, so the two sides are compared like for like.
    """
    if weight > 0:
        raise ValueError("model covers non-positive weight only")
    basis = model_basis(n, degree_max + 1, weight)
    dims: dict[int, int] = {}
    for m in basis:
        dims[m.degree] = dims.get(m.degree, 0) + 1
    mats = model_differential(n, degree_max, weight)
    _check_d_squared(mats, "exact", primes)
    certs = _certified_ranks(mats, primes, exact_threshold, threads=1)
    full_dims = {d: dims.get(d, 0) for d in range(degree_max + 1)}
    if reduced and weight == 0:
        full_dims[0] = 0
    rows = _rows_from_ranks(full_dims, certs, degree_max)
    out = BettiTable(AlgebraSpec(n), weight, reduced, rows, mode="model",
                     complete=degree_max >= model_max_degree(n, weight))
    out.validate()
    return out


def anomaly_target(n: int, m: int) -> tuple[int, int]:
    """(degree, weight) of the sector housing the degree-(4n+m+1) obstruction."""
    if n < 1 or m < 0:
        raise ValueError("need n >= 1 and m >= 0")
    return (4 * n + m + 1, 0)
