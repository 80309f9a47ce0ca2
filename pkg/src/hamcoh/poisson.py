"""Exact arithmetic in the graded Lie algebra of formal Hamiltonian vector fields.

Elements are polynomials in 2n Darboux generators p_1..p_n, q_1..q_n with
rational coefficients, taken modulo constants.  The bracket is the Poisson
bracket {f,g} = sum_i (df/dp_i dg/dq_i - df/dq_i dg/dp_i); any constant it
produces is projected away, so no element ever stores a degree-0 term.
Working with polynomials rather than power series loses nothing here: every
weight-homogeneous component is a finite-dimensional polynomial space.

A monomial of total degree d is homogeneous of weight d - 2 (linear terms
weigh -1, quadratic terms weigh 0), and the bracket adds weights.  The
quadratic monomials span a copy of sp(2n).

Monomials are ordered by (total degree ascending, exponent tuple reverse
lexicographic), e.g. for n=1: p, q, p^2, pq, q^2, p^3, ...  Global generator
ids concatenate the weight blocks in increasing weight, so an id determines
the weight block and the position inside it.  Downstream matrix indices
depend on this order; ORDER_VERSION names it for cache validation.
"""

from __future__ import annotations

import itertools
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb

ORDER_VERSION = "degrevlex-v1"


@dataclass(frozen=True)
class AlgebraSpec:
    """Which algebra: n pairs of Darboux generators, 2n variables in total."""

    n: int

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")

    @property
    def num_vars(self) -> int:
        return 2 * self.n


@dataclass(frozen=True)
class Monomial:
    """A single monomial, stored as the exponent tuple (p_1..p_n, q_1..q_n)."""

    exponents: tuple[int, ...]

    def __post_init__(self) -> None:
        if not self.exponents or len(self.exponents) % 2 != 0:
            raise ValueError("exponent tuple must have positive even length")
        if any(e < 0 for e in self.exponents):
            raise ValueError(f"negative exponent in {self.exponents}")
        if sum(self.exponents) == 0:
            raise ValueError("constant monomial is not an algebra element")

    @property
    def degree(self) -> int:
        return sum(self.exponents)

    @property
    def weight(self) -> int:
        return self.degree - 2

    @property
    def bidegree(self) -> tuple[int, int]:
        """(total p-degree - 1, total q-degree - 1); the two add up to the weight."""
        half = len(self.exponents) // 2
        return (sum(self.exponents[:half]) - 1, sum(self.exponents[half:]) - 1)

    def sort_key(self) -> tuple:
        return (self.degree, tuple(-e for e in self.exponents))

    def __repr__(self) -> str:
        half = len(self.exponents) // 2
        parts = []
        for i, e in enumerate(self.exponents):
            if e == 0:
                continue
            name = f"p{i + 1}" if i < half else f"q{i - half + 1}"
            parts.append(name if e == 1 else f"{name}^{e}")
        return "*".join(parts)


@dataclass
class PoissonElement:
    """A finite rational linear combination of monomials.

    terms maps Monomial -> nonzero Fraction.  The zero element is the empty
    dict.  Constructors reject explicit zero coefficients and constant
    monomials so the representation stays canonical and equality is dict
    equality.
    """

    terms: dict[Monomial, Fraction] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for m, c in self.terms.items():
            if c == 0:
                raise ValueError(f"zero coefficient stored for {m}")

    @classmethod
    def zero(cls) -> PoissonElement:
        return cls({})

    @classmethod
    def monomial(cls, m: Monomial, coeff: Fraction | int = 1) -> PoissonElement:
        c = Fraction(coeff)
        return cls({m: c}) if c else cls({})

    def is_zero(self) -> bool:
        return not self.terms

    def add(self, other: PoissonElement) -> PoissonElement:
        out = dict(self.terms)
        for m, c in other.terms.items():
            s = out.get(m, Fraction(0)) + c
            if s:
                out[m] = s
            else:
                out.pop(m, None)
        return PoissonElement(out)

    def scale(self, c: Fraction | int) -> PoissonElement:
        c = Fraction(c)
        if not c:
            return PoissonElement.zero()
        return PoissonElement({m: v * c for m, v in self.terms.items()})

    def __eq__(self, other: object) -> bool:
        return isinstance(other, PoissonElement) and self.terms == other.terms


def poisson_bracket(f: PoissonElement, g: PoissonElement, spec: AlgebraSpec) -> PoissonElement:
    """{f, g} with degree-0 output terms projected away.

    Bilinear over monomial pairs; for monomials x, y and each index i the
    contribution is dx/dp_i * dy/dq_i - dx/dq_i * dy/dp_i, with the product
    of the remaining exponents merged additively.
    """
    n = spec.n
    acc: dict[Monomial, Fraction] = {}

    def put(exps: tuple[int, ...], coeff: Fraction) -> None:
        if not coeff or sum(exps) == 0:
            return
        m = Monomial(exps)
        s = acc.get(m, Fraction(0)) + coeff
        if s:
            acc[m] = s
        else:
            acc.pop(m, None)

    for mx, cx in f.terms.items():
        ex = mx.exponents
        for my, cy in g.terms.items():
            ey = my.exponents
            c = cx * cy
            for i in range(n):
                pi, qi = i, n + i
                # d/dp_i (x) * d/dq_i (y)
                if ex[pi] and ey[qi]:
                    exps = list(ex)
                    exps[pi] -= 1
                    eyps = list(ey)
                    eyps[qi] -= 1
                    merged = tuple(a + b for a, b in zip(exps, eyps))
                    put(merged, c * ex[pi] * ey[qi])
                # - d/dq_i (x) * d/dp_i (y)
                if ex[qi] and ey[pi]:
                    exps = list(ex)
                    exps[qi] -= 1
                    eyps = list(ey)
                    eyps[pi] -= 1
                    merged = tuple(a + b for a, b in zip(exps, eyps))
                    put(merged, -c * ex[qi] * ey[pi])
    return PoissonElement(acc)


def enumerate_monomials(spec: AlgebraSpec, weight: int) -> list[Monomial]:
    """All monomials of the given weight, in canonical order.

    Weight w corresponds to total degree w + 2; weights below -1 are empty
    by construction and rejected to catch sign mistakes in callers.
    """
    if weight < -1:
        raise ValueError(f"no monomials of weight {weight}; weights start at -1")
    degree = weight + 2
    k = spec.num_vars
    out = []
    for cuts in itertools.combinations(range(degree + k - 1), k - 1):
        prev = -1
        exps = []
        for c in cuts:
            exps.append(c - prev - 1)
            prev = c
        exps.append(degree + k - 2 - prev)
        out.append(Monomial(tuple(exps)))
    out.sort(key=Monomial.sort_key)
    assert len(out) == comb(degree + k - 1, k - 1)
    return out


def sp_basis(spec: AlgebraSpec) -> list[Monomial]:
    """The quadratic monomials: a basis of the symplectic subalgebra sp(2n)."""
    return enumerate_monomials(spec, 0)


class GeneratorTable:
    """Lazy global indexing of monomials by weight block.

    Ids are assigned per weight block: block -1 gets [0, 2n), block 0 the
    next n(2n+1) ids, and so on.  Offsets are closed-form, so an id never
    depends on how many blocks have been materialized.  Thread-safe; blocks
    are built at most once.
    """

    def __init__(self, spec: AlgebraSpec):
        self.spec = spec
        self._blocks: dict[int, list[Monomial]] = {}
        self._ids: dict[Monomial, int] = {}
        self._lock = threading.Lock()

    def block_size(self, weight: int) -> int:
        if weight < -1:
            return 0
        k = self.spec.num_vars
        return comb(weight + 2 + k - 1, k - 1)

    def block_offset(self, weight: int) -> int:
        return sum(self.block_size(w) for w in range(-1, weight))

    def block(self, weight: int) -> list[Monomial]:
        with self._lock:
            got = self._blocks.get(weight)
            if got is None:
                got = enumerate_monomials(self.spec, weight)
                self._blocks[weight] = got
                base = self.block_offset(weight)
                for i, m in enumerate(got):
                    self._ids[m] = base + i
            return got

    def id_range(self, weight: int) -> tuple[int, int]:
        base = self.block_offset(weight)
        return base, base + self.block_size(weight)

    def id_of(self, m: Monomial) -> int:
        self.block(m.weight)
        return self._ids[m]

    def monomial(self, gen_id: int) -> Monomial:
        w = self.weight_of_id(gen_id)
        block = self.block(w)
        return block[gen_id - self.block_offset(w)]

    def weight_of_id(self, gen_id: int) -> int:
        if gen_id < 0:
            raise ValueError(f"negative generator id {gen_id}")
        w = -1
        base = 0
        while True:
            size = self.block_size(w)
            if gen_id < base + size:
                return w
            base += size
            w += 1
