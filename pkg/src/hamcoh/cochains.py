"""Wedge bases of the weight-graded exterior complex and its matrices.

Degree-d cochains are spanned by wedges of d distinct dual generators
xi_m, one per monomial m, stored as strictly increasing tuples of global
generator ids.  A wedge pairs nontrivially only with argument tuples whose
total weight equals the sum of its monomials' weights, and that sum is the
sector weight stored on SectorBasis: sector (d, w) is finite-dimensional
because at most 2n factors can weigh -1 and every other factor pushes the
sum up.

The differential of a dual generator is the negated cobracket,

    d xi_m = - sum_{a<b} c^m_{ab}  xi_a ^ xi_b,   [e_a, e_b] = sum_m c^m_{ab} e_m,

extended to wedges as an odd derivation; the sign of each term is the slot
sign (-1)^t times the parity of sorting the replaced factor pair into place.
The coadjoint action of a quadratic monomial h replaces single factors,

    L_h xi_m = - sum_{m'} (coefficient of e_m in [h, e_{m'}])  xi_{m'},

extended as an even derivation.  It preserves every sector, commutes with d,
and its joint kernel over sp(2n) cuts out the relative (horizontal
invariant) subcomplex.
"""

from __future__ import annotations

import itertools
import threading
from bisect import bisect_left
from dataclasses import dataclass, field
from fractions import Fraction

from .poisson import AlgebraSpec, GeneratorTable, Monomial, PoissonElement, poisson_bracket, sp_basis
from .linalg import SparseExactMatrix, kernel_basis_exact

Wedge = tuple[int, ...]


@dataclass(frozen=True)
class DualGenerator:
    """A dual basis element xi_m, identified by the global id of m.

    dual_weight is the weight of arguments xi_m pairs with, i.e. the
    negative of m's weight; it is +1 exactly for the linear monomials and
    never larger.
    """

    monomial_id: int
    dual_weight: int

    def __post_init__(self) -> None:
        if self.dual_weight > 1:
            raise ValueError(f"dual weight {self.dual_weight} > 1 is impossible")


def dual_generator(table: GeneratorTable, gen_id: int) -> DualGenerator:
    return DualGenerator(gen_id, -table.monomial(gen_id).weight)


@dataclass
class SectorBasis:
    """Ordered wedge basis of one (degree, weight) sector."""

    spec: AlgebraSpec
    degree: int
    weight: int
    wedges: list[Wedge]
    index: dict[Wedge, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.index and self.wedges:
            self.index = {w: i for i, w in enumerate(self.wedges)}

    @property
    def dim(self) -> int:
        return len(self.wedges)


def _weight_profiles(table: GeneratorTable, degree: int, weight: int,
                     horizontal: bool) -> list[dict[int, int]]:
    """All ways to split `degree` factors among weight classes summing to `weight`.

    Bounded backtracking: a factor weighs at least -1, class sizes cap the
    counts, and once every remaining factor must weigh more than the
    remaining weight allows the branch dies.
    """
    out: list[dict[int, int]] = []
    prof: dict[int, int] = {}

    def rec(w: int, rem_d: int, rem_w: int) -> None:
        if rem_d == 0:
            if rem_w == 0:
                out.append({k: v for k, v in prof.items() if v})
            return
        if rem_w < rem_d * w:
            return
        cap = 0 if (horizontal and w == 0) else min(rem_d, table.block_size(w))
        for j in range(cap + 1):
            prof[w] = j
            rec(w + 1, rem_d - j, rem_w - w * j)
        prof.pop(w, None)

    rec(-1, degree, weight)
    return out


def _enumerate(spec: AlgebraSpec, degree: int, weight: int,
               table: GeneratorTable, horizontal: bool,
               interrupt=None) -> SectorBasis:
    if degree < 0:
        return SectorBasis(spec, degree, weight, [])
    if degree == 0:
        wedges = [()] if weight == 0 else []
        return SectorBasis(spec, degree, weight, wedges)
    wedges: list[Wedge] = []
    for prof in _weight_profiles(table, degree, weight, horizontal):
        classes = sorted(prof)
        pools = []
        for w in classes:
            lo, hi = table.id_range(w)
            pools.append(itertools.combinations(range(lo, hi), prof[w]))
        for combo in itertools.product(*pools):
            wedge = tuple(itertools.chain.from_iterable(combo))
            wedges.append(wedge)
            if interrupt is not None and len(wedges) % 65536 == 0:
                interrupt()
    wedges.sort()
    return SectorBasis(spec, degree, weight, wedges)


def enumerate_sector(spec: AlgebraSpec, degree: int, weight: int,
                     table: GeneratorTable | None = None,
                     interrupt=None) -> SectorBasis:
    """Canonical basis of sector (degree, weight), sorted lexicographically."""
    return _enumerate(spec, degree, weight, table or GeneratorTable(spec),
                      horizontal=False, interrupt=interrupt)


def enumerate_horizontal_sector(spec: AlgebraSpec, degree: int, weight: int,
                                table: GeneratorTable | None = None) -> SectorBasis:
    """Sub-basis of wedges free of quadratic (weight-0) dual factors."""
    return _enumerate(spec, degree, weight, table or GeneratorTable(spec), horizontal=True)


class CobracketIndex:
    """target id -> [(a, b, c)] with a < b and c the coefficient of e_target in [e_a, e_b].

    Finite for every target: a pair hitting weight W has class weights
    (w1, W - w1) with w1 ranging over [-1, floor(W/2)].  Built lazily per
    weight block under a lock; structure constants are integers.
    """

    def __init__(self, spec: AlgebraSpec, table: GeneratorTable):
        self.spec = spec
        self.table = table
        self._by_weight: dict[int, dict[int, list[tuple[int, int, int]]]] = {}
        self._lock = threading.Lock()

    def _build(self, w: int) -> dict[int, list[tuple[int, int, int]]]:
        table = self.table
        lo, hi = table.id_range(w)
        result: dict[int, list[tuple[int, int, int]]] = {g: [] for g in range(lo, hi)}
        for w1 in range(-1, w // 2 + 1):
            w2 = w - w1
            block1 = table.block(w1)
            block2 = table.block(w2)
            base1 = table.id_range(w1)[0]
            base2 = table.id_range(w2)[0]
            if w1 == w2:
                pairs = ((i, j) for i in range(len(block1)) for j in range(i + 1, len(block1)))
            else:
                pairs = ((i, j) for i in range(len(block1)) for j in range(len(block2)))
            for i, j in pairs:
                br = poisson_bracket(PoissonElement.monomial(block1[i]),
                                     PoissonElement.monomial(block2[j]), self.spec)
                for m, c in br.terms.items():
                    assert c.denominator == 1
                    result[table.id_of(m)].append((base1 + i, base2 + j, int(c)))
        return result

    def for_weight(self, w: int) -> dict[int, list[tuple[int, int, int]]]:
        with self._lock:
            got = self._by_weight.get(w)
            if got is None:
                got = self._build(w)
                self._by_weight[w] = got
            return got

    def of(self, gen_id: int) -> list[tuple[int, int, int]]:
        return self.for_weight(self.table.weight_of_id(gen_id))[gen_id]


def _insertion_parity(rest: Wedge, pos: int, value: int) -> int:
    """Inversions contributed by `value` sitting at slot `pos` among `rest`."""
    i = bisect_left(rest, value)
    return pos - i if i <= pos else i - pos


def koszul_matrix(wedges: list[Wedge], target_index: dict[Wedge, int], target_dim: int,
                  cobr_of, interrupt=None) -> SparseExactMatrix:
    """Matrix of the odd-derivation differential on the given wedges.

    cobr_of(gen_id) supplies the cobracket terms (a, b, c); the routine is
    shared by the infinite-dimensional sectors and the finite sp(2n)
    complex.  Terms whose replacement collides with a remaining factor drop
    out (the wedge square is zero); everything else lands in target_index,
    and a miss means the target enumeration is incomplete, hence the assert.
    """
    entries: dict[tuple[int, int], Fraction | int] = {}
    for col, wedge in enumerate(wedges):
        if interrupt is not None and col % 512 == 0:
            interrupt()
        acc: dict[int, int] = {}
        for t, g in enumerate(wedge):
            rest = wedge[:t] + wedge[t + 1:]
            rest_set = set(rest)
            slot_sign = -1 if t % 2 else 1
            for a, b, c in cobr_of(g):
                if a in rest_set or b in rest_set:
                    continue
                inv = _insertion_parity(rest, t, a) + _insertion_parity(rest, t, b)
                sign = slot_sign if inv % 2 == 0 else -slot_sign
                new = tuple(sorted(rest + (a, b)))
                row = target_index.get(new)
                assert row is not None, f"target wedge {new} missing from codomain basis"
                acc[row] = acc.get(row, 0) - sign * c
        for row, v in acc.items():
            if v:
                entries[(row, col)] = Fraction(v)
    return SparseExactMatrix(target_dim, len(wedges), entries)


def assemble_differential(basis_d: SectorBasis, basis_d1: SectorBasis,
                          table: GeneratorTable, cobr: CobracketIndex,
                          interrupt=None) -> SparseExactMatrix:
    """CE differential C^(d,w) -> C^(d+1,w) in the two given bases."""
    if basis_d.spec != basis_d1.spec:
        raise ValueError("bases disagree on the algebra")
    if basis_d.weight != basis_d1.weight:
        raise ValueError(f"weight mismatch {basis_d.weight} vs {basis_d1.weight}")
    if basis_d1.degree != basis_d.degree + 1:
        raise ValueError(f"degree mismatch {basis_d.degree} -> {basis_d1.degree}")
    return koszul_matrix(basis_d.wedges, basis_d1.index, basis_d1.dim, cobr.of,
                         interrupt=interrupt)


class SpActionIndex:
    """Single-factor substitutions for the coadjoint action of one quadratic h.

    of(g) lists (g', c): L_h xi_g contains c * xi_{g'}.  Replacements stay in
    the weight block of g, so horizontal wedges stay horizontal.
    """

    def __init__(self, spec: AlgebraSpec, table: GeneratorTable, h: Monomial):
        if h.weight != 0:
            raise ValueError(f"sp action needs a quadratic monomial, got weight {h.weight}")
        self.spec = spec
        self.table = table
        self.h = h
        self._by_weight: dict[int, dict[int, list[tuple[int, int]]]] = {}
        self._lock = threading.Lock()

    def _build(self, w: int) -> dict[int, list[tuple[int, int]]]:
        table = self.table
        lo, hi = table.id_range(w)
        result: dict[int, list[tuple[int, int]]] = {g: [] for g in range(lo, hi)}
        h_elem = PoissonElement.monomial(self.h)
        for j, m_src in enumerate(table.block(w)):
            br = poisson_bracket(h_elem, PoissonElement.monomial(m_src), self.spec)
            for m, c in br.terms.items():
                assert c.denominator == 1
                result[table.id_of(m)].append((lo + j, -int(c)))
        return result

    def of(self, gen_id: int) -> list[tuple[int, int]]:
        w = self.table.weight_of_id(gen_id)
        with self._lock:
            got = self._by_weight.get(w)
            if got is None:
                got = self._build(w)
                self._by_weight[w] = got
        return got[gen_id]


def assemble_sp_action(basis: SectorBasis, h: Monomial, table: GeneratorTable,
                       action: SpActionIndex | None = None) -> SparseExactMatrix:
    """Matrix of L_h on one sector (square; even derivation, no slot signs)."""
    if action is None:
        action = SpActionIndex(basis.spec, table, h)
    entries: dict[tuple[int, int], Fraction | int] = {}
    for col, wedge in enumerate(basis.wedges):
        acc: dict[int, int] = {}
        for t, g in enumerate(wedge):
            rest = wedge[:t] + wedge[t + 1:]
            rest_set = set(rest)
            for g2, c in action.of(g):
                if g2 == g:
                    row = basis.index[wedge]
                    acc[row] = acc.get(row, 0) + c
                    continue
                if g2 in rest_set:
                    continue
                inv = _insertion_parity(rest, t, g2)
                sign = 1 if inv % 2 == 0 else -1
                new = tuple(sorted(rest + (g2,)))
                row = basis.index.get(new)
                assert row is not None, f"sp action left the sector at {new}"
                acc[row] = acc.get(row, 0) + sign * c
        for row, v in acc.items():
            if v:
                entries[(row, col)] = Fraction(v)
    return SparseExactMatrix(basis.dim, basis.dim, entries)


def relative_sector(spec: AlgebraSpec, degree: int, weight: int,
                    table: GeneratorTable | None = None,
                    exact_threshold: int | None = None
                    ) -> tuple[SectorBasis, list[tuple[Fraction, ...]]]:
    """Horizontal sub-basis plus a basis of the joint sp(2n) kernel on it.

    Returns (horizontal basis, kernel vectors in its coordinates).  The
    kernel is computed exactly as the null space of the stacked L_h matrices
    over all quadratic basis monomials h; the CE differential restricts to
    the span of these vectors.
    """
    table = table or GeneratorTable(spec)
    horiz = enumerate_horizontal_sector(spec, degree, weight, table)
    if horiz.dim == 0:
        return horiz, []
    hs = sp_basis(spec)
    stacked: dict[tuple[int, int], Fraction | int] = {}
    for k, h in enumerate(hs):
        m = assemble_sp_action(horiz, h, table)
        for (r, c), v in m.entries.items():
            stacked[(k * horiz.dim + r, c)] = v
    big = SparseExactMatrix(len(hs) * horiz.dim, horiz.dim, stacked)
    kernel = kernel_basis_exact(big, threshold=exact_threshold)
    return horiz, kernel
