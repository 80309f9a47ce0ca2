"""Betti tables, their invariants, and explicit representatives."""

from __future__ import annotations

from fractions import Fraction

import pytest

from hamcoh.linalg import SparseExactMatrix, rank_exact
from hamcoh.poisson import AlgebraSpec, GeneratorTable, Monomial, sp_basis
from hamcoh.cochains import (CobracketIndex, assemble_differential,
                             assemble_sp_action, enumerate_sector,
                             relative_sector)
from hamcoh.engine import (BettiRow, BettiTable, DifferentialSquareError,
                           EmptyCohomologyError, _check_d_squared, betti_table,
                           betti_table_relative, extract_representative,
                           max_support_degree, sp_cohomology)

SPEC1 = AlgebraSpec(1)


def dense_rank(m: SparseExactMatrix) -> int:
    a = [[Fraction(0)] * m.cols for _ in range(m.rows)]
    for (r, c), v in m.entries.items():
        a[r][c] = Fraction(v)
    rank, row = 0, 0
    for col in range(m.cols):
        piv = next((r for r in range(row, m.rows) if a[r][col]), None)
        if piv is None:
            continue
        a[row], a[piv] = a[piv], a[row]
        inv = 1 / a[row][col]
        a[row] = [x * inv for x in a[row]]
        for r in range(m.rows):
            if r != row and a[r][col]:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[row])]
        rank += 1
        row += 1
        if row == m.rows:
            break
    return rank


# ------------------------------------------------------------ absolute tables

def test_max_support_degree():
    assert max_support_degree(SPEC1, 0) == 7
    assert max_support_degree(SPEC1, -2) == 5
    assert max_support_degree(SPEC1, 1) == 8
    assert max_support_degree(AlgebraSpec(2), 0) == 18


def test_weight_zero_table_n1():
    t = betti_table(SPEC1, 0, 8, reduced=False)
    assert [r.dim for r in t.rows] == [1, 3, 11, 30, 45, 41, 23, 6, 0]
    assert [r.rank_out for r in t.rows] == [0, 3, 8, 22, 23, 18, 5, 0, 0]
    assert t.betti_dict() == {0: 1, 7: 1}
    assert t.complete and all(r.certified for r in t.rows)
    t.validate()


def test_weight_zero_reduced_drops_only_degree_zero():
    red = betti_table(SPEC1, 0, 8, reduced=True)
    unred = betti_table(SPEC1, 0, 8, reduced=False)
    assert red.betti_dict() == {7: 1}
    for r_red, r_unred in zip(red.rows, unred.rows):
        if r_red.degree == 0:
            assert (r_red.dim, r_unred.dim) == (0, 1)
        else:
            assert r_red.to_dict() == r_unred.to_dict()


def test_weight_minus_two_table_n1():
    t = betti_table(SPEC1, -2, 5)
    assert [r.dim for r in t.rows] == [0, 0, 1, 3, 3, 1]
    assert t.betti_dict() == {2: 1, 5: 1}
    assert t.complete
    # reduced flag is inert away from weight 0
    assert betti_table(SPEC1, -2, 5, reduced=False).betti_dict() == {2: 1, 5: 1}


@pytest.mark.parametrize("weight", [-3, -1, 1])
def test_odd_and_minus_three_weights_vanish_n1(weight):
    t = betti_table(SPEC1, weight, max_support_degree(SPEC1, weight))
    assert t.betti_dict() == {}
    t.validate()


def test_incomplete_table_reports_unknown_outside_range():
    t = betti_table(SPEC1, 0, 3)
    assert not t.complete
    assert t.betti(9) is None
    full = betti_table(SPEC1, 0, 7)
    assert full.complete and full.betti(9) == 0


def test_threads_do_not_change_the_table():
    a = betti_table(SPEC1, 0, 8, threads=1)
    b = betti_table(SPEC1, 0, 8, threads=4)
    assert [r.to_dict() for r in a.rows] == [r.to_dict() for r in b.rows]


def test_degree_max_must_be_nonnegative():
    with pytest.raises(ValueError):
        betti_table(SPEC1, 0, -1)
    with pytest.raises(ValueError):
        betti_table_relative(SPEC1, 0, -1)


def test_d_squared_checker_modes():
    table = GeneratorTable(SPEC1)
    cobr = CobracketIndex(SPEC1, table)
    bases = {d: enumerate_sector(SPEC1, d, 0, table) for d in range(4)}
    mats = {d: assemble_differential(bases[d], bases[d + 1], table, cobr)
            for d in range(3)}
    _check_d_squared(mats, "exact", (101, 103))
    _check_d_squared(mats, "modular", (101, 103))
    _check_d_squared(mats, "off", (101, 103))
    with pytest.raises(ValueError):
        _check_d_squared(mats, "bogus", (101, 103))
    # a non-complex must be rejected in both checking modes
    bad = {0: SparseExactMatrix(2, 1, {(0, 0): 1}),
           1: SparseExactMatrix(1, 2, {(0, 0): 1})}
    with pytest.raises(DifferentialSquareError):
        _check_d_squared(bad, "exact", (101, 103))
    with pytest.raises(DifferentialSquareError):
        _check_d_squared(bad, "modular", (101, 103))


def test_table_validate_catches_inconsistent_rows():
    rows = [BettiRow(0, 1, 0, 0, 1, True), BettiRow(1, 2, 1, 5, 1, True)]
    t = BettiTable(SPEC1, 0, False, rows, complete=False)
    with pytest.raises(AssertionError):
        t.validate()


# ------------------------------------------------------------ relative tables

def test_relative_tables_n1():
    t0 = betti_table_relative(SPEC1, 0, 9, reduced=False)
    assert t0.betti_dict() == {0: 1, 4: 1}
    assert betti_table_relative(SPEC1, 0, 9).betti_dict() == {4: 1}
    tm2 = betti_table_relative(SPEC1, -2, 9)
    assert tm2.betti_dict() == {2: 1}
    assert betti_table_relative(SPEC1, -4, 9).betti_dict() == {}


def test_relative_dims_bounded_by_absolute():
    for w in (0, -2):
        rel = betti_table_relative(SPEC1, w, 7, reduced=False)
        ab = betti_table(SPEC1, w, 7, reduced=False)
        for r_rel, r_ab in zip(rel.rows, ab.rows):
            assert r_rel.dim <= r_ab.dim


def test_relative_weight_zero_invariant_dims():
    rel = betti_table_relative(SPEC1, 0, 7, reduced=False)
    assert [r.dim for r in rel.rows] == [1, 0, 0, 0, 1, 0, 0, 0]


# ------------------------------------------------------------------- sp tables

def test_sp_poincare_n1():
    t = sp_cohomology(SPEC1)
    assert [r.dim for r in t.rows] == [1, 3, 3, 1]
    assert t.betti_dict() == {0: 1, 3: 1}
    assert t.complete


def test_sp_poincare_n2():
    t = sp_cohomology(AlgebraSpec(2))
    assert t.betti_dict() == {0: 1, 3: 1, 7: 1, 10: 1}
    assert [r.dim for r in t.rows] == [1, 10, 45, 120, 210, 252, 210, 120, 45, 10, 1]


# -------------------------------------------------------------- representatives

def test_degree7_representative_is_a_noncoboundary_cocycle():
    rep = extract_representative(SPEC1, 7, 0)
    assert not rep.relative
    assert len(rep.coefficients) == rep.basis.dim == 6
    assert any(rep.coefficients)

    # independent verification with freshly assembled matrices
    table = GeneratorTable(SPEC1)
    cobr = CobracketIndex(SPEC1, table)
    b6 = enumerate_sector(SPEC1, 6, 0, table)
    b7 = enumerate_sector(SPEC1, 7, 0, table)
    b8 = enumerate_sector(SPEC1, 8, 0, table)
    m_out = assemble_differential(b7, b8, table, cobr)
    m_in = assemble_differential(b6, b7, table, cobr)
    image = [Fraction(0)] * m_out.rows
    for (r, c), v in m_out.entries.items():
        if rep.coefficients[c]:
            image[r] += Fraction(v) * rep.coefficients[c]
    assert all(x == 0 for x in image)
    # not a coboundary: appending the vector strictly raises the rank
    aug_entries = dict(m_in.entries)
    for i, v in enumerate(rep.coefficients):
        if v:
            aug_entries[(i, m_in.cols)] = v
    aug = SparseExactMatrix(m_in.rows, m_in.cols + 1, aug_entries)
    assert dense_rank(aug) == dense_rank(m_in) + 1


def test_empty_sector_raises():
    with pytest.raises(EmptyCohomologyError, match="empty cohomology"):
        extract_representative(SPEC1, 5, 0)
    with pytest.raises(EmptyCohomologyError, match="empty relative"):
        extract_representative(SPEC1, 1, -2, relative=True)


def test_relative_representative_at_weight_minus_two():
    rep = extract_representative(SPEC1, 2, -2, relative=True)
    assert rep.relative
    # the class is the symplectic 2-cochain: the wedge of the two linear duals
    assert rep.basis.wedges == [(0, 1)]
    assert rep.coefficients == (Fraction(1),)
    # invariance double-check: every quadratic kills it
    table = GeneratorTable(SPEC1)
    for h in sp_basis(SPEC1):
        m = assemble_sp_action(rep.basis, h, table)
        out = [Fraction(0)] * m.rows
        for (r, c), v in m.entries.items():
            out[r] += Fraction(v) * rep.coefficients[c]
        assert all(x == 0 for x in out)


def test_relative_representative_weight_zero_degree_four():
    rep = extract_representative(SPEC1, 4, 0, relative=True)
    assert rep.relative and rep.degree == 4
    table = GeneratorTable(SPEC1)
    horiz, kern = relative_sector(SPEC1, 4, 0, table)
    assert rep.basis.wedges == horiz.wedges
    # the representative must lie in the invariant kernel's span: here the
    # kernel is 1-dimensional, so the vectors are proportional
    assert len(kern) == 1
    k = kern[0]
    ratios = {rep.coefficients[i] / k[i] for i in range(len(k)) if k[i]}
    assert len(ratios) == 1
    assert all(rep.coefficients[i] == 0 for i in range(len(k)) if not k[i])
