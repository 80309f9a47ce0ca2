"""Sparse exact rank and kernel computation, rational and multi-modular.

Matrices are coordinate-form dictionaries.  Ranks are computed two ways:
over GF(p) by sparse elimination for one or more word-sized primes, and over
the integers by fraction-free (Bareiss) elimination, which keeps every
intermediate entry an exact minor of the input and so never touches
rationals.  Reduction mod p can only lower the rank, so agreement of several
independent primes certifies the modular answer; the exact route confirms it
outright whenever the matrix is small enough.

rank_certified raises RankDisagreement the moment any two routes differ; it
never glosses over a bad prime.  Callers that want to proceed must supply
more primes or force exact mode themselves (RESERVE_PRIME is set aside for
that), and report the row as uncertified meanwhile.

Pivot selection everywhere is sparsest-row / sparsest-column with index tie
breaks, so every routine is a pure deterministic function of its inputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm

# The three largest primes below 2^31: residues and their products stay well
# inside a machine word.  The first two are the working pair; the third is
# reserved for re-runs after a disagreement.
DEFAULT_PRIMES: tuple[int, int] = (2147483647, 2147483629)
RESERVE_PRIME: int = 2147483587

DEFAULT_EXACT_THRESHOLD: int = 2000


class UnreduciblePrimeError(ValueError):
    """A denominator in the matrix is divisible by the requested prime."""


class ThresholdExceeded(RuntimeError):
    """Matrix too large for the caller-enforced exact-elimination threshold."""


class RankDisagreement(RuntimeError):
    """Rank routes disagree; carries every computed rank keyed by route.

    Keys are primes (ints) for modular ranks and the string "exact" when the
    fraction-free elimination participated.
    """

    def __init__(self, ranks: dict):
        self.ranks = dict(ranks)
        detail = ", ".join(f"{k}: {v}" for k, v in self.ranks.items())
        super().__init__(f"rank disagreement across routes ({detail}); "
                         f"add primes or force exact mode")


@dataclass(frozen=True)
class RankCertificate:
    rank: int
    primes_used: tuple[int, ...]
    agreement: bool
    exact_confirmed: bool

    def __post_init__(self) -> None:
        if self.rank < 0:
            raise ValueError("negative rank")
        if self.exact_confirmed and not self.agreement:
            raise ValueError("exact_confirmed requires agreement")


@dataclass
class SparseExactMatrix:
    """Coordinate-form sparse matrix.

    entries maps (row, col) -> value, 0-based, storing only nonzeros.  Values
    are Fractions/ints when modulus is None, or residues in [1, modulus)
    otherwise.  Structure constants downstream are integers, but rational
    entries appear once kernel vectors get composed with differentials, so
    the rational case is first-class.
    """

    rows: int
    cols: int
    entries: dict[tuple[int, int], Fraction | int] = field(default_factory=dict)
    modulus: int | None = None

    def __post_init__(self) -> None:
        if self.rows < 0 or self.cols < 0:
            raise ValueError("negative dimensions")
        for (r, c), v in self.entries.items():
            if not (0 <= r < self.rows and 0 <= c < self.cols):
                raise ValueError(f"entry ({r},{c}) outside {self.rows}x{self.cols}")
            if self.modulus is None:
                if v == 0:
                    raise ValueError(f"explicit zero stored at ({r},{c})")
            else:
                if not isinstance(v, int) or not 0 < v < self.modulus:
                    raise ValueError(f"residue {v!r} at ({r},{c}) not in [1,{self.modulus})")

    @classmethod
    def from_triplets(cls, rows: int, cols: int,
                      triplets: list[tuple[int, int, Fraction | int]],
                      modulus: int | None = None) -> SparseExactMatrix:
        entries: dict[tuple[int, int], Fraction | int] = {}
        for r, c, v in triplets:
            if (r, c) in entries:
                raise ValueError(f"duplicate entry at ({r},{c})")
            if modulus is not None:
                v = int(v) % modulus
            if v != 0:
                entries[(r, c)] = v
        return cls(rows, cols, entries, modulus)

    @classmethod
    def from_columns(cls, rows: int, columns: list) -> SparseExactMatrix:
        """Assemble a rational matrix whose j-th column is columns[j]."""
        entries: dict[tuple[int, int], Fraction | int] = {}
        for j, col in enumerate(columns):
            if len(col) != rows:
                raise ValueError(f"column {j} has length {len(col)}, want {rows}")
            for i, v in enumerate(col):
                if v:
                    entries[(i, j)] = Fraction(v)
        return cls(rows, len(columns), entries)

    @property
    def nnz(self) -> int:
        return len(self.entries)

    def is_zero(self) -> bool:
        return not self.entries

    def row_dicts(self) -> list[dict[int, Fraction | int]]:
        out: list[dict[int, Fraction | int]] = [dict() for _ in range(self.rows)]
        for (r, c), v in self.entries.items():
            out[r][c] = v
        return out

    def multiply(self, other: SparseExactMatrix) -> SparseExactMatrix:
        """Exact product self @ other (both rational, or both mod the same p)."""
        if self.cols != other.rows:
            raise ValueError(f"shape mismatch {self.rows}x{self.cols} @ {other.rows}x{other.cols}")
        if self.modulus != other.modulus:
            raise ValueError("mixed moduli in product")
        other_rows: dict[int, dict[int, Fraction | int]] = {}
        for (k, c), v in other.entries.items():
            other_rows.setdefault(k, {})[c] = v
        acc: dict[tuple[int, int], Fraction | int] = {}
        for (r, k), va in self.entries.items():
            row_k = other_rows.get(k)
            if not row_k:
                continue
            for c, vb in row_k.items():
                key = (r, c)
                acc[key] = acc.get(key, 0) + va * vb
        if self.modulus is None:
            entries = {k: v for k, v in acc.items() if v != 0}
        else:
            entries = {}
            for k, v in acc.items():
                v %= self.modulus
                if v:
                    entries[k] = v
        return SparseExactMatrix(self.rows, other.cols, entries, self.modulus)


def _reduce_rows_mod_p(m: SparseExactMatrix, p: int) -> list[dict[int, int]]:
    if p < 2:
        raise ValueError(f"modulus {p} is not a prime")
    if m.modulus is not None and m.modulus != p:
        raise ValueError(f"matrix carries modulus {m.modulus}, asked for {p}")
    rows: list[dict[int, int]] = [dict() for _ in range(m.rows)]
    for (r, c), v in m.entries.items():
        if isinstance(v, Fraction):
            if v.denominator % p == 0:
                raise UnreduciblePrimeError(f"denominator {v.denominator} divisible by {p}")
            val = v.numerator * pow(v.denominator, p - 2, p) % p
        else:
            val = v % p
        if val:
            rows[r][c] = val
    return rows


def _pick_pivot(active: set[int], rows: list[dict[int, int]],
                col_rows: dict[int, set[int]]) -> tuple[int, int]:
    r = min(active, key=lambda i: (len(rows[i]), i))
    c = min(rows[r], key=lambda j: (len(col_rows[j]), j))
    return r, c


def rank_mod_p(m: SparseExactMatrix, p: int, interrupt=None) -> int:
    """Rank of the reduction mod p.  Deterministic in (m, p)."""
    rows = _reduce_rows_mod_p(m, p)
    col_rows: dict[int, set[int]] = {}
    active: set[int] = set()
    for i, row in enumerate(rows):
        if row:
            active.add(i)
            for c in row:
                col_rows.setdefault(c, set()).add(i)
    rank = 0
    while active:
        if interrupt is not None and rank % 128 == 0:
            interrupt()
        r, c = _pick_pivot(active, rows, col_rows)
        piv_row = rows[r]
        inv = pow(piv_row[c], p - 2, p)
        piv_row = {j: v * inv % p for j, v in piv_row.items()}
        rows[r] = piv_row
        active.discard(r)
        for j in piv_row:
            col_rows[j].discard(r)
        for s in list(col_rows[c]):
            if s not in active:
                continue
            srow = rows[s]
            f = srow.pop(c, 0)
            if not f:
                continue
            col_rows[c].discard(s)
            for j, v in piv_row.items():
                if j == c:
                    continue
                cur = srow.get(j)
                if cur is None:
                    nv = (-f * v) % p
                    if nv:
                        srow[j] = nv
                        col_rows.setdefault(j, set()).add(s)
                else:
                    nv = (cur - f * v) % p
                    if nv:
                        srow[j] = nv
                    else:
                        del srow[j]
                        col_rows[j].discard(s)
            if not srow:
                active.discard(s)
        rank += 1
    return rank


def rank_exact(m: SparseExactMatrix, interrupt=None) -> int:
    """Exact rank over the rationals, by fraction-free integer elimination.

    Rows are pre-scaled to integers (rank-invariant).  One-step Bareiss:
    every surviving row is updated against the pivot row and divided by the
    previous pivot, a division that is exact because each entry stays a
    minor of the scaled input.  The assert guards that identity.
    """
    if m.modulus is not None:
        return rank_mod_p(m, m.modulus, interrupt=interrupt)
    rows: list[dict[int, int]] = [dict() for _ in range(m.rows)]
    for (r, c), v in m.entries.items():
        rows[r][c] = v
    for i, row in enumerate(rows):
        if any(isinstance(v, Fraction) for v in row.values()):
            scale = lcm(*(Fraction(v).denominator for v in row.values()))
            rows[i] = {c: int(v * scale) for c, v in row.items()}
    col_rows: dict[int, set[int]] = {}
    active: set[int] = set()
    for i, row in enumerate(rows):
        if row:
            active.add(i)
            for c in row:
                col_rows.setdefault(c, set()).add(i)
    rank = 0
    prev = 1
    while active:
        if interrupt is not None and rank % 128 == 0:
            interrupt()
        r, c = _pick_pivot(active, rows, col_rows)
        piv_row = rows[r]
        piv = piv_row[c]
        active.discard(r)
        for j in piv_row:
            col_rows[j].discard(r)
        for s in list(active):
            srow = rows[s]
            f = srow.pop(c, 0)
            if f:
                col_rows[c].discard(s)
                keys = set(srow) | set(piv_row)
                keys.discard(c)
                new: dict[int, int] = {}
                for j in keys:
                    val = srow.get(j, 0) * piv - f * piv_row.get(j, 0)
                    q, rem = divmod(val, prev)
                    assert rem == 0, "fraction-free division failed"
                    if q:
                        new[j] = q
                for j in set(srow) - set(new):
                    col_rows[j].discard(s)
                for j in set(new) - set(srow):
                    col_rows.setdefault(j, set()).add(s)
                rows[s] = new
                if not new:
                    active.discard(s)
            else:
                for j in list(srow):
                    q, rem = divmod(srow[j] * piv, prev)
                    assert rem == 0, "fraction-free division failed"
                    srow[j] = q
        prev = piv
        rank += 1
    return rank


def rank_certified(m: SparseExactMatrix,
                   primes: tuple[int, ...] = DEFAULT_PRIMES,
                   exact_fallback_threshold: int = DEFAULT_EXACT_THRESHOLD,
                   interrupt=None) -> RankCertificate:
    """Rank with a multi-modular certificate.

    All supplied primes must agree, and when max(rows, cols) is within the
    exact threshold the fraction-free rank must match as well; any
    discrepancy raises RankDisagreement carrying every computed rank.
    Modular rank never exceeds the rational rank, which is what makes the
    agreement meaningful.
    """
    primes = tuple(primes)
    if len(set(primes)) < 2:
        raise ValueError("need at least 2 distinct primes")
    ranks: dict = {p: rank_mod_p(m, p, interrupt=interrupt) for p in primes}
    values = set(ranks.values())
    if len(values) > 1:
        raise RankDisagreement(ranks)
    rank = values.pop()
    exact_confirmed = False
    if max(m.rows, m.cols) <= exact_fallback_threshold:
        exact = rank_exact(m, interrupt=interrupt)
        if exact != rank:
            ranks["exact"] = exact
            raise RankDisagreement(ranks)
        exact_confirmed = True
    return RankCertificate(rank=rank, primes_used=primes,
                           agreement=True, exact_confirmed=exact_confirmed)


def kernel_basis_exact(m: SparseExactMatrix,
                       threshold: int | None = None) -> list[tuple[Fraction, ...]]:
    """Basis of the exact rational right kernel, one vector per free column.

    Gauss-Jordan over Fraction with leftmost-column pivoting; free columns
    are read off in ascending order, so the result is deterministic and each
    basis vector has a 1 in its own free coordinate.
    """
    if m.modulus is not None:
        raise ValueError("rational kernel of a residue matrix is not defined here")
    if threshold is not None and max(m.rows, m.cols) > threshold:
        raise ThresholdExceeded(f"{m.rows}x{m.cols} exceeds exact threshold {threshold}")
    pivots: dict[int, dict[int, Fraction]] = {}
    for raw in m.row_dicts():
        row = {c: Fraction(v) for c, v in raw.items()}
        # Reduce against every existing pivot, smallest column first, until
        # the row is supported on free columns only; only then is the RREF
        # invariant (pivot rows touch no other pivot column) preserved.
        while True:
            hits = [c for c in row if c in pivots]
            if not hits:
                break
            c = min(hits)
            f = row.pop(c)
            for j, v in pivots[c].items():
                if j == c:
                    continue
                nv = row.get(j, Fraction(0)) - f * v
                if nv:
                    row[j] = nv
                else:
                    row.pop(j, None)
        if not row:
            continue
        c = min(row)
        inv = 1 / row[c]
        row = {j: v * inv for j, v in row.items()}
        for prow in pivots.values():
            f = prow.get(c)
            if f:
                for j, v in row.items():
                    nv = prow.get(j, Fraction(0)) - f * v
                    if nv:
                        prow[j] = nv
                    else:
                        prow.pop(j, None)
        pivots[c] = row
    free_cols = [c for c in range(m.cols) if c not in pivots]
    basis = []
    for fc in free_cols:
        vec = [Fraction(0)] * m.cols
        vec[fc] = Fraction(1)
        for pc, prow in pivots.items():
            coef = prow.get(fc)
            if coef:
                vec[pc] = -coef
        basis.append(tuple(vec))
    assert len(basis) == m.cols - len(pivots)
    return basis


def matrix_applies_to_zero(a: SparseExactMatrix, b: SparseExactMatrix) -> bool:
    """True iff the composite a @ b is exactly the zero matrix."""
    return a.multiply(b).is_zero()
