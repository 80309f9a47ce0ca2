"""Verification suites: computed tables diffed against expected values.

Expected values come from the claim registry: classical claims carry
transcribed numbers, model claims are regenerated from the closed-form
model at run time so the direct computation is compared against an
independent derivation rather than hand-entered constants.

Budgets (wall-clock seconds, resident-set MB) are enforced at computation
checkpoints, including inside sector enumeration, matrix assembly, and the
elimination loops.  A row that trips the budget is marked "skipped", never
"failed"; rows that completed keep their verdicts and the report's overall
status degrades to "incomplete" instead of "fail" when nothing actually
failed.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import psutil

from ._version import __version__
from .poisson import AlgebraSpec, GeneratorTable
from .cochains import CobracketIndex, assemble_differential, enumerate_sector
from .engine import betti_table, betti_table_relative, max_support_degree, sp_cohomology
from .expectations import Claim, load_claims
from .linalg import DEFAULT_EXACT_THRESHOLD, DEFAULT_PRIMES, RankDisagreement, rank_certified
from .model import predicted_betti

SUITE_NAMES = ("gkf-n1", "vanishing-n1", "odd-weight-n1", "relative-n1",
               "sp-small", "vanishing-n2-stretch")
DEFAULT_SUITES = tuple(s for s in SUITE_NAMES if not s.endswith("-stretch"))

STRETCH_BUDGET_SECONDS = 7200
STRETCH_BUDGET_MB = 8192


class BudgetExhausted(RuntimeError):
    def __init__(self, stage: str, reason: str):
        self.stage = stage
        self.reason = reason
        super().__init__(f"budget exhausted at stage '{stage}': {reason}")


class Budget:
    """Wall-clock and resident-memory ceiling, polled at checkpoints."""

    def __init__(self, seconds: float | None = None, mb: float | None = None):
        self.seconds = seconds
        self.mb = mb
        self.started = time.monotonic()
        self._process = psutil.Process() if mb is not None else None

    def checker(self, stage: str):
        def check() -> None:
            if self.seconds is not None:
                elapsed = time.monotonic() - self.started
                if elapsed > self.seconds:
                    raise BudgetExhausted(stage, f"{elapsed:.0f}s > {self.seconds:.0f}s")
            if self._process is not None:
                rss_mb = self._process.memory_info().rss / 2**20
                if rss_mb > self.mb:
                    raise BudgetExhausted(stage, f"rss {rss_mb:.0f}MB > {self.mb:.0f}MB")
        return check

    def check(self, stage: str) -> None:
        self.checker(stage)()


@dataclass
class VerificationRow:
    claim: str
    anchor: str
    expected: object
    computed: object | None
    status: str  # "pass" | "fail" | "skipped"
    seconds: float
    note: str = ""

    def to_dict(self, show_timing: bool = False) -> dict:
        return {"claim": self.claim, "anchor": self.anchor,
                "expected": self.expected, "computed": self.computed,
                "status": self.status,
                "seconds": round(self.seconds, 3) if show_timing else None,
                "note": self.note}


@dataclass
class VerificationReport:
    suite: str
    rows: list[VerificationRow] = field(default_factory=list)

    @property
    def overall(self) -> str:
        if any(r.status == "fail" for r in self.rows):
            return "fail"
        if any(r.status == "skipped" for r in self.rows):
            return "incomplete"
        return "pass"

    def to_dict(self, show_timing: bool = False) -> dict:
        return {"suite": self.suite, "overall": self.overall,
                "rows": [r.to_dict(show_timing) for r in self.rows],
                "tool_version": __version__}

    def format_text(self, show_timing: bool = False) -> str:
        lines = [f"suite: {self.suite}", f"overall: {self.overall}", ""]
        for r in self.rows:
            t = f"  {r.seconds:8.2f}s" if show_timing else ""
            lines.append(f"{r.status.upper():7s} {r.claim}{t}")
        failures = [r for r in self.rows if r.status == "fail"]
        skips = [r for r in self.rows if r.status == "skipped"]
        for r in failures:
            lines += ["", f"FAILED {r.claim}", f"  anchor:   {r.anchor}",
                      f"  expected: {r.expected}", f"  computed: {r.computed}"]
            if r.note:
                lines.append(f"  note:     {r.note}")
        for r in skips:
            lines += ["", f"SKIPPED {r.claim}: {r.note}"]
        return "\n".join(lines) + "\n"


def _betti_list(table) -> list[int | None]:
    return [row.betti for row in table.rows]


def _timed(rows: list[VerificationRow], claim: Claim, label: str, expected, compute,
           note: str = "") -> None:
    """Run one check, appending a pass/fail/skipped row."""
    t0 = time.monotonic()
    try:
        computed = compute()
    except BudgetExhausted as e:
        rows.append(VerificationRow(label, claim.anchor, expected, None, "skipped",
                                    time.monotonic() - t0, note=str(e)))
        return
    except RankDisagreement as e:
        rows.append(VerificationRow(label, claim.anchor, expected, repr(e.ranks), "fail",
                                    time.monotonic() - t0, note="rank certificate disagreement"))
        return
    status = "pass" if computed == expected else "fail"
    rows.append(VerificationRow(label, claim.anchor, expected, computed, status,
                                time.monotonic() - t0, note=note if status == "fail" else ""))


def _suite_gkf_n1(primes, threshold, budget) -> list[VerificationRow]:
    claim = load_claims()["gkf-n1"]
    spec = AlgebraSpec(claim.payload["n"])
    rows: list[VerificationRow] = []
    for w in claim.payload["weights"]:
        dmax = max_support_degree(spec, w)
        for reduced in (True, False):
            tag = "reduced" if reduced else "unreduced"
            model = predicted_betti(spec.n, w, dmax, reduced, primes, threshold)
            _timed(rows, claim, f"gkf-n1/w={w}/{tag}", _betti_list(model),
                   lambda w=w, reduced=reduced: _betti_list(
                       betti_table(spec, w, max_support_degree(spec, w), reduced,
                                   primes, threshold)))
    return rows


def _suite_vanishing_n1(primes, threshold, budget) -> list[VerificationRow]:
    claim = load_claims()["vanishing-n1"]
    spec = AlgebraSpec(claim.payload["n"])
    w = claim.payload["weight"]
    table = betti_table(spec, w, max_support_degree(spec, w), True, primes, threshold)
    rows: list[VerificationRow] = []
    for d in claim.payload["degrees"]:
        _timed(rows, claim, f"vanishing-n1/d={d}", claim.payload["betti"],
               lambda d=d: table.betti(d))
    return rows


def _suite_odd_weight_n1(primes, threshold, budget) -> list[VerificationRow]:
    claim = load_claims()["odd-weight-n1"]
    spec = AlgebraSpec(claim.payload["n"])
    rows: list[VerificationRow] = []
    for w in claim.payload["weights"]:
        _timed(rows, claim, f"odd-weight-n1/w={w}", {},
               lambda w=w: betti_table(spec, w, max_support_degree(spec, w), True,
                                       primes, threshold).betti_dict())
    return rows


def _suite_relative_n1(primes, threshold, budget) -> list[VerificationRow]:
    claim = load_claims()["relative-n1"]
    spec = AlgebraSpec(claim.payload["n"])
    dmax = claim.payload["degree_max"]
    rows: list[VerificationRow] = []
    for w in claim.payload["weights"]:
        expected = {int(d): b for d, b in claim.payload["nonzero"][str(w)].items()}
        _timed(rows, claim, f"relative-n1/w={w}", expected,
               lambda w=w: betti_table_relative(spec, w, dmax, True, primes,
                                                threshold).betti_dict(),
               note=claim.note)
    return rows


def _suite_sp_small(primes, threshold, budget) -> list[VerificationRow]:
    claim = load_claims()["sp-small"]
    rows: list[VerificationRow] = []
    for n_str, poincare in claim.payload["poincare"].items():
        expected = {int(d): b for d, b in poincare.items()}
        _timed(rows, claim, f"sp-small/n={n_str}", expected,
               lambda n=int(n_str): sp_cohomology(AlgebraSpec(n), primes,
                                                  threshold).betti_dict())
    return rows


def _stretch_betti(spec: AlgebraSpec, weight: int, degree: int, primes, threshold,
                   budget: Budget) -> int:
    """Betti of one large sector with budget checkpoints between and inside steps."""
    table = GeneratorTable(spec)
    cobr = CobracketIndex(spec, table)
    bases = {}
    for d in (degree - 1, degree, degree + 1):
        bases[d] = enumerate_sector(spec, d, weight, table,
                                    interrupt=budget.checker(f"enumerating sector d={d}"))
    budget.check("sector enumeration done")
    m_in = assemble_differential(bases[degree - 1], bases[degree], table, cobr,
                                 interrupt=budget.checker(f"assembling d_{degree - 1}"))
    budget.check("incoming differential assembled")
    m_out = assemble_differential(bases[degree], bases[degree + 1], table, cobr,
                                  interrupt=budget.checker(f"assembling d_{degree}"))
    budget.check("outgoing differential assembled")
    cert_in = rank_certified(m_in, primes, threshold,
                             interrupt=budget.checker(f"rank of d_{degree - 1}"))
    cert_out = rank_certified(m_out, primes, threshold,
                              interrupt=budget.checker(f"rank of d_{degree}"))
    return bases[degree].dim - cert_out.rank - cert_in.rank


def _suite_vanishing_n2_stretch(primes, threshold, budget) -> list[VerificationRow]:
    claim = load_claims()["vanishing-n2-stretch"]
    spec = AlgebraSpec(claim.payload["n"])
    w = claim.payload["weight"]
    if budget is None or (budget.seconds is None and budget.mb is None):
        total_mb = psutil.virtual_memory().total / 2**20
        budget = Budget(STRETCH_BUDGET_SECONDS, min(STRETCH_BUDGET_MB, total_mb * 0.75))
    rows: list[VerificationRow] = []
    for d in claim.payload["degrees"]:
        _timed(rows, claim, f"vanishing-n2-stretch/d={d}", claim.payload["betti"],
               lambda d=d: _stretch_betti(spec, w, d, primes, threshold, budget))
    return rows


_SUITES = {
    "gkf-n1": _suite_gkf_n1,
    "vanishing-n1": _suite_vanishing_n1,
    "odd-weight-n1": _suite_odd_weight_n1,
    "relative-n1": _suite_relative_n1,
    "sp-small": _suite_sp_small,
    "vanishing-n2-stretch": _suite_vanishing_n2_stretch,
}


def run_verify(suite: str,
               primes: tuple[int, ...] = DEFAULT_PRIMES,
               exact_threshold: int = DEFAULT_EXACT_THRESHOLD,
               budget: Budget | None = None) -> VerificationReport:
    """Run one suite (or the 'all' alias, which excludes the stretch suite)."""
    if suite == "all":
        names: tuple[str, ...] = DEFAULT_SUITES
    elif suite in _SUITES:
        names = (suite,)
    else:
        raise ValueError(f"unknown suite {suite!r}; choose from {SUITE_NAMES + ('all',)}")
    report = VerificationReport(suite)
    for name in names:
        report.rows.extend(_SUITES[name](primes, exact_threshold, budget))
    return report
