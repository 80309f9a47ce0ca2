"""Command-line front end: Betti tables, verification suites, cache tools.

Three subcommands:

    compute   one Betti table (or several, one per weight) as JSON or CSV
    verify    a named verification suite, reported as text or JSON
    cache     inspect or validate a matrix cache directory

Exit codes: 0 success (verification "incomplete" counts as success: skipped
is not failed), 1 verification failure, 2 usage error, 3 result could not be
certified (rank disagreement across primes, or the exact fallback threshold
was exceeded).

Output is byte-identical across runs and thread budgets for identical
requests: timing fields serialize as null unless --timing is given, JSON key
order is fixed, and all assembly is deterministic.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path
from time import perf_counter

from ._version import __version__
from .cache import CACHE_ENV_VAR, CacheFormatError, MatrixCacheStore, read_matrix
from .engine import (BettiTable, betti_table, betti_table_relative,
                     max_support_degree, sp_cohomology)
from .linalg import (DEFAULT_EXACT_THRESHOLD, DEFAULT_PRIMES, RESERVE_PRIME,
                     ThresholdExceeded)
from .model import anomaly_target, model_max_degree, predicted_betti
from .poisson import AlgebraSpec
from .verify import SUITE_NAMES, Budget, run_verify

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_USAGE = 2
EXIT_UNCERTIFIED = 3

MODES = ("absolute", "relative", "sp", "model", "anomaly-check")

_CERT_HINT = (f"hint: add the reserve prime {RESERVE_PRIME} via --primes, "
              "or raise --exact-threshold")


class UsageError(ValueError):
    pass


def _parse_int_list(s: str, what: str) -> tuple[int, ...]:
    try:
        vals = tuple(int(tok) for tok in s.split(",") if tok.strip())
    except ValueError:
        raise UsageError(f"bad {what} list {s!r}: expected comma-separated integers") from None
    if not vals:
        raise UsageError(f"empty {what} list")
    return vals


def _parse_degrees(s: str) -> tuple[int, int]:
    """'A..B' -> (A, B); a bare integer B means (0, B)."""
    try:
        if ".." in s:
            a, b = s.split("..", 1)
            lo, hi = int(a), int(b)
        else:
            lo, hi = 0, int(s)
    except ValueError:
        raise UsageError(f"bad degree range {s!r}: expected 'A..B' or a single integer") from None
    if lo < 0 or hi < lo:
        raise UsageError(f"degree range must satisfy 0 <= A <= B, got {s!r}")
    return lo, hi


@dataclass
class ComputeRequest:
    """One validated `compute` invocation, weights in the internal convention."""
    n: int
    mode: str = "absolute"
    weights: tuple[int, ...] | None = None
    degrees: tuple[int, int] | None = None
    reduced: bool = True
    primes: tuple[int, ...] = DEFAULT_PRIMES
    exact_threshold: int = DEFAULT_EXACT_THRESHOLD
    threads: int = 1
    cache_dir: str | None = None
    fmt: str = "json"
    gkf_weights: bool = False
    timing: bool = False
    m: int | None = None

    def validate(self) -> None:
        if self.n < 1:
            raise UsageError("--n must be >= 1")
        if self.mode not in MODES:
            raise UsageError(f"--mode must be one of {MODES}")
        if self.threads < 1:
            raise UsageError("--threads must be >= 1")
        if self.exact_threshold < 0:
            raise UsageError("--exact-threshold must be >= 0")
        if len(set(self.primes)) < 2 or any(p < 2 for p in self.primes):
            raise UsageError("--primes needs at least 2 distinct primes >= 2")
        needs_weight = self.mode in ("absolute", "relative", "model")
        if needs_weight and not self.weights:
            raise UsageError(f"mode {self.mode!r} requires --weight")
        if not needs_weight and self.weights:
            raise UsageError(f"mode {self.mode!r} does not take --weight")
        if not needs_weight and self.gkf_weights:
            raise UsageError(f"mode {self.mode!r} does not take --gkf-weights")
        if self.mode == "model" and any(w > 0 for w in self.weights):
            raise UsageError("model mode covers non-positive weights only")
        if self.mode == "anomaly-check":
            if self.m is None or self.m < 0:
                raise UsageError("mode 'anomaly-check' requires --m >= 0")
            if self.degrees is not None:
                raise UsageError("mode 'anomaly-check' does not take --degrees")
            if self.fmt != "json":
                raise UsageError("mode 'anomaly-check' emits JSON only")
        elif self.m is not None:
            raise UsageError("--m applies to mode 'anomaly-check' only")


def _out_weight(req: ComputeRequest, w: int) -> int:
    # With --gkf-weights both the inputs and the report use the halved
    # convention; internal weights are the doubles, so this is exact.
    return w // 2 if req.gkf_weights else w


def _default_degree_hi(req: ComputeRequest, spec: AlgebraSpec, w: int) -> int:
    if req.mode == "model":
        return max(0, model_max_degree(req.n, w))
    return max_support_degree(spec, w)


def _table_payload(req: ComputeRequest, t: BettiTable, w_out: int,
                   lo: int, hi: int, seconds: float) -> dict:
    d = t.to_dict(round(seconds, 3) if req.timing else None)
    d["weight"] = w_out
    d["rows"] = [r for r in d["rows"] if lo <= r["d"] <= hi]
    return d


def _csv_text(payloads: list[dict], sp_mode: bool) -> str:
    lines = ["weight,d,dim,rank_out,rank_in,betti,certified"]
    for d in payloads:
        w = "" if sp_mode else str(d["weight"])
        for r in d["rows"]:
            cells = [w, str(r["d"]), str(r["dim"])] + [
                "" if r[k] is None else str(r[k]) for k in ("rank_out", "rank_in", "betti")
            ] + ["true" if r["certified"] else "false"]
            lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def run_compute(req: ComputeRequest) -> tuple[str, int]:
    """(output text, exit code) for one compute request."""
    req.validate()
    spec = AlgebraSpec(req.n)
    cache_store = MatrixCacheStore(req.cache_dir) if req.cache_dir else None

    if req.mode == "anomaly-check":
        degree, w = anomaly_target(req.n, req.m)
        t0 = perf_counter()
        table = betti_table(spec, w, degree, reduced=True, primes=req.primes,
                            exact_threshold=req.exact_threshold, threads=req.threads,
                            cache_store=cache_store)
        seconds = perf_counter() - t0
        row = next(r for r in table.rows if r.degree == degree)
        payload = {
            "n": req.n,
            "m": req.m,
            "degree": degree,
            "weight": w,
            "dim": row.dim,
            "betti": row.betti,
            "certified": row.certified,
            "obstruction_space_vanishes": (row.betti == 0) if row.certified else None,
            "tool_version": __version__,
            "timing": round(seconds, 3) if req.timing else None,
        }
        code = EXIT_OK if row.certified else EXIT_UNCERTIFIED
        return json.dumps(payload, indent=2) + "\n", code

    payloads: list[dict] = []
    if req.mode == "sp":
        lo, hi = req.degrees if req.degrees else (0, spec.num_vars * (spec.num_vars + 1) // 2)
        t0 = perf_counter()
        table = sp_cohomology(spec, req.primes, req.exact_threshold, req.threads)
        payloads.append(_table_payload(req, table, 0, lo, hi, perf_counter() - t0))
    else:
        for w in req.weights:
            lo, hi = req.degrees if req.degrees else (0, _default_degree_hi(req, spec, w))
            t0 = perf_counter()
            if req.mode == "absolute":
                table = betti_table(spec, w, hi, reduced=req.reduced, primes=req.primes,
                                    exact_threshold=req.exact_threshold,
                                    threads=req.threads, cache_store=cache_store)
            elif req.mode == "relative":
                table = betti_table_relative(spec, w, hi, reduced=req.reduced,
                                             primes=req.primes,
                                             exact_threshold=req.exact_threshold,
                                             threads=req.threads)
            else:
                table = predicted_betti(req.n, w, hi, reduced=req.reduced,
                                        primes=req.primes,
                                        exact_threshold=req.exact_threshold)
            payloads.append(_table_payload(req, table, _out_weight(req, w), lo, hi,
                                           perf_counter() - t0))

    uncertified = any(not r["certified"] for d in payloads for r in d["rows"])
    if req.fmt == "csv":
        text = _csv_text(payloads, req.mode == "sp")
    else:
        obj = payloads[0] if len(payloads) == 1 else payloads
        text = json.dumps(obj, indent=2) + "\n"
    return text, EXIT_UNCERTIFIED if uncertified else EXIT_OK


def _request_from_args(args: argparse.Namespace) -> ComputeRequest:
    weights = _parse_int_list(args.weights, "weight") if args.weights else None
    if weights and args.gkf_weights:
        weights = tuple(2 * w for w in weights)
    return ComputeRequest(
        n=args.n,
        mode=args.mode,
        weights=weights,
        degrees=_parse_degrees(args.degrees) if args.degrees else None,
        reduced=args.reduced,
        primes=_parse_int_list(args.primes, "prime") if args.primes else DEFAULT_PRIMES,
        exact_threshold=args.exact_threshold,
        threads=args.threads,
        cache_dir=args.cache_dir,
        fmt=args.fmt,
        gkf_weights=args.gkf_weights,
        timing=args.timing,
        m=args.m,
    )


def _cmd_verify(args: argparse.Namespace) -> tuple[str, int]:
    primes = _parse_int_list(args.primes, "prime") if args.primes else DEFAULT_PRIMES
    budget = None
    if args.budget_seconds is not None or args.budget_mb is not None:
        budget = Budget(args.budget_seconds, args.budget_mb)
    report = run_verify(args.suite, primes=primes,
                        exact_threshold=args.exact_threshold, budget=budget)
    if args.fmt == "json":
        text = json.dumps(report.to_dict(show_timing=args.timing), indent=2) + "\n"
    else:
        text = report.format_text(show_timing=args.timing)
    return text, EXIT_VERIFY_FAILED if report.overall == "fail" else EXIT_OK


def _resolve_cache_dir(flag_value: str | None) -> Path:
    import os
    root = flag_value or os.environ.get(CACHE_ENV_VAR)
    if not root:
        raise UsageError(f"no cache directory: pass --cache-dir or set {CACHE_ENV_VAR}")
    return Path(root)


def _cmd_cache(args: argparse.Namespace) -> tuple[str, int]:
    root = _resolve_cache_dir(args.cache_dir)
    if args.action == "info":
        files = sorted(root.glob("*.mtx")) if root.is_dir() else []
        payload = {
            "root": str(root),
            "exists": root.is_dir(),
            "matrices": len(files),
            "total_bytes": sum(f.stat().st_size for f in files),
            "tool_version": __version__,
        }
        return json.dumps(payload, indent=2) + "\n", EXIT_OK

    # action == "check": re-parse every matrix and confirm its digest sidecar.
    import hashlib
    if not root.is_dir():
        return f"no cache directory at {root}\n", EXIT_VERIFY_FAILED
    lines = []
    all_ok = True
    for mtx in sorted(root.glob("*.mtx")):
        meta_path = mtx.with_suffix(".meta.json")
        status = "OK"
        detail = ""
        try:
            read_matrix(mtx)
        except CacheFormatError as e:
            status, detail = "CORRUPT", str(e)
        if status == "OK":
            if not meta_path.exists():
                status, detail = "UNVERIFIED", "missing meta sidecar"
            else:
                try:
                    meta = json.loads(meta_path.read_text())
                except ValueError as e:
                    meta, status, detail = None, "CORRUPT", f"bad meta sidecar: {e}"
                if meta is not None:
                    digest = hashlib.sha256(mtx.read_text().encode()).hexdigest()
                    if meta.get("sha256") != digest:
                        status, detail = "STALE", "digest mismatch"
        if status != "OK":
            all_ok = False
        lines.append(f"{status:10s} {mtx.name}" + (f"  ({detail})" if detail else ""))
    if not lines:
        lines.append("cache is empty")
    return "\n".join(lines) + "\n", EXIT_OK if all_ok else EXIT_VERIFY_FAILED


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="hamcoh",
        description="Exact weight-graded Lie algebra cohomology of formal "
                    "Hamiltonian vector fields.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    c = sub.add_parser("compute", help="compute a Betti table")
    c.add_argument("--n", type=int, required=True, help="number of (p, q) pairs")
    c.add_argument("--mode", choices=MODES, default="absolute")
    c.add_argument("--weight", "--weights", dest="weights", metavar="W[,W...]",
                   default=None, help="weight sector(s), comma-separated")
    c.add_argument("--degrees", metavar="A..B", default=None,
                   help="degree range to report (default: the full finite sector)")
    red = c.add_mutually_exclusive_group()
    red.add_argument("--reduced", dest="reduced", action="store_true", default=True,
                     help="drop the degree-0 constants line (default)")
    red.add_argument("--unreduced", dest="reduced", action="store_false")
    c.add_argument("--primes", metavar="P[,P...]", default=None,
                   help=f"certification primes (default {','.join(map(str, DEFAULT_PRIMES))})")
    c.add_argument("--exact-threshold", type=int, default=DEFAULT_EXACT_THRESHOLD,
                   help="max dimension for the exact rational cross-check")
    c.add_argument("--threads", type=int, default=1, help="rank-worker pool size")
    c.add_argument("--cache-dir", default=None,
                   help=f"matrix cache directory (default ${CACHE_ENV_VAR}, else no cache)")
    c.add_argument("--format", dest="fmt", choices=("json", "csv"), default="json")
    c.add_argument("--gkf-weights", action="store_true",
                   help="read and report weights in the halved convention")
    c.add_argument("--timing", action="store_true",
                   help="include wall-clock seconds (off by default so output "
                        "is byte-identical across runs)")
    c.add_argument("--m", type=int, default=None,
                   help="obstruction index for mode anomaly-check")
    c.add_argument("--output", default=None, help="write to this file instead of stdout")

    v = sub.add_parser("verify", help="run a verification suite")
    v.add_argument("suite", choices=SUITE_NAMES + ("all",))
    v.add_argument("--primes", metavar="P[,P...]", default=None)
    v.add_argument("--exact-threshold", type=int, default=DEFAULT_EXACT_THRESHOLD)
    v.add_argument("--budget-seconds", type=float, default=None,
                   help="wall-clock budget; exhausted rows are skipped, not failed")
    v.add_argument("--budget-mb", type=float, default=None,
                   help="resident-memory budget in MB")
    v.add_argument("--format", dest="fmt", choices=("text", "json"), default="text")
    v.add_argument("--timing", action="store_true")
    v.add_argument("--output", default=None, help="write to this file instead of stdout")

    k = sub.add_parser("cache", help="inspect or validate a matrix cache")
    k.add_argument("action", choices=("info", "check"))
    k.add_argument("--cache-dir", default=None,
                   help=f"cache directory (default ${CACHE_ENV_VAR})")
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "compute":
            import os
            if args.cache_dir is None:
                args.cache_dir = os.environ.get(CACHE_ENV_VAR)
            text, code = run_compute(_request_from_args(args))
        elif args.command == "verify":
            text, code = _cmd_verify(args)
        else:
            text, code = _cmd_cache(args)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except ThresholdExceeded as e:
        print(f"error: {e}\n{_CERT_HINT}", file=sys.stderr)
        return EXIT_UNCERTIFIED

    output = getattr(args, "output", None)
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)
    if code == EXIT_UNCERTIFIED:
        print(f"warning: uncertified rows present\n{_CERT_HINT}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
