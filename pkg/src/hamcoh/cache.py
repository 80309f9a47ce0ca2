"""Line-oriented text cache for exact sparse matrices.

File format (1-based indices, human-inspectable):

    rows cols field          field is "QQ" or a prime modulus
    row col value            one line per nonzero; value is num or num/den
    0 0 0                    terminator

Entries are written in (row, col) order so a round trip is byte-exact.
A sidecar .meta.json records the cache key (n, degree, weight, kind,
monomial order version) and the sha256 of the matrix file; a hit is only
served when both match, so stale or corrupt caches are recomputed, never
trusted.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass
from fractions import Fraction
from pathlib import Path

from .linalg import SparseExactMatrix

CACHE_ENV_VAR = "HAMCOH_CACHE_DIR"
_FORMAT_VERSION = 1


class CacheFormatError(ValueError):
    def __init__(self, path, line_no: int, message: str):
        self.path = str(path)
        self.line_no = line_no
        super().__init__(f"{path}:{line_no}: {message}")


def _format_value(v: Fraction | int) -> str:
    f = Fraction(v)
    return str(f.numerator) if f.denominator == 1 else f"{f.numerator}/{f.denominator}"


def matrix_to_text(m: SparseExactMatrix) -> str:
    field = "QQ" if m.modulus is None else str(m.modulus)
    lines = [f"{m.rows} {m.cols} {field}"]
    for (r, c) in sorted(m.entries):
        v = m.entries[(r, c)]
        val = _format_value(v) if m.modulus is None else str(v)
        lines.append(f"{r + 1} {c + 1} {val}")
    lines.append("0 0 0")
    return "\n".join(lines) + "\n"


def write_matrix(path: str | Path, m: SparseExactMatrix) -> None:
    Path(path).write_text(matrix_to_text(m))


def _parse_value(tok: str, path, line_no: int) -> Fraction:
    try:
        if "/" in tok:
            num, den = tok.split("/", 1)
            return Fraction(int(num), int(den))
        return Fraction(int(tok))
    except (ValueError, ZeroDivisionError) as e:
        raise CacheFormatError(path, line_no, f"bad value {tok!r}: {e}") from None


def read_matrix(path: str | Path) -> SparseExactMatrix:
    path = Path(path)
    lines = path.read_text().splitlines()
    if not lines:
        raise CacheFormatError(path, 1, "empty file")
    header = lines[0].split()
    if len(header) != 3:
        raise CacheFormatError(path, 1, f"header needs 'rows cols field', got {lines[0]!r}")
    try:
        rows, cols = int(header[0]), int(header[1])
    except ValueError:
        raise CacheFormatError(path, 1, f"non-integer dimensions in {lines[0]!r}") from None
    if rows < 0 or cols < 0:
        raise CacheFormatError(path, 1, "negative dimensions")
    if header[2] == "QQ":
        modulus = None
    else:
        try:
            modulus = int(header[2])
        except ValueError:
            raise CacheFormatError(path, 1, f"field must be QQ or a prime, got {header[2]!r}") from None
        if modulus < 2:
            raise CacheFormatError(path, 1, f"modulus {modulus} < 2")
    entries: dict[tuple[int, int], Fraction | int] = {}
    terminated = False
    for i, line in enumerate(lines[1:], start=2):
        if not line.strip():
            raise CacheFormatError(path, i, "blank line inside matrix body")
        toks = line.split()
        if len(toks) != 3:
            raise CacheFormatError(path, i, f"entry needs 'row col value', got {line!r}")
        if toks == ["0", "0", "0"]:
            terminated = True
            if i != len(lines):
                raise CacheFormatError(path, i + 1, "content after terminator")
            break
        try:
            r, c = int(toks[0]), int(toks[1])
        except ValueError:
            raise CacheFormatError(path, i, f"non-integer indices in {line!r}") from None
        if not (1 <= r <= rows and 1 <= c <= cols):
            raise CacheFormatError(path, i, f"index ({r},{c}) outside {rows}x{cols}")
        key = (r - 1, c - 1)
        if key in entries:
            raise CacheFormatError(path, i, f"duplicate entry at ({r},{c})")
        if modulus is None:
            v: Fraction | int = _parse_value(toks[2], path, i)
            if v == 0:
                raise CacheFormatError(path, i, "explicit zero entry")
        else:
            try:
                v = int(toks[2])
            except ValueError:
                raise CacheFormatError(path, i, f"non-integer residue {toks[2]!r}") from None
            if not 0 < v < modulus:
                raise CacheFormatError(path, i, f"residue {v} outside [1,{modulus})")
        entries[key] = v
    if not terminated:
        raise CacheFormatError(path, len(lines), "missing '0 0 0' terminator")
    return SparseExactMatrix(rows, cols, entries, modulus)


@dataclass(frozen=True)
class CacheKey:
    kind: str
    n: int
    weight: int
    degree: int
    order_version: str

    @property
    def basename(self) -> str:
        return f"{self.kind}_n{self.n}_w{self.weight}_d{self.degree}"


class MatrixCacheStore:
    """Digest-validated matrix cache rooted at one directory."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def _paths(self, key: CacheKey) -> tuple[Path, Path]:
        base = self.root / key.basename
        return base.with_suffix(".mtx"), base.with_suffix(".meta.json")

    def save(self, key: CacheKey, m: SparseExactMatrix) -> Path:
        mtx_path, meta_path = self._paths(key)
        text = matrix_to_text(m)
        digest = hashlib.sha256(text.encode()).hexdigest()
        mtx_path.write_text(text)
        meta = {"format_version": _FORMAT_VERSION, "key": asdict(key), "sha256": digest}
        meta_path.write_text(json.dumps(meta, indent=1, sort_keys=True) + "\n")
        return mtx_path

    def load(self, key: CacheKey) -> SparseExactMatrix | None:
        """The cached matrix, or None whenever anything fails validation."""
        mtx_path, meta_path = self._paths(key)
        if not (mtx_path.exists() and meta_path.exists()):
            return None
        try:
            meta = json.loads(meta_path.read_text())
        except (ValueError, OSError):
            return None
        if meta.get("format_version") != _FORMAT_VERSION or meta.get("key") != asdict(key):
            return None
        text = mtx_path.read_text()
        if hashlib.sha256(text.encode()).hexdigest() != meta.get("sha256"):
            return None
        try:
            return read_matrix(mtx_path)
        except CacheFormatError:
            return None
