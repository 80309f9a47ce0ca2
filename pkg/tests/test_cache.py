"""The coordinate text format and the digest-validated store."""

from __future__ import annotations

import json
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hamcoh.cache import (CacheFormatError, CacheKey, MatrixCacheStore,
                          matrix_to_text, read_matrix, write_matrix)
from hamcoh.linalg import SparseExactMatrix
from hamcoh.poisson import ORDER_VERSION


def key(degree=2, kind="absolute"):
    return CacheKey(kind, 1, 0, degree, ORDER_VERSION)


# --------------------------------------------------------------- text format

def test_rational_round_trip_is_byte_exact(tmp_path):
    m = SparseExactMatrix(3, 4, {(0, 0): Fraction(1, 2), (2, 3): Fraction(-7),
                                 (1, 1): Fraction(5, 3)})
    path = tmp_path / "m.mtx"
    write_matrix(path, m)
    got = read_matrix(path)
    assert got == m
    assert matrix_to_text(got) == path.read_text()


def test_modular_round_trip(tmp_path):
    m = SparseExactMatrix(2, 2, {(0, 1): 4, (1, 0): 1}, modulus=5)
    path = tmp_path / "m.mtx"
    write_matrix(path, m)
    got = read_matrix(path)
    assert got == m and got.modulus == 5


def test_empty_matrix_round_trip(tmp_path):
    m = SparseExactMatrix(0, 0, {})
    path = tmp_path / "empty.mtx"
    write_matrix(path, m)
    assert read_matrix(path) == m
    assert path.read_text() == "0 0 QQ\n0 0 0\n"


def test_text_layout_is_sorted_one_based():
    m = SparseExactMatrix(2, 2, {(1, 1): Fraction(1, 3), (0, 0): 2})
    assert matrix_to_text(m) == "2 2 QQ\n1 1 2\n2 2 1/3\n0 0 0\n"


def _write(tmp_path, text):
    p = tmp_path / "bad.mtx"
    p.write_text(text)
    return p


@pytest.mark.parametrize("text,line,fragment", [
    ("", 1, "empty"),
    ("2 2\n0 0 0\n", 1, "header"),
    ("2 2 GF\n0 0 0\n", 1, "QQ or a prime"),
    ("2 2 1\n0 0 0\n", 1, "< 2"),
    ("-1 2 QQ\n0 0 0\n", 1, "negative"),
    ("2 2 QQ\n1 1\n0 0 0\n", 2, "row col value"),
    ("2 2 QQ\n3 1 5\n0 0 0\n", 2, "outside"),
    ("2 2 QQ\n1 1 5\n1 1 6\n0 0 0\n", 3, "duplicate"),
    ("2 2 QQ\n1 1 0\n0 0 0\n", 2, "zero"),
    ("2 2 QQ\n1 1 1/0\n0 0 0\n", 2, "bad value"),
    ("2 2 5\n1 1 7\n0 0 0\n", 2, "outside [1,5)"),
    ("2 2 5\n1 1 2/3\n0 0 0\n", 2, "non-integer residue"),
    ("2 2 QQ\n1 1 5\n", 2, "terminator"),
    ("2 2 QQ\n1 1 5\n0 0 0\n1 2 3\n", 4, "after terminator"),
    ("2 2 QQ\n\n0 0 0\n", 2, "blank"),
])
def test_parse_errors_carry_line_numbers(tmp_path, text, line, fragment):
    path = _write(tmp_path, text)
    with pytest.raises(CacheFormatError) as exc:
        read_matrix(path)
    assert exc.value.line_no == line
    assert fragment in str(exc.value)


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 6), st.integers(1, 6), st.data())
def test_round_trip_hypothesis(rows, cols, data):
    entries = {}
    for r in range(rows):
        for c in range(cols):
            if data.draw(st.booleans()):
                num = data.draw(st.integers(-99, 99))
                den = data.draw(st.integers(1, 99))
                v = Fraction(num, den)
                if v:
                    entries[(r, c)] = v
    m = SparseExactMatrix(rows, cols, entries)
    text = matrix_to_text(m)
    lines = text.splitlines()
    assert lines[0] == f"{rows} {cols} QQ" and lines[-1] == "0 0 0"
    # parse back through a file-free equivalence: write to a temp buffer
    import tempfile
    with tempfile.NamedTemporaryFile("w", suffix=".mtx", delete=False) as f:
        f.write(text)
        name = f.name
    got = read_matrix(name)
    assert got == m
    assert matrix_to_text(got) == text


# ---------------------------------------------------------------------- store

def test_store_save_load_round_trip(tmp_path):
    store = MatrixCacheStore(tmp_path)
    m = SparseExactMatrix(2, 3, {(0, 2): Fraction(-5, 4)})
    store.save(key(), m)
    assert store.load(key()) == m


def test_store_misses_return_none(tmp_path):
    store = MatrixCacheStore(tmp_path)
    assert store.load(key()) is None


def test_store_rejects_tampered_matrix(tmp_path):
    store = MatrixCacheStore(tmp_path)
    m = SparseExactMatrix(2, 2, {(0, 0): 1})
    path = store.save(key(), m)
    path.write_text(path.read_text().replace("1 1 1", "1 1 2"))
    assert store.load(key()) is None  # digest mismatch -> recompute


def test_store_rejects_key_mismatch(tmp_path):
    store = MatrixCacheStore(tmp_path)
    m = SparseExactMatrix(1, 1, {(0, 0): 1})
    store.save(key(degree=2), m)
    # same basename contents, different requested key fields
    other = CacheKey("absolute", 1, 0, 2, "some-other-order")
    assert store.load(other) is None


def test_store_rejects_corrupt_meta(tmp_path):
    store = MatrixCacheStore(tmp_path)
    m = SparseExactMatrix(1, 1, {(0, 0): 1})
    mtx = store.save(key(), m)
    meta = mtx.with_suffix(".meta.json")
    meta.write_text("{not json")
    assert store.load(key()) is None
    meta.write_text(json.dumps({"format_version": 99}))
    assert store.load(key()) is None


def test_store_distinct_keys_distinct_files(tmp_path):
    store = MatrixCacheStore(tmp_path)
    a = SparseExactMatrix(1, 1, {(0, 0): 1})
    b = SparseExactMatrix(1, 1, {(0, 0): 2})
    store.save(key(degree=0), a)
    store.save(key(degree=1), b)
    assert store.load(key(degree=0)) == a
    assert store.load(key(degree=1)) == b
    assert store.load(CacheKey("relative", 1, 0, 0, ORDER_VERSION)) is None
