from fractions import Fraction

import pytest

from cuemoments import tables
from cuemoments.errors import InputError


def test_embedded_table_shape():
    entries = tables.load_table()
    assert len(entries) == 30
    assert {(e.name, e.k) for e in entries} == {(n, k) for n in tables.NAMES for k in range(1, 16)}
    first = {(e.name, e.k): e for e in entries}
    assert first["b", 1].value == Fraction(1, 3)
    assert first["bprime", 2].text == "1/(2^6·3·5·7)"


def test_small_rows_match():
    rows = tables.check_table(tables.load_table(), 4)
    assert len(rows) == 8 and all(r.ok for r in rows)


def test_errata_only_touches_b12():
    fixes = tables.load_errata()
    assert set(fixes) == {("b", 12)}
    printed = {(e.name, e.k): e for e in tables.load_table()}["b", 12]
    assert fixes["b", 12].value == 3617 * printed.value


def test_denominator_layout_is_checked():
    e = tables.TableEntry("b", 2, "61/(2^5·9·5·7)")  # right value, 9 is not prime
    assert e.value == tables.compute("b", 2)
    assert tables.compare_entry(e, tables.compute("b", 2)) == ["denominator factorization differs"]


def test_value_mismatch_reports_ratio():
    e = tables.TableEntry("bprime", 1, "1/(2^3·3)")
    problems = tables.compare_entry(e, tables.compute("bprime", 1))
    assert problems and "computed/printed = 2" in problems[0]


def test_parse_errors(tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_text("b 1 1/(3)\nc 2 7\n")
    with pytest.raises(InputError, match="bad.txt:2"):
        tables.load_table(bad)
