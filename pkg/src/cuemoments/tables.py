"""Reference tables of b_k and b_k' and the exact comparison against them."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
from pathlib import Path

from .errors import InputError
from .exactnum import factor_rational, parse_factored, parse_factored_parts
from .moments_det import bk_det, bkprime_det

NAMES = ("b", "bprime")


@dataclass(frozen=True)
class TableEntry:
    name: str
    k: int
    text: str

    @property
    def value(self) -> Fraction:
        return parse_factored(self.text)


def parse_table(text: str, source: str = "<table>") -> list[TableEntry]:
    out = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 3 or parts[0] not in NAMES:
            raise InputError(f"{source}:{lineno}: expected '<b|bprime> <k> <value>'")
        try:
            entry = TableEntry(parts[0], int(parts[1]), parts[2])
            entry.value
        except (ValueError, InputError) as exc:
            raise InputError(f"{source}:{lineno}: {exc}") from None
        out.append(entry)
    return out


def _data(name: str) -> str:
    return resources.files("cuemoments").joinpath("data").joinpath(name).read_text(encoding="utf-8")


def load_table(path: str | Path | None = None) -> list[TableEntry]:
    """The embedded table, or an expectation file with the same layout."""
    if path is None:
        return parse_table(_data("reference_tables.txt"), "reference_tables.txt")
    return parse_table(Path(path).read_text(encoding="utf-8"), str(path))


def load_errata() -> dict[tuple[str, int], TableEntry]:
    return {(e.name, e.k): e for e in parse_table(_data("errata.txt"), "errata.txt")}


def apply_errata(entries: list[TableEntry]) -> list[TableEntry]:
    fixes = load_errata()
    return [fixes.get((e.name, e.k), e) for e in entries]


def compute(name: str, k: int) -> Fraction:
    return bk_det(k) if name == "b" else bkprime_det(k)


def _prime_powers(q: Fraction) -> tuple[Counter, Counter]:
    f = factor_rational(q)
    num = Counter(dict(f.numerator_factors))
    den = Counter(dict(f.denominator_factors))
    if f.residual_numerator != 1:
        num[f.residual_numerator] += 1
    if f.residual_denominator != 1:
        den[f.residual_denominator] += 1
    return num, den


def compare_entry(entry: TableEntry, computed: Fraction) -> list[str]:
    """Differences between a table entry and the computed value (empty if none).

    Besides exact equality of the values, the denominator as written must
    be the prime-power factorization of the computed denominator.
    """
    problems = []
    expected = entry.value
    if expected != computed:
        q = computed / expected if expected else None
        hint = f" (computed/printed = {q})" if q is not None else ""
        problems.append(f"value differs{hint}")
    _, _, den = parse_factored_parts(entry.text)
    written = Counter()
    for p, e in den:
        written[p] += e
    if written != _prime_powers(computed)[1]:
        problems.append("denominator factorization differs")
    return problems


@dataclass(frozen=True)
class CheckRow:
    name: str
    k: int
    expected: str
    computed: Fraction
    problems: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.problems


def check_table(entries: list[TableEntry], kmax: int) -> list[CheckRow]:
    rows = []
    for e in sorted(entries, key=lambda e: (NAMES.index(e.name), e.k)):
        if e.k > kmax:
            continue
        got = compute(e.name, e.k)
        rows.append(CheckRow(e.name, e.k, e.text, got, tuple(compare_entry(e, got))))
    return rows
