"""Province-year fleet panels and the national income/capacity series.

Two CSV schemas are read here:

* panel CSV ``province,year,vessels,tonnage,power,labor,catch``
* national CSV ``year,catch_t,capacity_t,income_yuan`` (income may be blank)

Anomalies in the source data are reported by :func:`validate_panel`, never
corrected.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from importlib import resources
from itertools import groupby
from typing import Iterable, Mapping, Sequence, TextIO

from .errors import DataError

PANEL_HEADER = ("province", "year", "vessels", "tonnage", "power", "labor", "catch")
NATIONAL_HEADER = ("year", "catch_t", "capacity_t", "income_yuan")
INPUT_FIELDS = ("vessels", "tonnage", "power", "labor")
NUMERIC_FIELDS = INPUT_FIELDS + ("catch",)

# Utilization slightly above one can come from rounding in the source rows.
UTILIZATION_EPS = 1e-3


@dataclass(frozen=True)
class FleetRecord:
    province: str
    year: int
    vessels: float
    tonnage: float
    power: float
    labor: float
    catch: float

    @property
    def inputs(self) -> tuple[float, float, float, float]:
        return (self.vessels, self.tonnage, self.power, self.labor)


@dataclass(frozen=True)
class YearPanel:
    year: int
    records: tuple[FleetRecord, ...]

    def __post_init__(self):
        for r in self.records:
            if r.year != self.year:
                raise DataError("record year differs from panel year", year=r.year, province=r.province)

    @property
    def provinces(self) -> tuple[str, ...]:
        return tuple(r.province for r in self.records)

    def get(self, province: str) -> FleetRecord:
        for r in self.records:
            if r.province == province:
                return r
        raise KeyError(province)

    def __len__(self):
        return len(self.records)


@dataclass(frozen=True)
class NationalSeries:
    """Yearly national series with the derived columns C, E, F, G, H.

    Absent values (first-year increments, years without income) are ``None``.
    """

    years: tuple[int, ...]
    catch: tuple[float, ...]  # A
    capacity: tuple[float, ...]  # B
    capacity_increment: tuple[float | None, ...]  # C
    income: tuple[float | None, ...]  # D
    income_per_capacity_ton: tuple[float | None, ...]  # E
    income_per_catch_ton: tuple[float | None, ...]  # F
    utilization: tuple[float, ...]  # G
    utilization_increment: tuple[float | None, ...]  # H
    warnings: tuple[str, ...] = field(default=())

    def index(self, year: int) -> int:
        try:
            return self.years.index(year)
        except ValueError:
            raise KeyError(year) from None

    def column(self, name: str) -> dict[int, float]:
        """Year -> value for one column, dropping absent entries."""
        values = getattr(self, name)
        return {y: v for y, v in zip(self.years, values) if v is not None}

    def rows(self) -> list[dict]:
        names = ("catch", "capacity", "capacity_increment", "income", "income_per_capacity_ton",
                 "income_per_catch_ton", "utilization", "utilization_increment")
        return [{"year": y, **{n: getattr(self, n)[i] for n in names}} for i, y in enumerate(self.years)]

    def restrict(self, years: Iterable[int]) -> "NationalSeries":
        """Re-derive the series on a consecutive subset of years."""
        keep = sorted(set(years))
        idx = [self.index(y) for y in keep]
        return derive_national_series(
            keep,
            [self.catch[i] for i in idx],
            [self.capacity[i] for i in idx],
            [self.income[i] for i in idx],
        )


@dataclass(frozen=True)
class Finding:
    year: int
    province: str
    rule: str
    detail: str

    def as_dict(self) -> dict:
        return {"year": self.year, "province": self.province, "rule": self.rule, "detail": self.detail}


# ---------------------------------------------------------------------------
# number formatting

def format_number(x: float) -> str:
    """Shortest decimal text that parses back to ``x``; integral values print without a point."""
    if math.isfinite(x) and x == int(x) and abs(x) < 1e16:
        return str(int(x))
    return repr(float(x))


def _parse_number(text: str, *, line: int, name: str) -> float:
    t = text.strip()
    if not t:
        raise DataError("missing value", line=line, field=name)
    try:
        v = float(t)
    except ValueError:
        raise DataError(f"not a number: {text!r}", line=line, field=name) from None
    if not math.isfinite(v):
        raise DataError(f"non-finite value: {text!r}", line=line, field=name)
    return v


def _parse_year(text: str, *, line: int, name: str = "year") -> int:
    try:
        return int(text.strip())
    except ValueError:
        raise DataError(f"not an integer year: {text!r}", line=line, field=name) from None


def _open_text(source) -> TextIO:
    if isinstance(source, (str, bytes)) or hasattr(source, "__fspath__"):
        return open(source, newline="", encoding="utf-8")
    return source


# ---------------------------------------------------------------------------
# panel I/O

def load_panel(source) -> list[YearPanel]:
    """Parse a panel CSV (path or text stream) into one YearPanel per year.

    Records are sorted by province within each year; years are ascending.
    """
    fh = _open_text(source)
    try:
        text = fh.read()
    finally:
        if fh is not source:
            fh.close()
    if not text.strip():
        return []

    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    if tuple(h.strip() for h in header) != PANEL_HEADER:
        raise DataError(f"unexpected header {header!r}, expected {','.join(PANEL_HEADER)}", line=1)

    records = []
    seen = {}
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(PANEL_HEADER):
            raise DataError(f"expected {len(PANEL_HEADER)} columns, got {len(row)}", line=lineno)
        province = row[0].strip()
        if not province:
            raise DataError("empty province", line=lineno, field="province")
        year = _parse_year(row[1], line=lineno)
        values = {}
        for name, text in zip(NUMERIC_FIELDS, row[2:]):
            v = _parse_number(text, line=lineno, name=name)
            if v < 0:
                raise DataError(f"negative value {text.strip()}", line=lineno, field=name,
                                year=year, province=province)
            values[name] = v
        if values["catch"] > 0 and not any(values[f] > 0 for f in INPUT_FIELDS):
            raise DataError("positive catch with all inputs zero", line=lineno, year=year, province=province)
        key = (province, year)
        if key in seen:
            raise DataError(f"duplicate (province, year), first seen on line {seen[key]}",
                            line=lineno, year=year, province=province)
        seen[key] = lineno
        records.append(FleetRecord(province=province, year=year, **values))

    records.sort(key=lambda r: (r.year, r.province))
    return [YearPanel(year, tuple(rs)) for year, rs in groupby(records, key=lambda r: r.year)]


def dump_panel(panels: Sequence[YearPanel], out: TextIO | None = None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(PANEL_HEADER)
    for panel in panels:
        for r in panel.records:
            w.writerow([r.province, r.year] + [format_number(getattr(r, f)) for f in NUMERIC_FIELDS])
    text = buf.getvalue()
    if out is not None:
        out.write(text)
    return text


def load_national(source) -> NationalSeries:
    """Read the national CSV and derive the full series."""
    fh = _open_text(source)
    try:
        rows = list(csv.reader(fh))
    finally:
        if fh is not source:
            fh.close()
    if not rows:
        raise DataError("empty national series")
    if tuple(h.strip() for h in rows[0]) != NATIONAL_HEADER:
        raise DataError(f"unexpected header {rows[0]!r}, expected {','.join(NATIONAL_HEADER)}", line=1)
    years, catch, capacity, income = [], [], [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(NATIONAL_HEADER):
            raise DataError(f"expected {len(NATIONAL_HEADER)} columns, got {len(row)}", line=lineno)
        years.append(_parse_year(row[0], line=lineno))
        catch.append(_parse_number(row[1], line=lineno, name="catch_t"))
        capacity.append(_parse_number(row[2], line=lineno, name="capacity_t"))
        income.append(_parse_number(row[3], line=lineno, name="income_yuan") if row[3].strip() else None)
    return derive_national_series(years, catch, capacity, income)


def bundled(name: str):
    """Path-like handle to a bundled fixture (``panel``, ``national`` or ``appendix``)."""
    files = {
        "panel": "panel_1993_2005.csv",
        "national": "national_1993_2005.csv",
        "appendix": "appendix_dea.csv",
    }
    return resources.files("fleetcap") / "data" / files[name]


def load_bundled_panel() -> list[YearPanel]:
    with bundled("panel").open("r", encoding="utf-8", newline="") as fh:
        return load_panel(fh)


def load_bundled_national() -> NationalSeries:
    with bundled("national").open("r", encoding="utf-8", newline="") as fh:
        return load_national(fh)


def load_reference(source=None) -> dict[tuple[int, str], tuple[float, float]]:
    """Published per-province DEA results: (year, province) -> (utilization, capacity output)."""
    if source is None:
        fh = bundled("appendix").open("r", encoding="utf-8", newline="")
    else:
        fh = _open_text(source)
    try:
        out = {}
        for row in csv.DictReader(fh):
            out[(int(row["year"]), row["province"])] = (
                float(row["capacity_utilization"]), float(row["capacity_output_t"]))
        return out
    finally:
        if fh is not source:
            fh.close()


# ---------------------------------------------------------------------------
# derived national series

def derive_national_series(years: Sequence[int], catch: Sequence[float], capacity: Sequence[float],
                           income: Sequence[float | None]) -> NationalSeries:
    """Compute increments, per-ton incomes and utilization from catch A, capacity B and income D."""
    n = len(years)
    if not (len(catch) == len(capacity) == len(income) == n):
        raise DataError("national columns have different lengths")
    years = [int(y) for y in years]
    for prev, cur in zip(years, years[1:]):
        if cur != prev + 1:
            raise DataError(f"years not consecutive: {prev} then {cur}", year=cur)
    for y, a, b in zip(years, catch, capacity):
        if b <= 0:
            raise DataError("capacity must be positive", year=y, field="capacity_t")
        if a <= 0:
            raise DataError("catch must be positive", year=y, field="catch_t")

    util = [a / b for a, b in zip(catch, capacity)]
    warnings = tuple(f"{y}: utilization {g:.4f} exceeds 1" for y, g in zip(years, util) if g > 1 + UTILIZATION_EPS)
    inc_cap = [None] + [capacity[i] - capacity[i - 1] for i in range(1, n)]
    inc_util = [None] + [util[i] - util[i - 1] for i in range(1, n)]
    e = [None if d is None else d / b for d, b in zip(income, capacity)]
    f = [None if d is None else d / a for d, a in zip(income, catch)]
    return NationalSeries(
        years=tuple(years),
        catch=tuple(float(a) for a in catch),
        capacity=tuple(float(b) for b in capacity),
        capacity_increment=tuple(inc_cap[:n]) if n else (),
        income=tuple(None if d is None else float(d) for d in income),
        income_per_capacity_ton=tuple(e),
        income_per_catch_ton=tuple(f),
        utilization=tuple(util),
        utilization_increment=tuple(inc_util[:n]) if n else (),
        warnings=warnings,
    )


# ---------------------------------------------------------------------------
# validation

def validate_panel(panels: Sequence[YearPanel],
                   reference: Mapping[tuple[int, str], tuple[float, float]] | None = None,
                   jump_factor: float = 5.0, tolerance: float = 0.01) -> list[Finding]:
    """Report data-quality findings without touching the data.

    Rules:
      ``cu_inconsistent``  published utilization x capacity output differs from
                           the recorded catch by more than ``tolerance`` (needs ``reference``)
      ``scale_jump``       a field changes by more than ``jump_factor`` between
                           consecutive years for one province
    """
    findings = []
    if reference:
        for panel in panels:
            for r in panel.records:
                ref = reference.get((panel.year, r.province))
                if ref is None:
                    continue
                cu, cap = ref
                implied = cu * cap
                if r.catch > 0 and abs(implied - r.catch) > tolerance * r.catch:
                    findings.append(Finding(panel.year, r.province, "cu_inconsistent",
                                            f"utilization {format_number(cu)} x capacity {format_number(cap)} = "
                                            f"{implied:.0f} vs catch {format_number(r.catch)}"))

    by_year = {p.year: p for p in panels}
    for year in sorted(by_year):
        prev = by_year.get(year - 1)
        if prev is None:
            continue
        for r in by_year[year].records:
            try:
                q = prev.get(r.province)
            except KeyError:
                continue
            for name in NUMERIC_FIELDS:
                a, b = getattr(q, name), getattr(r, name)
                if a <= 0 or b <= 0:
                    continue
                ratio = max(a / b, b / a)
                if ratio > jump_factor:
                    findings.append(Finding(year, r.province, "scale_jump",
                                            f"{name} {format_number(a)} -> {format_number(b)} ({ratio:.1f}x)"))
    findings.sort(key=lambda f: (f.year, f.province, f.rule, f.detail))
    return findings


def format_findings(findings: Sequence[Finding], fmt: str = "text") -> str:
    if fmt == "json":
        return "".join(json.dumps(f.as_dict(), sort_keys=True) + "\n" for f in findings)
    return "".join(f"{f.year}\t{f.province}\t{f.rule}\t{f.detail}\n" for f in findings)
