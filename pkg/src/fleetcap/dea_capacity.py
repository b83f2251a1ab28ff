"""Output-oriented, constant-returns DEA capacity measurement.

For a target province k in one year the envelopment program is

    max phi
    s.t. sum_j lam_j * x_ij <= x_ik      for each of the four inputs i
         sum_j lam_j * y_j  >= phi * y_k
         lam >= 0

with peers j ranging over every province of the same year, k included.
Capacity utilization is 1/phi and capacity output is phi * catch.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

from .errors import DataError, NumericalError
from .lp_solver import Constraint, LinearProgram, solve
from .panel_data import INPUT_FIELDS, YearPanel


@dataclass(frozen=True)
class DeaResult:
    province: str
    year: int
    phi: float
    lambdas: dict[str, float]
    catch: float

    @property
    def capacity_utilization(self) -> float:
        return 1.0 / self.phi

    @property
    def capacity_output(self) -> float:
        return self.phi * self.catch


@dataclass(frozen=True)
class YearCapacityTable:
    year: int
    results: tuple[DeaResult, ...]

    @property
    def national_capacity(self) -> float:
        return sum(r.capacity_output for r in self.results)

    @property
    def national_catch(self) -> float:
        return sum(r.catch for r in self.results)

    @property
    def national_utilization(self) -> float:
        return self.national_catch / self.national_capacity

    def get(self, province: str) -> DeaResult:
        for r in self.results:
            if r.province == province:
                return r
        raise KeyError(province)


def envelopment_program(panel: YearPanel, target: str) -> LinearProgram:
    """The LP solved for ``target``; variables are ``[phi, lam_1, ..., lam_n]``."""
    tgt = panel.get(target)
    n = len(panel.records)
    cons = []
    for name in INPUT_FIELDS:
        row = (0.0,) + tuple(getattr(r, name) for r in panel.records)
        cons.append(Constraint(row, "<=", getattr(tgt, name)))
    cons.append(Constraint((tgt.catch,) + tuple(-r.catch for r in panel.records), "<=", 0.0))
    return LinearProgram((1.0,) + (0.0,) * n, tuple(cons))


def measure_dmu(panel: YearPanel, target: str) -> DeaResult:
    try:
        tgt = panel.get(target)
    except KeyError:
        raise DataError("target not in panel", year=panel.year, province=target) from None
    if tgt.catch <= 0:
        raise DataError("catch must be positive to measure utilization", year=panel.year,
                        province=target, field="catch")
    sol = solve(envelopment_program(panel, target))
    if not sol.ok:
        # phi = 1 with lam = e_k is always feasible, so anything else is a solver fault
        raise NumericalError(f"DEA LP for {target} {panel.year} ended {sol.status}: {sol.message}")
    phi = float(sol.primal[0])
    lambdas = {r.province: float(v) for r, v in zip(panel.records, sol.primal[1:]) if v > 0.0}
    return DeaResult(province=target, year=panel.year, phi=max(phi, 1.0), lambdas=lambdas, catch=tgt.catch)


def measure_year(panel: YearPanel, workers: int | None = None) -> YearCapacityTable:
    """Measure every province in ``panel`` against the same-year frontier."""

    def one(province):
        try:
            return measure_dmu(panel, province)
        except NumericalError as exc:
            raise NumericalError(f"{panel.year} {province}: {exc}") from exc

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = tuple(pool.map(one, panel.provinces))
    else:
        results = tuple(one(p) for p in panel.provinces)
    return YearCapacityTable(panel.year, results)


def measure_all(panels: Sequence[YearPanel]) -> list[YearCapacityTable]:
    return [measure_year(p) for p in panels]


def capacity_series(tables: Sequence[YearCapacityTable]) -> list[dict]:
    """Ordered yearly national catch, capacity and utilization."""
    if not tables:
        raise DataError("capacity series needs at least one year")
    return [
        {"year": t.year, "catch_t": t.national_catch, "capacity_t": t.national_capacity,
         "utilization": t.national_utilization}
        for t in sorted(tables, key=lambda t: t.year)
    ]


def format_ratio(x: float) -> str:
    return f"{x:.6g}"


def table_rows(tables: Sequence[YearCapacityTable]) -> list[list[str]]:
    """Rows for the ``year,province,phi,capacity_utilization,capacity_output_t`` table."""
    rows = []
    for t in tables:
        for r in t.results:
            rows.append([str(t.year), r.province, format_ratio(r.phi), format_ratio(r.capacity_utilization),
                         f"{r.capacity_output:.0f}"])
        rows.append([str(t.year), "NATIONAL", format_ratio(t.national_capacity / t.national_catch),
                     format_ratio(t.national_utilization), f"{t.national_capacity:.0f}"])
    return rows


def lambda_rows(tables: Sequence[YearCapacityTable]) -> list[list[str]]:
    rows = []
    for t in tables:
        for r in t.results:
            for peer in sorted(r.lambdas):
                rows.append([str(t.year), r.province, peer, format_ratio(r.lambdas[peer])])
    return rows

