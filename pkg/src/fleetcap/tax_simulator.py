"""Per-ton capacity tax scenarios driven through the two fitted lag models.

Starting from actual capacity and utilization in the three years up to the
first taxed year, each later year gets

    capacity    B_t = B_{t-1} + czl(F_t, F_{t-1}, F_{t-2}, F_{t-3})
    utilization G_t = G_{t-1} + uzl(B_t, B_{t-1}, B_{t-2})

where F is after-tax income.  By default the tax is levied on the actual
(measured) capacity of each year, so F does not depend on the simulated
path; ``tax_base="simulated_capacity"`` taxes the simulated capacity instead.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable

from .econometrics import CompoundDiffModel, PdlModel, predict_czl, predict_uzl
from .errors import DataError, NumericalError
from .panel_data import NationalSeries

TAX_BASES = ("actual_capacity", "simulated_capacity")
SEED_YEARS = 3
UTIL_MIN = 0.01
UTIL_MAX = 1.0


@dataclass(frozen=True)
class TaxScenario:
    tax_rate: float
    start_year: int = 1996
    end_year: int = 2005
    tax_base: str = "actual_capacity"

    def __post_init__(self):
        if not self.tax_rate >= 0:
            raise DataError(f"tax rate must be non-negative, got {self.tax_rate}")
        if self.start_year > self.end_year:
            raise DataError(f"start year {self.start_year} after end year {self.end_year}")
        if self.tax_base not in TAX_BASES:
            raise DataError(f"unknown tax base {self.tax_base!r}")


@dataclass
class ScenarioTrajectory:
    scenario: TaxScenario
    years: list[int]
    capacity: list[float]
    utilization: list[float]
    catch: list[float]
    after_tax_income: list[float]
    income_per_capacity_ton: list[float]
    warnings: list[str] = field(default_factory=list)

    def at(self, year: int, name: str) -> float:
        return getattr(self, name)[self.years.index(year)]

    def rows(self) -> list[dict]:
        return [
            {"year": y, "tax_rate": self.scenario.tax_rate, "sim_capacity_t": b, "sim_utilization": g,
             "sim_catch_t": a, "after_tax_income_yuan": f, "income_per_capacity_ton": h}
            for y, b, g, a, f, h in zip(self.years, self.capacity, self.utilization, self.catch,
                                        self.after_tax_income, self.income_per_capacity_ton)
        ]


def simulate(scenario: TaxScenario, pdl: PdlModel, compound: CompoundDiffModel,
             base: NationalSeries) -> ScenarioTrajectory:
    s0, s1 = scenario.start_year, scenario.end_year
    L = pdl.lag_length
    first = s0 - (SEED_YEARS - 1)
    needed_income = range(s0 + 1 - L, s1 + 1)
    cap = base.column("capacity")
    util = base.column("utilization")
    inc = base.column("income")
    missing = [y for y in needed_income if y not in inc]
    missing += [y for y in range(first, s1 + 1) if y not in cap or y not in util]
    if missing:
        raise DataError(f"base series lacks years {sorted(set(missing))} for a {s0}-{s1} scenario")

    tau = scenario.tax_rate
    income = {y: inc[y] for y in needed_income}
    B, G = {}, {}
    warnings = []
    for y in range(first, s0 + 1):
        B[y], G[y] = cap[y], util[y]
    if scenario.tax_base == "actual_capacity":
        for y in range(s0, s1 + 1):
            income[y] = inc[y] - tau * cap[y]
    else:
        income[s0] = inc[s0] - tau * cap[s0]

    beta0 = float(pdl.lag_coefficients[0])
    for y in range(s0 + 1, s1 + 1):
        if scenario.tax_base == "actual_capacity":
            B[y] = B[y - 1] + predict_czl(pdl, [income[y - l] for l in range(L + 1)])
        else:
            # F_t = D_t - tau * B_t makes the recursion implicit but linear in B_t
            rhs = B[y - 1] + predict_czl(pdl, [inc[y]] + [income[y - l] for l in range(1, L + 1)])
            B[y] = rhs / (1.0 + beta0 * tau)
            income[y] = inc[y] - tau * B[y]
        if B[y] <= 0:
            raise NumericalError(f"simulated capacity non-positive in {y} at tax rate {tau}")
        g = G[y - 1] + predict_uzl(compound, B[y], B[y - 1], B[y - 2])
        if not (UTIL_MIN <= g <= UTIL_MAX):
            clamped = min(max(g, UTIL_MIN), UTIL_MAX)
            warnings.append(f"{y}: utilization {g:.4f} clamped to {clamped:.2f}")
            g = clamped
        G[y] = g

    years = list(range(first, s1 + 1))
    F = [income.get(y, inc[y]) for y in years]
    capacity = [B[y] for y in years]
    utilization = [G[y] for y in years]
    return ScenarioTrajectory(
        scenario=scenario,
        years=years,
        capacity=capacity,
        utilization=utilization,
        catch=[b * g for b, g in zip(capacity, utilization)],
        after_tax_income=F,
        income_per_capacity_ton=[f / b for f, b in zip(F, capacity)],
        warnings=warnings,
    )


def curtailment(trajectory: ScenarioTrajectory) -> float:
    """Share of start-year capacity removed by the end year."""
    s = trajectory.scenario
    return 1.0 - trajectory.at(s.end_year, "capacity") / trajectory.at(s.start_year, "capacity")


def sweep(rates: Iterable[float], pdl: PdlModel, compound: CompoundDiffModel, base: NationalSeries,
          start_year: int = 1996, end_year: int = 2005, tax_base: str = "actual_capacity",
          workers: int | None = None) -> dict[float, tuple[ScenarioTrajectory, float]]:
    """Independent scenarios per tax rate, keyed by rate in input order."""
    rates = [float(r) for r in rates]
    scenarios = [TaxScenario(r, start_year, end_year, tax_base) for r in rates]

    def run(sc):
        traj = simulate(sc, pdl, compound, base)
        return traj, curtailment(traj)

    if workers and workers > 1 and len(scenarios) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, scenarios))
    else:
        results = [run(sc) for sc in scenarios]
    return dict(zip(rates, results))


def figure_series(results: dict[float, tuple[ScenarioTrajectory, float]]) -> list[tuple[int, float, float]]:
    """(year, rate, capacity) triples for the capacity-by-rate chart."""
    out = []
    for rate, (traj, _) in results.items():
        out.extend((y, rate, b) for y, b in zip(traj.years, traj.capacity))
    return sorted(out, key=lambda t: (t[1], t[0]))


def summary_rows(results: dict[float, tuple[ScenarioTrajectory, float]]) -> list[dict]:
    rows = []
    for rate, (traj, cut) in results.items():
        rows.append({"tax_rate": rate, "curtailment_fraction": cut,
                     "end_capacity_t": traj.at(traj.scenario.end_year, "capacity"),
                     "end_year": traj.scenario.end_year})
    return rows

