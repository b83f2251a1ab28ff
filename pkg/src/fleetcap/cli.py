"""Command-line front end: ``fleetcap {measure,fit,simulate,sweep,report,validate}``.

Every command computes all of its outputs in memory first and only then
writes them, so a failing run leaves the output directory untouched.

Exit codes: 0 success, 1 usage, 2 data, 3 numerical.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import dea_capacity as dea
from . import econometrics as eco
from . import panel_data as pdata
from . import tax_simulator as tax
from .errors import DataError, FleetcapError, UsageError

COMMANDS = ("measure", "fit", "simulate", "sweep", "report", "validate")
DEFAULTS = {
    "input": None,
    "national": None,
    "reference": None,
    "out": "fleetcap-out",
    "rates": None,
    "start_year": 1996,
    "end_year": 2005,
    "coeffs": "refit",
    "format": "csv",
    "plots": False,
    "seed_data": False,
    "tax_base": "actual_capacity",
    "lambdas": False,
    "jump_factor": 5.0,
}
DEFAULT_RATES = {"simulate": [100.0], "sweep": [5.0, 40.0, 60.0, 80.0], "report": [5.0, 40.0, 60.0, 80.0]}


@dataclass
class RunConfig:
    command: str
    input: str | None = None
    national: str | None = None
    reference: str | None = None
    out: str = DEFAULTS["out"]
    rates: list[float] = field(default_factory=list)
    start_year: int = 1996
    end_year: int = 2005
    coeffs: str = "refit"
    format: str = "csv"
    plots: bool = False
    seed_data: bool = False
    tax_base: str = "actual_capacity"
    lambdas: bool = False
    jump_factor: float = 5.0

    def check(self):
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command!r}")
        for p in (self.input, self.national, self.reference):
            if p is not None and not Path(p).is_file():
                raise UsageError(f"input file not found: {p}")
        if any(r < 0 for r in self.rates):
            raise UsageError("tax rates must be non-negative")
        if self.coeffs not in ("refit", "printed"):
            raise UsageError(f"--coeffs must be refit or printed, not {self.coeffs!r}")
        if self.format not in ("csv", "json"):
            raise UsageError(f"--format must be csv or json, not {self.format!r}")
        out = Path(self.out)
        if out.exists() and not out.is_dir():
            raise UsageError(f"output path exists and is not a directory: {out}")


# ---------------------------------------------------------------------------
# formatting helpers

def _ratio(x: float) -> str:
    return f"{x:.6g}"


def _tons(x: float) -> str:
    return f"{x:.0f}"


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _json(obj) -> str:
    return eco.to_json(obj)


# ---------------------------------------------------------------------------
# input resolution

def _panels(cfg: RunConfig):
    if cfg.input:
        panels = pdata.load_panel(cfg.input)
    elif cfg.seed_data:
        panels = pdata.load_bundled_panel()
    else:
        raise UsageError("no panel input: pass --input or --seed-data")
    if not panels:
        raise DataError("panel input contains no records")
    return panels


def _national(cfg: RunConfig):
    if cfg.national:
        return pdata.load_national(cfg.national)
    if cfg.seed_data:
        return pdata.load_bundled_national()
    raise UsageError("no national series: pass --national or --seed-data")


def _reference(cfg: RunConfig):
    if cfg.reference:
        return pdata.load_reference(cfg.reference)
    if cfg.seed_data:
        return pdata.load_reference()
    return None


def _models(cfg: RunConfig, national):
    if cfg.coeffs == "printed":
        return eco.PdlModel.printed(), eco.CompoundDiffModel.printed()
    return eco.fit_models(national)


# ---------------------------------------------------------------------------
# commands; each returns {relative filename: text}

def cmd_measure(cfg: RunConfig) -> dict[str, str]:
    tables = dea.measure_all(_panels(cfg))
    files = {}
    header = ["year", "province", "phi", "capacity_utilization", "capacity_output_t"]
    for t in tables:
        rows = dea.table_rows([t])
        if cfg.format == "json":
            files[f"dea_{t.year}.json"] = _json([dict(zip(header, r)) for r in rows])
        else:
            files[f"dea_{t.year}.csv"] = _csv(header, rows)
    series = dea.capacity_series(tables)
    srows = [[s["year"], _tons(s["catch_t"]), _tons(s["capacity_t"]), _ratio(s["utilization"])] for s in series]
    sheader = ["year", "catch_t", "capacity_t", "utilization"]
    if cfg.format == "json":
        files["national_capacity.json"] = _json([dict(zip(sheader, r)) for r in srows])
    else:
        files["national_capacity.csv"] = _csv(sheader, srows)
    if cfg.lambdas:
        files["dea_lambdas.csv"] = _csv(["year", "province", "peer", "lambda"], dea.lambda_rows(tables))
    return files


def cmd_fit(cfg: RunConfig) -> dict[str, str]:
    national = _national(cfg)
    pdl, cd = eco.fit_models(national)
    if cfg.format == "json":
        return {
            "fit_capacity_income.json": _json(eco.pdl_report(pdl)),
            "fit_utilization_capacity.json": _json(eco.compound_report(cd)),
        }
    lag_lines = "".join(f"beta_{i} (income lag {i})  {b:.6g}\n" for i, b in enumerate(pdl.lag_coefficients))
    pdl_text = (eco.format_fit(pdl.fit, "Capacity increment on income, Almon lag "
                               f"(L={pdl.lag_length}, degree={pdl.poly_degree}, {pdl.restriction} restriction)",
                               "CZL") + f"Sample: {pdl.sample_years[0]}-{pdl.sample_years[-1]}\n"
                + f"intercept  {pdl.intercept:.10g}\n" + lag_lines)
    cd_text = (eco.format_fit(cd.fit, "Utilization increment on capacity differences (10^4 t)", "UZL")
               + f"Sample: {cd.sample_years[0]}-{cd.sample_years[-1]}\n"
               + f"corr(OUT-OUT(-1), OUT(-1)-OUT(-2)) {cd.diff_correlation:.6g}\n"
               + f"corr(OUT, OUT(-1)) {cd.level_correlation:.6g}\n")
    return {"fit_capacity_income.txt": pdl_text, "fit_utilization_capacity.txt": cd_text}


TRAJ_HEADER = ["year", "tax_rate", "sim_capacity_t", "sim_utilization", "sim_catch_t",
               "after_tax_income_yuan", "income_per_capacity_ton"]


def _traj_rows(traj: tax.ScenarioTrajectory) -> list[list[str]]:
    return [[str(r["year"]), f"{r['tax_rate']:g}", _tons(r["sim_capacity_t"]), _ratio(r["sim_utilization"]),
             _tons(r["sim_catch_t"]), _tons(r["after_tax_income_yuan"]), _ratio(r["income_per_capacity_ton"])]
            for r in traj.rows()]


def _sweep(cfg: RunConfig):
    national = _national(cfg)
    pdl, cd = _models(cfg, national)
    return tax.sweep(cfg.rates, pdl, cd, national, cfg.start_year, cfg.end_year, cfg.tax_base), national


def _summary(cfg, results) -> tuple[list[str], list[list[str]]]:
    header = ["tax_rate", "curtailment_fraction", f"capacity_{cfg.end_year}_t"]
    rows = [[f"{r['tax_rate']:g}", _ratio(r["curtailment_fraction"]), _tons(r["end_capacity_t"])]
            for r in tax.summary_rows(results)]
    return header, rows


def _warnings(results) -> str:
    lines = []
    for rate, (traj, _) in results.items():
        lines.extend(f"tax_rate {rate:g}: {w}" for w in traj.warnings)
    return "".join(line + "\n" for line in lines)


def cmd_simulate(cfg: RunConfig) -> dict[str, str]:
    results, _ = _sweep(cfg)
    files = {}
    for rate, (traj, _) in results.items():
        name = f"trajectory_tax{rate:g}"
        if cfg.format == "json":
            files[name + ".json"] = _json({"scenario": traj.scenario.__dict__, "rows": traj.rows(),
                                           "curtailment": tax.curtailment(traj), "warnings": traj.warnings})
        else:
            files[name + ".csv"] = _csv(TRAJ_HEADER, _traj_rows(traj))
    header, rows = _summary(cfg, results)
    files["summary.csv" if cfg.format == "csv" else "summary.json"] = (
        _csv(header, rows) if cfg.format == "csv" else _json([dict(zip(header, r)) for r in rows]))
    w = _warnings(results)
    if w:
        files["warnings.txt"] = w
    return files


def cmd_sweep(cfg: RunConfig) -> dict[str, str]:
    results, _ = _sweep(cfg)
    header, rows = _summary(cfg, results)
    files = {}
    traj_rows = [row for traj, _ in results.values() for row in _traj_rows(traj)]
    if cfg.format == "json":
        files["sweep_summary.json"] = _json([dict(zip(header, r)) for r in rows])
        files["sweep_trajectories.json"] = _json([dict(zip(TRAJ_HEADER, r)) for r in traj_rows])
    else:
        files["sweep_summary.csv"] = _csv(header, rows)
        files["sweep_trajectories.csv"] = _csv(TRAJ_HEADER, traj_rows)
    w = _warnings(results)
    if w:
        files["warnings.txt"] = w
    return files


def cmd_report(cfg: RunConfig) -> dict[str, object]:
    tables = dea.measure_all(_panels(cfg))
    series = dea.capacity_series(tables)
    years = [s["year"] for s in series]
    files: dict[str, object] = {
        "fig1_capacity.csv": _csv(["year", "value"], [[s["year"], _tons(s["capacity_t"])] for s in series]),
        "fig1_catch.csv": _csv(["year", "value"], [[s["year"], _tons(s["catch_t"])] for s in series]),
        "fig2_utilization.csv": _csv(["year", "value"], [[s["year"], _ratio(s["utilization"])] for s in series]),
    }
    results, national = _sweep(cfg)
    fig3 = tax.figure_series(results)
    files["fig3_capacity_by_rate.csv"] = _csv(["year", "value", "rate"],
                                              [[y, _tons(b), f"{r:g}"] for y, r, b in fig3])
    if cfg.plots:
        from . import plotting

        by_rate = {rate: (traj.years, traj.capacity) for rate, (traj, _) in results.items()}
        actual_years = [y for y in national.years if cfg.start_year - 2 <= y <= cfg.end_year]
        actual = (actual_years, [national.capacity[national.index(y)] for y in actual_years])
        files["fig1_capacity_catch.svg"] = lambda p: plotting.plot_capacity_and_catch(
            years, [s["capacity_t"] for s in series], [s["catch_t"] for s in series], p)
        files["fig2_utilization.svg"] = lambda p: plotting.plot_utilization(
            years, [s["utilization"] for s in series], p)
        files["fig3_capacity_by_rate.svg"] = lambda p: plotting.plot_capacity_by_rate(by_rate, p, actual)
    return files


def cmd_validate(cfg: RunConfig) -> dict[str, str]:
    panels = _panels(cfg)
    findings = pdata.validate_panel(panels, _reference(cfg), jump_factor=cfg.jump_factor)
    if cfg.format == "json":
        return {"validation_report.jsonl": pdata.format_findings(findings, "json")}
    return {"validation_report.txt": pdata.format_findings(findings, "text")}


HANDLERS = {
    "measure": cmd_measure, "fit": cmd_fit, "simulate": cmd_simulate, "sweep": cmd_sweep,
    "report": cmd_report, "validate": cmd_validate,
}


def run(cfg: RunConfig) -> list[Path]:
    """Execute ``cfg`` and write its artifacts; returns the written paths."""
    cfg.check()
    files = HANDLERS[cfg.command](cfg)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for name in sorted(files):
        path = out / name
        content = files[name]
        if callable(content):
            content(path)
        else:
            with open(path, "w", encoding="utf-8", newline="") as fh:
                fh.write(content)
        written.append(path)
    return written


# ---------------------------------------------------------------------------
# argument parsing

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _rates(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid rate list {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--input", help="panel CSV (province,year,vessels,tonnage,power,labor,catch)")
    common.add_argument("--national", help="national CSV (year,catch_t,capacity_t,income_yuan)")
    common.add_argument("--reference", help="published per-province DEA results for validate")
    common.add_argument("--out", help="output directory")
    common.add_argument("--rates", type=_rates, help="comma-separated tax rates, yuan per ton")
    common.add_argument("--start-year", type=int)
    common.add_argument("--end-year", type=int)
    common.add_argument("--coeffs", choices=("refit", "printed"))
    common.add_argument("--tax-base", choices=tax.TAX_BASES)
    common.add_argument("--format", choices=("csv", "json"))
    common.add_argument("--plots", action="store_true", default=None, help="also write SVG charts")
    common.add_argument("--lambdas", action="store_true", default=None, help="write peer weights (measure)")
    common.add_argument("--jump-factor", type=float, help="year-over-year jump threshold (validate)")
    common.add_argument("--seed-data", action="store_true", default=None, help="use the bundled data set")
    common.add_argument("--config", help="JSON file of option defaults")

    parser = _Parser(prog="fleetcap", description="Fleet capacity measurement, lag models and tax simulation.")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    helps = {
        "measure": "per-year DEA capacity tables and national series",
        "fit": "fit the income and utilization lag models",
        "simulate": "simulate tax scenarios year by year",
        "sweep": "curtailment summary over several tax rates",
        "report": "figure data series (and charts with --plots)",
        "validate": "data-quality report for a panel",
    }
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name])
    return parser


def config_from_args(argv=None) -> RunConfig:
    args = build_parser().parse_args(argv)
    if not args.command:
        raise UsageError(f"a command is required: {', '.join(COMMANDS)}")
    values = dict(DEFAULTS)
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                file_values = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
        unknown = set(file_values) - set(DEFAULTS)
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
        values.update(file_values)
    for key in DEFAULTS:
        v = getattr(args, key, None)
        if v is not None:
            values[key] = v
    if values["rates"] is None:
        values["rates"] = list(DEFAULT_RATES.get(args.command, [100.0]))
    elif isinstance(values["rates"], str):
        values["rates"] = _rates(values["rates"])
    values["rates"] = [float(r) for r in values["rates"]]
    return RunConfig(command=args.command, **values)


def main(argv=None) -> int:
    try:
        cfg = config_from_args(argv)
        written = run(cfg)
    except FleetcapError as exc:
        print(f"fleetcap: {exc.module}: {exc}", file=sys.stderr)
        return exc.exit_code
    for path in written:
        print(os.fspath(path))
    return 0


if __name__ == "__main__":
    sys.exit(main())
