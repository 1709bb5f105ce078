"""
Command-line pipeline: ``synth``, ``calibrate``, ``run`` and ``report``.

Exit codes: 0 success, 1 validation failure (bad or missing input), 2 any
other runtime error. Data goes to files under ``--out``; stdout only gets
short summaries.
"""

from __future__ import annotations

import argparse
import sys
import warnings
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from . import ingest
from .calibration import calibrate_all
from .ecl import run_portfolio
from .errors import IngestError, MissingSnapshot, ScenarioEclError, UnknownScenario
from .ingest import RunConfig, load_run_config, money
from .synth import SynthConfig, generate_portfolio, generate_sample

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 1, 2


@dataclass
class CommandOutcome:
    exit_code: int = EXIT_OK
    summary: list[str] = field(default_factory=list)
    artifacts: list[Path] = field(default_factory=list)


class InputMissing(IngestError):
    pass


def _existing(path: str | None, what: str) -> Path:
    if not path:
        raise InputMissing(f"no {what} given (pass it as an argument or set it in the config)")
    p = Path(path)
    if not p.is_file():
        raise InputMissing(f"{what} not found: {p}")
    return p


def _out_dir(args, config: RunConfig | None) -> Path:
    out = args.out or (config.paths.get("output_dir") if config else None) or "."
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _config(args) -> RunConfig:
    if args.config is None:
        return RunConfig()
    return load_run_config(_existing(args.config, "config file"))


def synth_config(config: RunConfig, seed: int | None = None) -> SynthConfig:
    s = config.synth
    kwargs = dict(
        seed=int(seed if seed is not None else s.get("seed", 0)),
        n_entities=int(s.get("n_entities", 1000)),
        noise_sd=float(s.get("noise_sd", 0.05)),
        hazard_range=(float(s.get("hazard_min", 0.002)), float(s.get("hazard_max", 0.08))),
        positive_delta=s.get("positive_delta", "false").lower() in ("1", "true", "yes"),
        n_ecl_scenarios=int(s.get("n_ecl_scenarios", len(config.weights))),
    )
    if config.scheme is not None:
        kwargs.update(industries=config.scheme.industries, regions=config.scheme.regions,
                      credit_buckets=config.scheme.credit_buckets)
    if config.scenarios:
        kwargs["scenarios"] = config.scenarios
    if config.snapshot_years:
        kwargs["snapshot_years"] = config.snapshot_years
    return SynthConfig(**kwargs)


def cmd_synth(args) -> CommandOutcome:
    config = _config(args)
    cfg = synth_config(config, args.seed)
    out = _out_dir(args, config)
    sample = generate_sample(cfg)
    portfolio = generate_portfolio(cfg, int(config.synth.get("n_exposures", 100)),
                                   int(config.synth.get("max_maturity", 10)))
    outcome = CommandOutcome()
    outcome.artifacts = [
        ingest.write_entity_sample(sample.entities, out / "sample.csv"),
        ingest.write_portfolio(portfolio, out / "portfolio.csv"),
        ingest.write_truth(sample.truth, out / "planted_deltas.csv"),
    ]
    outcome.summary = [
        f"seed {cfg.seed}: {len(sample.entities)} entities, {len(portfolio)} exposures, "
        f"{len(sample.truth)} planted cells",
    ]
    return outcome


def cmd_calibrate(args) -> CommandOutcome:
    config = _config(args)
    path = _existing(args.sample or config.paths.get("sample_path"), "entity sample")
    out = _out_dir(args, config)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", MissingSnapshot)
        sample = ingest.load_entity_sample(path, config.scheme, config.scenarios)
    result = calibrate_all(sample, config.calibration_spec())
    outcome = CommandOutcome()
    outcome.artifacts = [
        ingest.write_delta_tables(result.tables, out / "deltas.csv"),
        ingest.write_diagnostics(result, out / "diagnostics.csv"),
        ingest.write_calibration_errors(result, out / "calibration_errors.csv"),
    ]
    n_fallback = sum(f.fallback_used for f in result.fits)
    outcome.summary = [str(w.message) for w in caught if issubclass(w.category, MissingSnapshot)]
    outcome.summary.append(
        f"{len(sample)} entities: {len(result.fits)} fits ({n_fallback} fallback), "
        f"{len(result.errors)} failed buckets, "
        f"{sum(len(t) for t in result.tables.values())} adjustments over {len(result.tables)} scenarios")
    return outcome


def cmd_run(args) -> CommandOutcome:
    config = _config(args)
    portfolio_path = _existing(args.portfolio or config.paths.get("portfolio_path"), "portfolio")
    delta_path = _existing(args.deltas or config.paths.get("delta_path"), "delta table file")
    if not config.run_years:
        raise ingest.ConfigError("config needs start_year (or horizons) to run the portfolio")
    out = _out_dir(args, config)
    exposures = ingest.load_portfolio(portfolio_path, config.scheme)
    tables = ingest.load_delta_tables(delta_path, config.scheme)
    if args.scenario is not None:
        if args.scenario not in tables:
            raise UnknownScenario(f"{delta_path}: no adjustments for scenario {args.scenario!r}")
        tables = {args.scenario: tables[args.scenario]}
    weights = config.scenario_weights()
    keys = {e.id: e.key for e in exposures}

    results, aggregates, errors, summary = [], [], [], []
    for scenario, table in tables.items():
        for year in config.run_years:
            res = run_portfolio(exposures, weights, table, year, config.lgd_mode)
            for b in res.breakdowns:
                k = keys[b.exposure_id]
                results.append([b.exposure_id, money(b.ecl_bs), money(b.ecl_sc), money(b.delta_ecl),
                                scenario, str(year), k.industry, k.region, str(k.credit_bucket)])
            for (dim, key), agg in res.aggregates.items():
                aggregates.append([scenario, str(year), dim, key, money(agg.ecl_bs),
                                   money(agg.ecl_sc), money(agg.delta_ecl)])
            errors.extend([scenario, str(year), eid, msg] for eid, msg in res.errors)
            total = res.total
            summary.append(f"{scenario} @ {year}: {len(res.breakdowns)} exposures, "
                           f"ECL {money(total.ecl_bs)} -> {money(total.ecl_sc)} "
                           f"(delta {money(total.delta_ecl)}), {len(res.errors)} errors")
    outcome = CommandOutcome(summary=summary)
    outcome.artifacts = [
        ingest._write(out / "results.csv", ingest.RESULT_COLUMNS, results),
        ingest._write(out / "aggregates.csv", ingest.AGGREGATE_COLUMNS, aggregates),
        ingest._write(out / "run_errors.csv", ingest.RUN_ERROR_COLUMNS, errors),
    ]
    return outcome


def format_table(rows: dict[str, dict[str, float]], columns: Sequence[str],
                 row_label: str = "industry") -> str:
    header = [row_label, *columns]
    body = [[r, *(money(rows[r].get(c, 0.0)) for c in columns)] for r in sorted(rows)]
    widths = [max(len(str(line[i])) for line in [header, *body]) for i in range(len(header))]
    lines = ["  ".join(h.ljust(w) if i == 0 else h.rjust(w) for i, (h, w) in enumerate(zip(header, widths)))]
    lines.append("  ".join("-" * w for w in widths))
    for line in body:
        lines.append("  ".join(v.ljust(w) if i == 0 else v.rjust(w)
                               for i, (v, w) in enumerate(zip(line, widths))))
    return "\n".join(lines)


def cmd_report(args) -> CommandOutcome:
    config = _config(args) if args.config else None
    path = _existing(args.results, "results file")
    out = _out_dir(args, config)
    rows = ingest.load_results(path)
    if args.scenario is not None:
        rows = [r for r in rows if r["scenario"] == args.scenario]

    totals: dict[tuple[str, int, str], list[float]] = defaultdict(lambda: [0.0, 0.0, 0.0])
    for r in rows:
        acc = totals[(r["scenario"], r["start_year"], r["industry"])]
        acc[0] += r["ecl_bs"]
        acc[1] += r["ecl_sc"]
        acc[2] += r["delta_ecl"]
    columns = sorted({f"{s}@{y}" for s, y, _ in totals})
    table: dict[str, dict[str, float]] = defaultdict(dict)
    for (s, y, ind), acc in totals.items():
        table[ind][f"{s}@{y}"] = acc[2]
    text = "Delta ECL by industry (columns: scenario@horizon)\n" + format_table(table, columns) + "\n"

    outcome = CommandOutcome()
    summary_path = out / "summary.txt"
    summary_path.write_text(text, encoding="utf-8")
    plot_rows = [[s, str(y), ind, money(a[0]), money(a[1]), money(a[2])]
                 for (s, y, ind), a in sorted(totals.items())]
    outcome.artifacts = [
        summary_path,
        ingest._write(out / "plot_data.csv",
                      ("scenario", "start_year", "industry", "ecl_bs", "ecl_sc", "delta_ecl"), plot_rows),
    ]
    outcome.summary = text.rstrip("\n").splitlines()
    return outcome


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="scenario-ecl",
                                     description="Scenario-adjusted expected credit loss pipeline")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config_required=False):
        p.add_argument("--config", required=config_required, help="run configuration file")
        p.add_argument("--out", help="output directory (default: output_dir from config, else .)")

    p = sub.add_parser("synth", help="write a synthetic sample, portfolio and planted deltas")
    common(p)
    p.add_argument("--seed", type=int, help="override the configured seed")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("calibrate", help="fit sectoral adjustments from an entity sample")
    p.add_argument("sample", nargs="?", help="entity sample CSV (default: sample_path)")
    common(p)
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("run", help="baseline vs scenario ECL for a portfolio")
    p.add_argument("portfolio", nargs="?", help="portfolio CSV (default: portfolio_path)")
    p.add_argument("deltas", nargs="?", help="delta table CSV (default: delta_path)")
    common(p)
    p.add_argument("--scenario", help="only run this scenario label")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("report", help="summarise a results file")
    p.add_argument("results", help="results.csv written by `run`")
    common(p)
    p.add_argument("--scenario", help="only report this scenario label")
    p.set_defaults(func=cmd_report)
    return parser


def execute(argv: Sequence[str] | None = None) -> CommandOutcome:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (IngestError, UnknownScenario) as err:
        return CommandOutcome(EXIT_INVALID, [f"error: {err}"])
    except (ScenarioEclError, OSError, ValueError) as err:
        return CommandOutcome(EXIT_RUNTIME, [f"error: {type(err).__name__}: {err}"])


def main(argv: Sequence[str] | None = None) -> int:
    outcome = execute(argv)
    stream = sys.stdout if outcome.exit_code == EXIT_OK else sys.stderr
    for line in outcome.summary:
        print(line, file=stream)
    for path in outcome.artifacts:
        print(f"wrote {path}")
    return outcome.exit_code


if __name__ == "__main__":
    sys.exit(main())
