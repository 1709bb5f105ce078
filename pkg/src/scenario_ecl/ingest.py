"""
CSV and run-configuration readers and writers.

All files are UTF-8 CSV with a mandatory header and ``.`` decimals. Floats
are written with 17 significant digits so that write -> load -> write is
byte-identical. Row numbers in errors count data rows from 1 (the header is
row 0).
"""

from __future__ import annotations

import configparser
import csv
import json
import math
import warnings
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .calibration import CalibrationResult, CalibrationSpec, EntityObservation
from .ecl import LGD_MODES, ExposureRecord, ScenarioLeg, ScenarioWeights
from .errors import (IngestError, MissingSnapshot, RowError, SchemaError, UnknownCategory,
                     UnknownScenario)
from .overlay import EPS, BucketKey, DeltaTable
from .pd_term import PdTermStructure

PORTFOLIO_COLUMNS = ("exposure_id", "industry", "region", "credit_bucket", "ecl_scenario_index",
                     "year_index", "pd_bs", "lgd_bs", "ead", "discount_rate")
PORTFOLIO_OPTIONAL = ("lgd_sc",)
SAMPLE_COLUMNS = ("entity_id", "industry", "region", "credit_bucket", "scenario",
                  "snapshot_year", "pd_bs", "pd_sc")
DELTA_COLUMNS = ("scenario", "industry", "region", "credit_bucket", "year", "delta")
TRUTH_COLUMNS = ("industry", "region", "credit_bucket", "scenario", "snapshot_year", "delta_true")
RESULT_COLUMNS = ("exposure_id", "ecl_bs", "ecl_sc", "delta_ecl", "scenario", "start_year",
                  "industry", "region", "credit_bucket")
AGGREGATE_COLUMNS = ("scenario", "start_year", "dimension", "key", "ecl_bs", "ecl_sc", "delta_ecl")
RUN_ERROR_COLUMNS = ("scenario", "start_year", "exposure_id", "error")
DIAGNOSTIC_COLUMNS = ("scenario", "snapshot_year", "bucket", "n_obs", "n_missing", "alpha",
                      "betas", "std_errors", "t_stats", "p_values", "r_squared", "f_stat",
                      "f_pvalue", "df_model", "df_resid", "dropped_categories", "fallback_used")
CALIBRATION_ERROR_COLUMNS = ("scenario", "snapshot_year", "bucket", "error")


class ConfigError(IngestError):
    pass


def fmt(x: float) -> str:
    """Lossless float text (17 significant digits)."""
    return format(float(x), ".17g")


def money(x: float) -> str:
    return f"{x:.2f}"


# --------------------------------------------------------------------------
# classification scheme


@dataclass(frozen=True)
class ClassificationScheme:
    industries: tuple[str, ...]
    regions: tuple[str, ...]
    credit_buckets: tuple[int, ...] = (1, 2, 3, 4, 5, 6)

    def __post_init__(self) -> None:
        for name in ("industries", "regions"):
            codes = tuple(str(c) for c in getattr(self, name))
            if not codes or len(set(codes)) != len(codes) or any(not c for c in codes):
                raise ValueError(f"{name} codes must be non-empty and unique")
            object.__setattr__(self, name, codes)
        buckets = tuple(sorted(int(b) for b in self.credit_buckets))
        if not buckets or buckets[0] < 1 or buckets != tuple(range(buckets[0], buckets[-1] + 1)):
            raise ValueError(f"credit buckets must be a contiguous range of integers >= 1, got {buckets}")
        object.__setattr__(self, "credit_buckets", buckets)

    def categories(self) -> dict[str, tuple]:
        return {"industry": self.industries, "region": self.regions,
                "credit_bucket": self.credit_buckets}

    def keys(self) -> list[BucketKey]:
        return [BucketKey(i, r, c) for i in self.industries for r in self.regions
                for c in self.credit_buckets]


# --------------------------------------------------------------------------
# low-level row helpers


def _read_rows(path, columns: Sequence[str], optional: Sequence[str] = ()):
    path = Path(path)
    handle = path.open("r", encoding="utf-8", newline="")
    with handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(path, columns, []) from None
        allowed = [list(columns) + list(optional[:i]) for i in range(len(optional) + 1)]
        if header not in allowed:
            raise SchemaError(path, columns, header)
        rows = []
        for i, raw in enumerate(reader, start=1):
            if not raw:
                continue
            if len(raw) != len(header):
                raise RowError(i, header[min(len(raw), len(header) - 1)],
                               f"expected {len(header)} fields, found {len(raw)}", path)
            rows.append((i, dict(zip(header, raw))))
    return header, rows


def _float(row: int, col: str, text: str, path, lo=None, hi=None, lo_open=False) -> float:
    try:
        v = float(text)
    except ValueError:
        raise RowError(row, col, f"not a number: {text!r}", path) from None
    if not math.isfinite(v):
        raise RowError(row, col, f"non-finite value {text!r}", path)
    if lo is not None and (v <= lo if lo_open else v < lo):
        raise RowError(row, col, f"value {v!r} below allowed range", path)
    if hi is not None and v > hi:
        raise RowError(row, col, f"value {v!r} above allowed range", path)
    return v


def _int(row: int, col: str, text: str, path, lo=None) -> int:
    try:
        v = int(text)
    except ValueError:
        raise RowError(row, col, f"not an integer: {text!r}", path) from None
    if lo is not None and v < lo:
        raise RowError(row, col, f"value {v} below {lo}", path)
    return v


def _key(row: int, rec: dict, scheme: ClassificationScheme | None, path) -> BucketKey:
    industry, region = rec["industry"], rec["region"]
    if not industry:
        raise RowError(row, "industry", "empty value", path)
    if not region:
        raise RowError(row, "region", "empty value", path)
    cb = _int(row, "credit_bucket", rec["credit_bucket"], path, lo=1)
    if scheme is not None:
        if industry not in scheme.industries:
            raise UnknownCategory(row, "industry", industry, path)
        if region not in scheme.regions:
            raise UnknownCategory(row, "region", region, path)
        if cb not in scheme.credit_buckets:
            raise UnknownCategory(row, "credit_bucket", cb, path)
    return BucketKey(industry, region, cb)


def _write(path, columns: Sequence[str], rows: Iterable[Sequence[str]]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(columns)
        writer.writerows(rows)
    return path


# --------------------------------------------------------------------------
# portfolio


def load_portfolio(path, scheme: ClassificationScheme | None = None) -> list[ExposureRecord]:
    """Read a long-format portfolio (one row per exposure x ECL scenario x year).

    An optional trailing ``lgd_sc`` column supplies scenario LGDs for the
    ``direct`` LGD mode. Records come back sorted by exposure id.
    """
    header, rows = _read_rows(path, PORTFOLIO_COLUMNS, PORTFOLIO_OPTIONAL)
    has_lgd_sc = "lgd_sc" in header
    meta: dict[str, tuple[BucketKey, float, int]] = {}
    cells: dict[str, dict[tuple[int, int], tuple]] = defaultdict(dict)
    last_row: dict[str, int] = {}
    for i, rec in rows:
        eid = rec["exposure_id"].strip()
        if not eid:
            raise RowError(i, "exposure_id", "empty value", path)
        key = _key(i, rec, scheme, path)
        k = _int(i, "ecl_scenario_index", rec["ecl_scenario_index"], path, lo=1)
        t = _int(i, "year_index", rec["year_index"], path, lo=1)
        pd = _float(i, "pd_bs", rec["pd_bs"], path, 0.0, 1.0)
        lgd = _float(i, "lgd_bs", rec["lgd_bs"], path, 0.0, 1.0)
        ead = _float(i, "ead", rec["ead"], path, 0.0)
        rate = _float(i, "discount_rate", rec["discount_rate"], path, -1.0, lo_open=True)
        lgd_sc = _float(i, "lgd_sc", rec["lgd_sc"], path, 0.0, 1.0) if has_lgd_sc else None
        if eid in meta:
            key0, rate0, _ = meta[eid]
            for col, a, b in (("industry", key0.industry, key.industry),
                              ("region", key0.region, key.region),
                              ("credit_bucket", key0.credit_bucket, key.credit_bucket),
                              ("discount_rate", rate0, rate)):
                if a != b:
                    raise RowError(i, col, f"exposure {eid} changes {col} from {a!r} to {b!r}", path)
        else:
            meta[eid] = (key, rate, i)
        if (k, t) in cells[eid]:
            raise RowError(i, "year_index",
                           f"duplicate key (exposure_id={eid}, ecl_scenario_index={k}, year_index={t})", path)
        cells[eid][(k, t)] = (pd, lgd, ead, lgd_sc)
        last_row[eid] = i

    exposures = []
    for eid in sorted(cells):
        key, rate, _ = meta[eid]
        grid = cells[eid]
        m = max(k for k, _ in grid)
        n = max(t for _, t in grid)
        for k in range(1, m + 1):
            for t in range(1, n + 1):
                if (k, t) not in grid:
                    raise RowError(last_row[eid], "year_index",
                                   f"exposure {eid} lacks ecl_scenario_index={k}, year_index={t}", path)
        legs = []
        for k in range(1, m + 1):
            values = [grid[(k, t)] for t in range(1, n + 1)]
            pd_curve = PdTermStructure([v[0] for v in values], "unconditional")
            legs.append(ScenarioLeg(pd_curve, [v[1] for v in values], [v[2] for v in values],
                                    [v[3] for v in values] if has_lgd_sc else None))
        exposures.append(ExposureRecord(eid, key, rate, tuple(legs)))
    return exposures


def write_portfolio(exposures: Iterable[ExposureRecord], path) -> Path:
    exposures = sorted(exposures, key=lambda e: e.id)
    direct = any(leg.lgd_sc is not None for e in exposures for leg in e.legs)
    columns = PORTFOLIO_COLUMNS + (PORTFOLIO_OPTIONAL if direct else ())
    rows = []
    for e in exposures:
        for k, leg in enumerate(e.legs, start=1):
            for t in range(leg.pd_bs.n):
                row = [e.id, e.key.industry, e.key.region, str(e.key.credit_bucket), str(k),
                       str(t + 1), fmt(leg.pd_bs.values[t]), fmt(leg.lgd_bs[t]), fmt(leg.ead[t]),
                       fmt(e.discount_rate)]
                if direct:
                    row.append(fmt(leg.lgd_sc[t]))
                rows.append(row)
    return _write(path, columns, rows)


# --------------------------------------------------------------------------
# entity sample


def load_entity_sample(path, scheme: ClassificationScheme | None = None,
                       scenarios: Sequence[str] | None = None) -> list[EntityObservation]:
    """Read a long-format entity sample.

    An empty ``pd_sc`` cell, or a declared scenario with no row for an
    entity-year, leaves that PD missing; one :class:`MissingSnapshot`
    warning reports how many were found. Duplicate (entity, scenario, year)
    rows and conflicting entity attributes are errors.
    """
    _, rows = _read_rows(path, SAMPLE_COLUMNS)
    declared = None if scenarios is None else set(scenarios)
    keys: dict[str, tuple[BucketKey, int]] = {}
    pd_bs: dict[str, dict[int, tuple[float, int]]] = defaultdict(dict)
    pd_sc: dict[str, dict[tuple[str, int], float]] = defaultdict(dict)
    seen: set[tuple[str, str, int]] = set()
    missing = 0
    for i, rec in rows:
        eid = rec["entity_id"].strip()
        if not eid:
            raise RowError(i, "entity_id", "empty value", path)
        key = _key(i, rec, scheme, path)
        scenario = rec["scenario"].strip()
        if not scenario:
            raise RowError(i, "scenario", "empty value", path)
        if declared is not None and scenario not in declared:
            raise UnknownCategory(i, "scenario", scenario, path)
        year = _int(i, "snapshot_year", rec["snapshot_year"], path)
        p_bs = _float(i, "pd_bs", rec["pd_bs"], path, 0.0, 1.0)
        p_sc = None if rec["pd_sc"].strip() == "" else _float(i, "pd_sc", rec["pd_sc"], path, 0.0, 1.0)
        if (eid, scenario, year) in seen:
            raise RowError(i, "snapshot_year",
                           f"duplicate key (entity_id={eid}, scenario={scenario}, snapshot_year={year})", path)
        seen.add((eid, scenario, year))
        if eid in keys:
            key0 = keys[eid][0]
            for col in ("industry", "region", "credit_bucket"):
                if getattr(key0, col) != getattr(key, col):
                    raise RowError(i, col, f"entity {eid} changes {col} from "
                                           f"{getattr(key0, col)!r} to {getattr(key, col)!r}", path)
        else:
            keys[eid] = (key, i)
        if year in pd_bs[eid] and pd_bs[eid][year][0] != p_bs:
            raise RowError(i, "pd_bs", f"entity {eid} has conflicting baseline PDs at {year} "
                                       f"(first seen in row {pd_bs[eid][year][1]})", path)
        pd_bs[eid].setdefault(year, (p_bs, i))
        if p_sc is None:
            missing += 1
        else:
            pd_sc[eid][(scenario, year)] = p_sc

    entities = []
    for eid in sorted(keys):
        key = keys[eid][0]
        if declared is not None:
            for s in declared:
                for y in pd_bs[eid]:
                    if (eid, s, y) not in seen:
                        missing += 1
        entities.append(EntityObservation(
            eid, key.as_features(),
            {y: v for y, (v, _) in sorted(pd_bs[eid].items())},
            dict(sorted(pd_sc[eid].items())),
        ))
    if missing:
        warnings.warn(MissingSnapshot(f"{path}: {missing} scenario PDs missing; affected entities "
                                      f"are excluded from those fits"), stacklevel=2)
    return entities


def write_entity_sample(entities: Iterable[EntityObservation], path) -> Path:
    rows = []
    for e in sorted(entities, key=lambda e: e.entity_id):
        f = e.features
        for scenario, year in sorted(e.pd_sc):
            rows.append([e.entity_id, f["industry"], f["region"], str(f["credit_bucket"]),
                         scenario, str(year), fmt(e.pd_bs[year]), fmt(e.pd_sc[(scenario, year)])])
    return _write(path, SAMPLE_COLUMNS, rows)


# --------------------------------------------------------------------------
# delta tables


def load_delta_tables(path, scheme: ClassificationScheme | None = None) -> dict[str, DeltaTable]:
    """All scenarios in a delta file, keyed by scenario label."""
    _, rows = _read_rows(path, DELTA_COLUMNS)
    entries: dict[str, dict] = defaultdict(dict)
    for i, rec in rows:
        scenario = rec["scenario"].strip()
        if not scenario:
            raise RowError(i, "scenario", "empty value", path)
        key = _key(i, rec, scheme, path)
        year = _int(i, "year", rec["year"], path)
        delta = _float(i, "delta", rec["delta"], path)
        if (key, year) in entries[scenario]:
            raise RowError(i, "year", f"duplicate key (scenario={scenario}, {tuple(key)}, year={year})", path)
        entries[scenario][(key, year)] = delta
    return {s: DeltaTable(s, e) for s, e in sorted(entries.items())}


def load_delta_table(path, scenario: str, scheme: ClassificationScheme | None = None) -> DeltaTable:
    tables = load_delta_tables(path, scheme)
    if scenario not in tables:
        raise UnknownScenario(f"{path}: no adjustments for scenario {scenario!r} "
                              f"(available: {', '.join(tables) or 'none'})")
    return tables[scenario]


def write_delta_tables(tables: DeltaTable | Iterable[DeltaTable] | dict, path) -> Path:
    if isinstance(tables, DeltaTable):
        tables = [tables]
    elif isinstance(tables, dict):
        tables = list(tables.values())
    rows = []
    for table in sorted(tables, key=lambda t: t.scenario_id):
        for (key, year) in sorted(table.entries):
            rows.append([table.scenario_id, key.industry, key.region, str(key.credit_bucket),
                         str(year), fmt(table.entries[(key, year)])])
    return _write(path, DELTA_COLUMNS, rows)


write_delta_table = write_delta_tables


def write_truth(truth: dict, path) -> Path:
    ordered = sorted(truth.items(), key=lambda kv: (kv[0][1], kv[0][2], kv[0][0]))
    rows = [[k.industry, k.region, str(k.credit_bucket), s, str(y), fmt(d)] for (k, s, y), d in ordered]
    return _write(path, TRUTH_COLUMNS, rows)


# --------------------------------------------------------------------------
# calibration and run outputs


def _json(mapping: dict) -> str:
    return json.dumps({k: mapping[k] for k in sorted(mapping)}, separators=(",", ":"))


def write_diagnostics(result: CalibrationResult, path) -> Path:
    rows = []
    for f in result.fits:
        rows.append([
            f.scenario, str(f.snapshot_year), f.bucket_label, str(f.n_obs), str(f.n_missing),
            fmt(f.alpha), _json(f.betas), _json(f.std_errors), _json(f.t_stats), _json(f.p_values),
            fmt(f.r_squared), fmt(f.f_stat), fmt(f.f_pvalue), str(f.df_model), str(f.df_resid),
            ";".join(f.dropped_categories), str(f.fallback_used).lower(),
        ])
    return _write(path, DIAGNOSTIC_COLUMNS, rows)


def write_calibration_errors(result: CalibrationResult, path) -> Path:
    return _write(path, CALIBRATION_ERROR_COLUMNS,
                  [[s, str(y), b, msg] for s, y, b, msg in result.errors])


def load_results(path) -> list[dict]:
    _, rows = _read_rows(path, RESULT_COLUMNS)
    out = []
    for i, rec in rows:
        for col in ("ecl_bs", "ecl_sc", "delta_ecl"):
            rec[col] = _float(i, col, rec[col], path)
        rec["start_year"] = _int(i, "start_year", rec["start_year"], path)
        out.append(rec)
    return out


# --------------------------------------------------------------------------
# run configuration


def _list(text: str) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


def _int_range(text: str) -> tuple[int, ...]:
    text = text.strip()
    for sep in ("..", "-"):
        if sep in text and "," not in text:
            lo, hi = text.split(sep, 1)
            return tuple(range(int(lo), int(hi) + 1))
    return tuple(int(t) for t in _list(text))


@dataclass(frozen=True)
class RunConfig:
    """Run-level settings read from a flat ``key = value`` file."""

    start_year: int | None = None
    horizons: tuple[int, ...] = ()
    weights: tuple[float, ...] = (1.0,)
    lgd_mode: str = "frye_jacobs"
    min_bucket_size: int = 30
    scenarios: tuple[str, ...] | None = None
    snapshot_years: tuple[int, ...] | None = None
    homogeneous_features: tuple[str, ...] = ("industry",)
    regressor_features: tuple[tuple[str, str], ...] = (("credit_bucket", "ordinal"),
                                                       ("region", "categorical"))
    scheme: ClassificationScheme | None = None
    paths: dict[str, str] = field(default_factory=dict)
    synth: dict[str, str] = field(default_factory=dict)
    epsilon: float = EPS

    @property
    def run_years(self) -> tuple[int, ...]:
        if self.horizons:
            return self.horizons
        return () if self.start_year is None else (self.start_year,)

    def scenario_weights(self) -> ScenarioWeights:
        return ScenarioWeights(self.weights)

    def calibration_spec(self) -> CalibrationSpec:
        return CalibrationSpec(
            homogeneous_features=self.homogeneous_features,
            regressor_features=self.regressor_features,
            min_bucket_size=self.min_bucket_size,
            snapshot_years=self.snapshot_years,
            scenarios=self.scenarios,
            categories=None if self.scheme is None else self.scheme.categories(),
        )


PATH_KEYS = ("sample_path", "portfolio_path", "delta_path", "output_dir")
SYNTH_KEYS = ("seed", "n_entities", "n_exposures", "max_maturity", "noise_sd", "hazard_min",
              "hazard_max", "positive_delta", "n_ecl_scenarios")
CONFIG_KEYS = ("start_year", "horizons", "weights", "lgd_mode", "min_bucket_size", "scenarios",
               "snapshot_years", "homogeneous_features", "regressor_features", "industries",
               "regions", "credit_buckets", "epsilon") + PATH_KEYS + SYNTH_KEYS


def parse_run_config(text: str, source: str = "<config>") -> RunConfig:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",), interpolation=None)
    try:
        parser.read_string("[run]\n" + text, source=source)
    except configparser.Error as err:
        raise ConfigError(f"{source}: {err}") from None
    raw = dict(parser["run"])
    unknown = sorted(set(raw) - set(CONFIG_KEYS))
    if unknown:
        raise ConfigError(f"{source}: unknown keys {unknown}")

    def get(key, convert):
        if key not in raw:
            return None
        try:
            return convert(raw[key])
        except (ValueError, TypeError) as err:
            raise ConfigError(f"{source}: key {key}: {err}") from None

    kwargs: dict = {}
    if (v := get("start_year", int)) is not None:
        kwargs["start_year"] = v
    if (v := get("horizons", lambda s: tuple(int(x) for x in _list(s)))) is not None:
        kwargs["horizons"] = v
    if (v := get("weights", lambda s: tuple(float(x) for x in _list(s)))) is not None:
        kwargs["weights"] = v
    if (v := get("lgd_mode", str.strip)) is not None:
        if v not in LGD_MODES:
            raise ConfigError(f"{source}: key lgd_mode: expected one of {LGD_MODES}, got {v!r}")
        kwargs["lgd_mode"] = v
    if (v := get("min_bucket_size", int)) is not None:
        kwargs["min_bucket_size"] = v
    if (v := get("scenarios", lambda s: tuple(_list(s)))) is not None:
        kwargs["scenarios"] = v
    if (v := get("snapshot_years", lambda s: tuple(int(x) for x in _list(s)))) is not None:
        kwargs["snapshot_years"] = v
    if (v := get("homogeneous_features", lambda s: tuple(_list(s)))) is not None:
        kwargs["homogeneous_features"] = v
    if (v := get("regressor_features", lambda s: tuple(
            tuple(p.strip() for p in item.split(":", 1)) for item in _list(s)))) is not None:
        if any(len(p) != 2 for p in v):
            raise ConfigError(f"{source}: key regressor_features: use name:encoding pairs")
        kwargs["regressor_features"] = v
    if (v := get("epsilon", float)) is not None and v != EPS:
        raise ConfigError(f"{source}: key epsilon is fixed at {EPS!r}, got {v!r}")

    classification = [k for k in ("industries", "regions", "credit_buckets") if k in raw]
    if classification:
        if len(classification) != 3:
            raise ConfigError(f"{source}: industries, regions and credit_buckets must be given together")
        try:
            kwargs["scheme"] = ClassificationScheme(
                tuple(_list(raw["industries"])), tuple(_list(raw["regions"])),
                _int_range(raw["credit_buckets"]))
        except ValueError as err:
            raise ConfigError(f"{source}: classification: {err}") from None

    paths = {k: raw[k].strip() for k in PATH_KEYS if k in raw}
    empty = [k for k, v in paths.items() if not v]
    if empty:
        raise ConfigError(f"{source}: empty path for {empty}")
    kwargs["paths"] = paths
    kwargs["synth"] = {k: raw[k].strip() for k in SYNTH_KEYS if k in raw}

    try:
        config = RunConfig(**kwargs)
        config.scenario_weights()
        config.calibration_spec()
    except ValueError as err:
        raise ConfigError(f"{source}: {err}") from None
    return config


def load_run_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as err:
        raise ConfigError(f"{path}: cannot read configuration ({err.strerror})") from None
    return parse_run_config(text, str(path))
