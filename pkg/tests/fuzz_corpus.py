"""Corrupted-row corpus for the CSV loaders.

Each case starts from a small valid file, corrupts one row, and records the
data row and column the loader must report.
"""

from __future__ import annotations

from dataclasses import dataclass

from scenario_ecl.ingest import (DELTA_COLUMNS, PORTFOLIO_COLUMNS, SAMPLE_COLUMNS,
                                 ClassificationScheme, load_delta_tables, load_entity_sample,
                                 load_portfolio)

SCHEME = ClassificationScheme(("I01", "I02"), ("R1", "R2"), (1, 2, 3, 4, 5, 6))
SCENARIOS = ("sc", "alt")

PORTFOLIO = [
    ["E1", "I01", "R1", "2", "1", "1", "0.02", "0.4", "1000", "0.03"],
    ["E1", "I01", "R1", "2", "1", "2", "0.03", "0.4", "900", "0.03"],
    ["E2", "I02", "R2", "5", "1", "1", "0.05", "0.5", "500", "0.02"],
    ["E2", "I02", "R2", "5", "1", "2", "0.04", "0.5", "400", "0.02"],
]
SAMPLE = [
    ["N1", "I01", "R1", "1", "sc", "2030", "0.02", "0.03"],
    ["N1", "I01", "R1", "1", "sc", "2035", "0.02", "0.04"],
    ["N2", "I02", "R2", "4", "sc", "2030", "0.05", "0.06"],
    ["N2", "I02", "R2", "4", "sc", "2035", "0.05", "0.07"],
]
DELTA = [
    ["sc", "I01", "R1", "1", "2030", "0.1"],
    ["sc", "I01", "R1", "1", "2035", "0.2"],
    ["sc", "I02", "R2", "4", "2030", "0.3"],
    ["sc", "I02", "R2", "4", "2035", "0.4"],
]
BASE = {"portfolio": (PORTFOLIO_COLUMNS, PORTFOLIO), "sample": (SAMPLE_COLUMNS, SAMPLE),
        "delta": (DELTA_COLUMNS, DELTA)}


@dataclass(frozen=True)
class Case:
    name: str
    kind: str
    text: str
    row: int
    column: str


def render(columns, rows) -> str:
    return "\n".join(",".join(r) for r in [list(columns)] + rows) + "\n"


def load(kind: str, path):
    if kind == "portfolio":
        return load_portfolio(path, SCHEME)
    if kind == "sample":
        return load_entity_sample(path, SCHEME, SCENARIOS)
    return load_delta_tables(path, SCHEME)


def _set(kind, row, column, value, name):
    columns, rows = BASE[kind]
    rows = [list(r) for r in rows]
    rows[row - 1][columns.index(column)] = value
    return Case(name, kind, render(columns, rows), row, column)


def _append(kind, row, name, column, **changes):
    columns, rows = BASE[kind]
    rows = [list(r) for r in rows]
    extra = list(rows[row - 1])
    for col, value in changes.items():
        extra[columns.index(col)] = value
    rows.append(extra)
    return Case(name, kind, render(columns, rows), len(rows), column)


def build_corpus() -> list[Case]:
    cases = []
    bad_values = {
        "portfolio": {
            "pd_bs": ["1.5", "-0.1", "nan", "inf", "abc", ""],
            "lgd_bs": ["1.2", "-0.5", "nan", "1e400"],
            "ead": ["-1", "inf", "x"],
            "discount_rate": ["-1", "-2.5", "nan"],
            "industry": ["I99", ""],
            "region": ["R9", ""],
            "credit_bucket": ["0", "7", "x", "2.5"],
            "ecl_scenario_index": ["0", "a"],
            "year_index": ["0", "-1"],
            "exposure_id": [""],
        },
        "sample": {
            "pd_bs": ["1.5", "-0.1", "nan"],
            "pd_sc": ["2", "-1", "inf", "x"],
            "industry": ["I99"],
            "region": ["ZZ"],
            "credit_bucket": ["9"],
            "scenario": ["ghost", ""],
            "snapshot_year": ["x"],
            "entity_id": [""],
        },
        "delta": {
            "delta": ["nan", "inf", "-inf", "x", ""],
            "industry": ["I99"],
            "region": ["R7"],
            "credit_bucket": ["9", "-3"],
            "year": ["x"],
            "scenario": [""],
        },
    }
    for kind, columns in bad_values.items():
        for column, values in columns.items():
            for j, value in enumerate(values):
                row = 1 + (j % 3)
                cases.append(_set(kind, row, column, value, f"{kind}-{column}-{value or 'empty'}"))

    cases.append(_append("portfolio", 2, "portfolio-duplicate", "year_index"))
    cases.append(_append("sample", 3, "sample-duplicate", "snapshot_year"))
    cases.append(_append("delta", 4, "delta-duplicate", "year"))
    cases.append(_set("portfolio", 2, "region", "R2", "portfolio-region-changes"))
    cases.append(_set("portfolio", 4, "discount_rate", "0.05", "portfolio-rate-changes"))
    cases.append(_set("sample", 2, "credit_bucket", "3", "sample-bucket-changes"))
    cases.append(_append("sample", 1, "sample-conflicting-baseline", "pd_bs",
                         scenario="alt", pd_bs="0.09"))
    # year 3 present without year 2 leaves a gap in the exposure's grid
    cases.append(_set("portfolio", 4, "year_index", "3", "portfolio-year-gap"))

    columns, rows = BASE["portfolio"]
    short = [list(r) for r in rows]
    short[2] = short[2][:-2]
    cases.append(Case("portfolio-short-row", "portfolio", render(columns, short), 3, "ead"))
    return cases
