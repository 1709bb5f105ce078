"""
Logit PD overlay and scenario adjustment tables.

A scenario moves a baseline PD ``p`` to ``sigmoid(logit(p) + delta)``, where
``delta`` is a logit-space add-on looked up per (industry, region, credit
bucket) and calendar year. Over a term structure the overlay acts on the
annual conditional PDs, and the unconditional curve is rebuilt afterwards.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, NamedTuple

import numpy as np

from .errors import NonFiniteDelta, UnknownBucket
from .pd_term import PdTermStructure, to_conditional, to_unconditional

#: logit domain clamp, shared by calibration so the two transforms invert exactly
EPS = 1e-12
_ABOVE_ZERO = math.nextafter(0.0, 1.0)
_BELOW_ONE = math.nextafter(1.0, 0.0)


class BucketKey(NamedTuple):
    industry: str
    region: str
    credit_bucket: int

    def as_features(self) -> dict:
        return {"industry": self.industry, "region": self.region,
                "credit_bucket": self.credit_bucket}


def clamp_probability(p: float) -> float:
    return min(max(p, EPS), 1.0 - EPS)


def logit(p: float) -> float:
    """``ln(p / (1 - p))`` after clamping ``p`` to ``[EPS, 1 - EPS]``."""
    p = clamp_probability(p)
    return math.log(p) - math.log1p(-p)


def sigmoid(z: float) -> float:
    if z >= 0.0:
        return 1.0 / (1.0 + math.exp(-z))
    e = math.exp(z)
    return e / (1.0 + e)


def apply_overlay(p: float, delta: float) -> float:
    """Scenario-adjusted PD ``sigmoid(logit(p) + delta)``.

    >>> apply_overlay(0.5, math.log(3.0))
    0.75
    """
    if not math.isfinite(delta):
        raise NonFiniteDelta(f"delta must be finite, got {delta!r}")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability must lie in [0, 1], got {p!r}")
    # extreme deltas would otherwise round onto 0 or 1
    return min(max(sigmoid(logit(p) + delta), _ABOVE_ZERO), _BELOW_ONE)


@dataclass(frozen=True)
class DeltaTable:
    """Logit add-ons for one scenario, keyed by (BucketKey, snapshot year).

    Values between two snapshot years of the same key are interpolated
    linearly; outside the covered years the nearest snapshot is held flat.
    """

    scenario_id: str
    entries: Mapping[tuple[BucketKey, int], float]
    snapshot_years: tuple[int, ...] = ()
    _curves: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        entries = {}
        for (key, year), value in self.entries.items():
            key = BucketKey(str(key[0]), str(key[1]), int(key[2]))
            value = float(value)
            if not math.isfinite(value):
                raise NonFiniteDelta(f"{self.scenario_id}: delta for {tuple(key)}, {year} is {value}")
            entries[(key, int(year))] = value
        years = tuple(sorted({int(y) for y in self.snapshot_years} | {y for _, y in entries}))
        if self.snapshot_years and set(years) != {int(y) for y in self.snapshot_years}:
            extra = sorted(set(years) - {int(y) for y in self.snapshot_years})
            raise ValueError(f"{self.scenario_id}: entries use undeclared snapshot years {extra}")
        curves: dict[BucketKey, tuple[list[int], list[float]]] = {}
        for (key, year) in sorted(entries):
            ys, vs = curves.setdefault(key, ([], []))
            ys.append(year)
            vs.append(entries[(key, year)])
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "snapshot_years", years)
        object.__setattr__(self, "_curves", curves)

    @property
    def keys(self) -> list[BucketKey]:
        return sorted(self._curves)

    def __len__(self) -> int:
        return len(self.entries)

    def lookup(self, key: BucketKey, year: int) -> float:
        return lookup_delta(self, key, year)

    @classmethod
    def constant(cls, scenario_id: str, keys: Iterable[BucketKey], delta: float,
                 years: Iterable[int] = (0,)) -> "DeltaTable":
        """Table with the same add-on for every key and year."""
        return cls(scenario_id, {(k, y): delta for k in keys for y in years})


def lookup_delta(table: DeltaTable, key: BucketKey, year: int) -> float:
    """Add-on for ``key`` at calendar ``year``.

    Raises
    ------
    UnknownBucket
        No entry exists for ``key`` in any snapshot year.
    """
    try:
        years, values = table._curves[BucketKey(*key)]
    except (KeyError, TypeError, ValueError):
        raise UnknownBucket(
            f"scenario {table.scenario_id!r} has no adjustment for bucket {tuple(key)}"
        ) from None
    if year <= years[0]:
        return values[0]
    if year >= years[-1]:
        return values[-1]
    i = bisect.bisect_right(years, year)
    y0, y1 = years[i - 1], years[i]
    if year == y0:
        return values[i - 1]
    w = (year - y0) / (y1 - y0)
    return values[i - 1] + w * (values[i] - values[i - 1])


def adjust_term_structure(pd_bs: PdTermStructure, table: DeltaTable, key: BucketKey,
                          start_year: int) -> PdTermStructure:
    """Scenario-adjusted unconditional PDs for one exposure.

    Year ``t`` of the exposure (1-based) is calendar year ``start_year + t - 1``.
    """
    cpd = to_conditional(pd_bs)
    adjusted = np.array([
        apply_overlay(c, lookup_delta(table, key, start_year + t))
        for t, c in enumerate(cpd.values)
    ])
    return to_unconditional(PdTermStructure(adjusted, "conditional"))
