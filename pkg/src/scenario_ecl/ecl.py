"""
Lifetime expected credit loss, baseline and scenario-adjusted.

For each exposure::

    ECL = sum_k w_k sum_t PV(pd_k[t] * lgd_k[t] * ead_k[t])

over the ``m`` ECL scenarios of the provisioning model. The scenario ECL
uses the same sum with PDs pushed through the logit overlay and LGDs either
proxied with Frye-Jacobs or supplied directly; EAD never moves. IFRS 9
staging is not applied, every exposure is measured over its full life.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Literal, Sequence

import numpy as np

from .errors import DimensionMismatch, MismatchedExposure, ScenarioEclError
from .lgd import frye_jacobs
from .overlay import BucketKey, DeltaTable, adjust_term_structure
from .pd_term import PdTermStructure

LgdMode = Literal["frye_jacobs", "direct"]
LGD_MODES = ("frye_jacobs", "direct")


@dataclass(frozen=True)
class ScenarioWeights:
    """Probability weights of the provisioning model's ECL scenarios."""

    weights: tuple[float, ...]

    def __post_init__(self) -> None:
        w = tuple(float(x) for x in self.weights)
        if not w:
            raise ValueError("at least one scenario weight is required")
        if any(not math.isfinite(x) or x < 0 for x in w):
            raise ValueError(f"weights must be finite and non-negative, got {w}")
        if abs(math.fsum(w) - 1.0) > 1e-9:
            raise ValueError(f"weights must sum to 1, got {math.fsum(w)!r}")
        object.__setattr__(self, "weights", w)

    @property
    def m(self) -> int:
        return len(self.weights)


@dataclass(frozen=True, eq=False)
class ScenarioLeg:
    """Per-year inputs of one exposure under one ECL scenario."""

    pd_bs: PdTermStructure
    lgd_bs: np.ndarray
    ead: np.ndarray
    lgd_sc: np.ndarray | None = None

    def __post_init__(self) -> None:
        pd = self.pd_bs
        if not isinstance(pd, PdTermStructure):
            pd = PdTermStructure(pd, "unconditional")
            object.__setattr__(self, "pd_bs", pd)
        if pd.kind != "unconditional":
            raise ValueError("baseline PDs must be unconditional")
        for name in ("lgd_bs", "ead", "lgd_sc"):
            v = getattr(self, name)
            if v is None:
                continue
            arr = np.array(v, dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
            if arr.shape != (pd.n,):
                raise DimensionMismatch(f"{name} has {arr.size} years, PD curve has {pd.n}")
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} must be finite")
        if np.any(self.lgd_bs < 0) or np.any(self.lgd_bs > 1):
            raise ValueError("lgd_bs must lie in [0, 1]")
        if self.lgd_sc is not None and (np.any(self.lgd_sc < 0) or np.any(self.lgd_sc > 1)):
            raise ValueError("lgd_sc must lie in [0, 1]")
        if np.any(self.ead < 0):
            raise ValueError("ead must be non-negative")


@dataclass(frozen=True, eq=False)
class ExposureRecord:
    """One provisioned exposure with its per-ECL-scenario term structures."""

    id: str
    key: BucketKey
    discount_rate: float
    legs: tuple[ScenarioLeg, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "key", BucketKey(*self.key))
        object.__setattr__(self, "legs", tuple(self.legs))
        if not self.legs:
            raise ValueError(f"exposure {self.id}: no ECL scenarios")
        if not (math.isfinite(self.discount_rate) and self.discount_rate > -1.0):
            raise ValueError(f"exposure {self.id}: discount rate must exceed -1")
        lengths = {leg.pd_bs.n for leg in self.legs}
        if len(lengths) != 1:
            raise DimensionMismatch(
                f"exposure {self.id}: ECL scenarios disagree on maturity {sorted(lengths)}"
            )

    @property
    def maturity(self) -> int:
        return self.legs[0].pd_bs.n

    @property
    def m(self) -> int:
        return len(self.legs)

    def scaled(self, factor: float) -> "ExposureRecord":
        """Copy with every EAD multiplied by ``factor``."""
        legs = tuple(ScenarioLeg(l.pd_bs, l.lgd_bs, l.ead * factor, l.lgd_sc) for l in self.legs)
        return ExposureRecord(self.id, self.key, self.discount_rate, legs)


@dataclass(frozen=True, eq=False)
class EclPartial:
    """Weighted ECL of one exposure under one PD/LGD set.

    ``per_year[t-1]`` is the weighted PV contribution of year ``t``.
    """

    exposure_id: str
    total: float
    per_year: np.ndarray


@dataclass(frozen=True, eq=False)
class EclBreakdown:
    exposure_id: str
    ecl_bs: float
    ecl_sc: float
    delta_ecl: float
    per_year: tuple[tuple[int, float, float], ...]


def present_value(amount: float, rate: float, t: int) -> float:
    """End-of-year discounting: ``amount * (1 + rate) ** -t``."""
    if not rate > -1.0:
        raise ValueError(f"rate must exceed -1, got {rate}")
    if t < 1:
        raise ValueError(f"t must be at least 1, got {t}")
    return amount * (1.0 + rate) ** (-t)


def _weighted(exposure: ExposureRecord, weights: ScenarioWeights,
              yearly_losses: Sequence[np.ndarray]) -> EclPartial:
    if weights.m != exposure.m:
        raise DimensionMismatch(
            f"exposure {exposure.id}: {exposure.m} ECL scenarios but {weights.m} weights"
        )
    n = exposure.maturity
    pv = np.array([present_value(1.0, exposure.discount_rate, t) for t in range(1, n + 1)])
    per_year = np.zeros(n)
    for w, loss in zip(weights.weights, yearly_losses):
        per_year += w * (loss * pv)
    return EclPartial(exposure.id, math.fsum(per_year), per_year)


def ecl_baseline(exposure: ExposureRecord, weights: ScenarioWeights) -> EclPartial:
    losses = [leg.pd_bs.values * leg.lgd_bs * leg.ead for leg in exposure.legs]
    return _weighted(exposure, weights, losses)


def scenario_parameters(leg: ScenarioLeg, key: BucketKey, table: DeltaTable, start_year: int,
                        lgd_mode: LgdMode = "frye_jacobs") -> tuple[np.ndarray, np.ndarray]:
    """Scenario (pd, lgd) per year for one ECL scenario leg."""
    pd_sc = adjust_term_structure(leg.pd_bs, table, key, start_year).values
    if lgd_mode == "frye_jacobs":
        lgd_sc = np.array([
            frye_jacobs(p0, l0, p1) for p0, l0, p1 in zip(leg.pd_bs.values, leg.lgd_bs, pd_sc)
        ])
    elif lgd_mode == "direct":
        if leg.lgd_sc is None:
            raise ValueError("lgd_mode 'direct' needs scenario LGDs on every exposure")
        lgd_sc = leg.lgd_sc
    else:
        raise ValueError(f"unknown lgd_mode {lgd_mode!r}, expected one of {LGD_MODES}")
    return pd_sc, lgd_sc


def ecl_scenario(exposure: ExposureRecord, weights: ScenarioWeights, table: DeltaTable,
                 start_year: int, lgd_mode: LgdMode = "frye_jacobs") -> EclPartial:
    losses = []
    for leg in exposure.legs:
        pd_sc, lgd_sc = scenario_parameters(leg, exposure.key, table, start_year, lgd_mode)
        losses.append(pd_sc * lgd_sc * leg.ead)
    return _weighted(exposure, weights, losses)


def delta_ecl(bs: EclPartial, sc: EclPartial) -> EclBreakdown:
    if bs.exposure_id != sc.exposure_id:
        raise MismatchedExposure(f"baseline is for {bs.exposure_id!r}, scenario for {sc.exposure_id!r}")
    if bs.per_year.shape != sc.per_year.shape:
        raise MismatchedExposure(f"exposure {bs.exposure_id!r}: per-year breakdowns differ in length")
    per_year = tuple(
        (t, float(b), float(s)) for t, (b, s) in enumerate(zip(bs.per_year, sc.per_year), start=1)
    )
    return EclBreakdown(bs.exposure_id, bs.total, sc.total, sc.total - bs.total, per_year)


@dataclass(frozen=True)
class Aggregate:
    ecl_bs: float
    ecl_sc: float
    delta_ecl: float


@dataclass
class PortfolioResult:
    """Per-exposure breakdowns (sorted by id), aggregates and the error ledger.

    ``aggregates`` maps ``(dimension, key)`` to totals, with dimensions
    ``industry``, ``region``, ``credit_bucket`` and ``total`` (key ``"all"``).
    """

    breakdowns: list[EclBreakdown] = field(default_factory=list)
    aggregates: dict[tuple[str, str], Aggregate] = field(default_factory=dict)
    errors: list[tuple[str, str]] = field(default_factory=list)

    @property
    def total(self) -> Aggregate:
        return self.aggregates.get(("total", "all"), Aggregate(0.0, 0.0, 0.0))


AGGREGATE_DIMENSIONS = ("industry", "region", "credit_bucket", "total")


def aggregate(breakdowns: Iterable[EclBreakdown],
              keys: dict[str, BucketKey]) -> dict[tuple[str, str], Aggregate]:
    groups: dict[tuple[str, str], list[EclBreakdown]] = defaultdict(list)
    for b in breakdowns:
        key = keys[b.exposure_id]
        groups[("industry", key.industry)].append(b)
        groups[("region", key.region)].append(b)
        groups[("credit_bucket", str(key.credit_bucket))].append(b)
        groups[("total", "all")].append(b)
    groups.setdefault(("total", "all"), [])
    order = {d: i for i, d in enumerate(AGGREGATE_DIMENSIONS)}
    out = {}
    for gk in sorted(groups, key=lambda k: (order[k[0]], k[1])):
        members = groups[gk]
        out[gk] = Aggregate(
            math.fsum(b.ecl_bs for b in members),
            math.fsum(b.ecl_sc for b in members),
            math.fsum(b.delta_ecl for b in members),
        )
    return out


def evaluate_exposure(exposure: ExposureRecord, weights: ScenarioWeights, table: DeltaTable,
                      start_year: int, lgd_mode: LgdMode = "frye_jacobs") -> EclBreakdown:
    return delta_ecl(
        ecl_baseline(exposure, weights),
        ecl_scenario(exposure, weights, table, start_year, lgd_mode),
    )


def run_portfolio(exposures: Iterable[ExposureRecord], weights: ScenarioWeights,
                  table: DeltaTable, start_year: int,
                  lgd_mode: LgdMode = "frye_jacobs") -> PortfolioResult:
    """Evaluate every exposure; failures go to ``errors`` instead of aborting.

    Output order is by exposure id regardless of input order.
    """
    if lgd_mode not in LGD_MODES:
        raise ValueError(f"unknown lgd_mode {lgd_mode!r}, expected one of {LGD_MODES}")
    result = PortfolioResult()
    keys = {}
    for exp in sorted(exposures, key=lambda e: e.id):
        try:
            breakdown = evaluate_exposure(exp, weights, table, start_year, lgd_mode)
        except (ScenarioEclError, ValueError) as err:
            result.errors.append((exp.id, f"{type(err).__name__}: {err}"))
            continue
        keys[exp.id] = exp.key
        result.breakdowns.append(breakdown)
    result.aggregates = aggregate(result.breakdowns, keys)
    return result
