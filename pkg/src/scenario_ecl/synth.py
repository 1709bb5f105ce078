"""
Synthetic entity samples and portfolios with a planted logit-shift model.

Scenario PDs are generated as ``sigmoid(logit(pd_bs) + delta + noise)`` with
``delta = alpha + beta_credit * credit_bucket + beta_region[region]`` per
(industry, scenario, snapshot year), so calibration has a known target.

All draws come from numpy's PCG64 generator seeded by ``SynthConfig.seed``
and are taken in a fixed order; the same config always yields the same
sample.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .calibration import EntityObservation
from .ecl import ExposureRecord, ScenarioLeg
from .overlay import BucketKey, DeltaTable, logit, sigmoid
from .pd_term import constant_hazard


@dataclass(frozen=True)
class PlantedCoefficients:
    alpha: float
    beta_credit: float
    beta_region: Mapping[str, float]

    def delta(self, region: str, credit_bucket: int) -> float:
        return self.alpha + self.beta_credit * credit_bucket + self.beta_region.get(region, 0.0)


@dataclass(frozen=True)
class SynthConfig:
    """Generator settings.

    ``planted`` maps ``(industry, scenario, snapshot_year)`` to
    coefficients; cells left out are drawn from the seed. With
    ``positive_delta`` every drawn coefficient is non-negative and alpha is
    strictly positive, so every planted delta is positive.
    """

    seed: int = 0
    n_entities: int = 1000
    industries: tuple[str, ...] = ("I01", "I02", "I03")
    regions: tuple[str, ...] = ("R1", "R2", "R3")
    credit_buckets: tuple[int, ...] = (1, 2, 3, 4, 5, 6)
    scenarios: tuple[str, ...] = ("transition",)
    snapshot_years: tuple[int, ...] = (2030, 2035, 2040)
    noise_sd: float = 0.05
    hazard_range: tuple[float, float] = (0.002, 0.08)
    positive_delta: bool = False
    planted: Mapping[tuple[str, str, int], PlantedCoefficients] = field(default_factory=dict)
    n_ecl_scenarios: int = 3

    def __post_init__(self) -> None:
        if self.n_entities < 1:
            raise ValueError("n_entities must be at least 1")
        if not self.noise_sd >= 0:
            raise ValueError("noise_sd must be non-negative")
        lo, hi = self.hazard_range
        if not 0.0 < lo <= hi < 1.0:
            raise ValueError(f"hazard range must lie inside (0, 1), got {self.hazard_range}")
        if not (self.industries and self.regions and self.credit_buckets):
            raise ValueError("every classification dimension needs at least one code")
        if self.n_ecl_scenarios < 1:
            raise ValueError("n_ecl_scenarios must be at least 1")


@dataclass
class SyntheticSample:
    entities: list[EntityObservation]
    coefficients: dict[tuple[str, str, int], PlantedCoefficients]
    truth: dict[tuple[BucketKey, str, int], float]

    def delta_tables(self) -> dict[str, DeltaTable]:
        """Planted deltas as one table per scenario."""
        by_scenario: dict[str, dict] = {}
        for (key, scenario, year), delta in self.truth.items():
            by_scenario.setdefault(scenario, {})[(key, year)] = delta
        return {s: DeltaTable(s, entries) for s, entries in sorted(by_scenario.items())}


def _draw_coefficients(rng: np.random.Generator, config: SynthConfig) -> PlantedCoefficients:
    if config.positive_delta:
        alpha = rng.uniform(0.1, 0.6)
        beta_credit = rng.uniform(0.0, 0.15)
        regional = rng.uniform(0.0, 0.3, size=len(config.regions) - 1)
    else:
        alpha = rng.uniform(-0.5, 0.5)
        beta_credit = rng.uniform(-0.1, 0.2)
        regional = rng.uniform(-0.3, 0.3, size=len(config.regions) - 1)
    # first region is the generator's reference level
    beta_region = {config.regions[0]: 0.0}
    beta_region.update({r: float(b) for r, b in zip(config.regions[1:], regional)})
    return PlantedCoefficients(float(alpha), float(beta_credit), beta_region)


def generate_sample(config: SynthConfig) -> SyntheticSample:
    rng = np.random.Generator(np.random.PCG64(config.seed))
    coefficients = {}
    for industry in config.industries:
        for scenario in config.scenarios:
            for year in config.snapshot_years:
                cell = (industry, scenario, year)
                drawn = _draw_coefficients(rng, config)
                coefficients[cell] = config.planted.get(cell, drawn)

    truth = {}
    for (industry, scenario, year), coef in coefficients.items():
        for region in config.regions:
            for cb in config.credit_buckets:
                truth[(BucketKey(industry, region, int(cb)), scenario, year)] = coef.delta(region, cb)

    log_lo, log_hi = math.log(config.hazard_range[0]), math.log(config.hazard_range[1])
    entities = []
    width = len(str(config.n_entities))
    for i in range(config.n_entities):
        industry = config.industries[rng.integers(len(config.industries))]
        region = config.regions[rng.integers(len(config.regions))]
        cb = int(config.credit_buckets[rng.integers(len(config.credit_buckets))])
        pd_bs, pd_sc = {}, {}
        for year in config.snapshot_years:
            p = math.exp(rng.uniform(log_lo, log_hi))
            pd_bs[year] = p
            for scenario in config.scenarios:
                noise = rng.normal(0.0, config.noise_sd) if config.noise_sd > 0 else 0.0
                delta = coefficients[(industry, scenario, year)].delta(region, cb)
                pd_sc[(scenario, year)] = sigmoid(logit(p) + delta + noise)
        entities.append(EntityObservation(
            f"N{i + 1:0{width}d}",
            {"industry": industry, "region": region, "credit_bucket": cb},
            pd_bs, pd_sc,
        ))
    return SyntheticSample(entities, coefficients, truth)


def generate_portfolio(config: SynthConfig, n_exposures: int, max_maturity: int) -> list[ExposureRecord]:
    """Exposures with constant-hazard PD curves, flat LGDs and amortizing EADs.

    Uses a generator stream independent of :func:`generate_sample` (seeded
    with ``[seed, 1]``) so changing the sample size does not reshuffle the
    portfolio.
    """
    if n_exposures < 0 or max_maturity < 1:
        raise ValueError("need n_exposures >= 0 and max_maturity >= 1")
    rng = np.random.Generator(np.random.PCG64([config.seed, 1]))
    lo, hi = config.hazard_range
    width = len(str(max(n_exposures, 1)))
    exposures = []
    for i in range(n_exposures):
        key = BucketKey(
            config.industries[rng.integers(len(config.industries))],
            config.regions[rng.integers(len(config.regions))],
            int(config.credit_buckets[rng.integers(len(config.credit_buckets))]),
        )
        n = int(rng.integers(1, max_maturity + 1))
        rate = float(rng.uniform(0.01, 0.06))
        principal = float(rng.uniform(1e4, 1e6))
        ead = principal * (n - np.arange(n)) / n
        legs = []
        for _ in range(config.n_ecl_scenarios):
            h = float(rng.uniform(lo, hi))
            lgd = float(rng.uniform(0.2, 0.8))
            legs.append(ScenarioLeg(constant_hazard(h, n), np.full(n, lgd), ead))
        exposures.append(ExposureRecord(f"E{i + 1:0{width}d}", key, rate, tuple(legs)))
    return exposures
