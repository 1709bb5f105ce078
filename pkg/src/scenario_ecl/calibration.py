"""
Sectoral calibration of logit PD adjustments.

Entities are split into buckets by the homogeneous features (for instance
industry). Inside a bucket, for each scenario and snapshot year, the logit
PD shift ``logit(pd_sc) - logit(pd_bs)`` is regressed on the remaining
features (credit bucket as an ordinal, region as dummies). Evaluating the
fitted line at a bucket key's feature values gives that key's add-on delta.
"""

from __future__ import annotations

import itertools
import math
import warnings
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (DegenerateSystem, EmptyBucket, InconsistentBucket, MissingSnapshot,
                     ScenarioEclError, UnknownCategory)
from .overlay import BucketKey, DeltaTable, logit
from .special import f_sf, student_t_two_sided

ENCODINGS = ("ordinal", "categorical")
INTERCEPT = "intercept"


@dataclass(frozen=True)
class EntityObservation:
    """One sample entity with its features and forecast PDs.

    ``pd_bs`` maps snapshot year to baseline PD; ``pd_sc`` maps
    ``(scenario, snapshot year)`` to scenario PD.
    """

    entity_id: str
    features: Mapping[str, object]
    pd_bs: Mapping[int, float]
    pd_sc: Mapping[tuple[str, int], float]

    def __post_init__(self) -> None:
        for label, pds in (("pd_bs", self.pd_bs.values()), ("pd_sc", self.pd_sc.values())):
            for p in pds:
                if not (math.isfinite(p) and 0.0 <= p <= 1.0):
                    raise ValueError(f"entity {self.entity_id}: {label} value {p!r} outside [0, 1]")
        orphans = sorted({y for _, y in self.pd_sc} - set(self.pd_bs))
        if orphans:
            raise ValueError(f"entity {self.entity_id}: scenario PDs at years {orphans} lack a baseline")


@dataclass(frozen=True)
class CalibrationSpec:
    """Which features define buckets and which enter the regression.

    ``regressor_features`` pairs each feature name with ``"ordinal"`` or
    ``"categorical"``. ``None`` means every feature not in
    ``homogeneous_features``, with integers treated as ordinal. ``scenarios``
    and ``snapshot_years`` default to whatever the sample contains.
    ``categories`` optionally registers the admissible values per feature.
    """

    homogeneous_features: tuple[str, ...] = ("industry",)
    regressor_features: tuple[tuple[str, str], ...] | None = (
        ("credit_bucket", "ordinal"), ("region", "categorical"))
    min_bucket_size: int = 30
    snapshot_years: tuple[int, ...] | None = None
    scenarios: tuple[str, ...] | None = None
    categories: Mapping[str, Sequence] | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "homogeneous_features", tuple(self.homogeneous_features))
        if self.regressor_features is not None:
            regs = tuple((str(n), str(e)) for n, e in self.regressor_features)
            object.__setattr__(self, "regressor_features", regs)
            for name, enc in regs:
                if enc not in ENCODINGS:
                    raise ValueError(f"feature {name}: encoding must be one of {ENCODINGS}, got {enc!r}")
            overlap = set(self.homogeneous_features) & {n for n, _ in regs}
            if overlap:
                raise ValueError(f"features {sorted(overlap)} are both bucket-defining and regressors")
        if self.min_bucket_size < 1:
            raise ValueError("min_bucket_size must be at least 1")

    def regressors_for(self, sample: Sequence[EntityObservation]) -> tuple[tuple[str, str], ...]:
        if self.regressor_features is not None:
            return self.regressor_features
        names = sorted({k for e in sample for k in e.features} - set(self.homogeneous_features))
        out = []
        for name in names:
            values = [e.features[name] for e in sample if name in e.features]
            ordinal = all(isinstance(v, (int, np.integer)) and not isinstance(v, bool) for v in values)
            out.append((name, "ordinal" if ordinal else "categorical"))
        return tuple(out)


@dataclass(frozen=True)
class FeatureEncoding:
    name: str
    kind: str
    levels: tuple = ()          # dummy levels (categorical only), reference excluded
    reference: object = None    # dropped level (categorical only)


@dataclass(frozen=True, eq=False)
class Design:
    """Regression design matrix; the intercept is always the last column."""

    matrix: np.ndarray
    columns: tuple[str, ...]
    encodings: tuple[FeatureEncoding, ...]

    @property
    def dropped_categories(self) -> tuple[str, ...]:
        return tuple(f"{e.name}={e.reference}" for e in self.encodings if e.kind == "categorical")

    def encode(self, features: Mapping[str, object]) -> np.ndarray:
        """Design row for one feature vector; unseen or reference levels encode as 0."""
        row = []
        for enc in self.encodings:
            value = features[enc.name]
            if enc.kind == "ordinal":
                row.append(float(value))
            else:
                row.extend(1.0 if value == level else 0.0 for level in enc.levels)
        row.append(1.0)
        return np.array(row)


def _reference_level(values: Iterable) -> object:
    counts = Counter(values)
    top = max(counts.values())
    return min((v for v, c in counts.items() if c == top), key=str)


def build_design_matrix(entities: Sequence[EntityObservation], spec: CalibrationSpec,
                        regressors: Sequence[tuple[str, str]] | None = None) -> Design:
    """Encode regressors: ordinals as one column, categoricals as dummies.

    The most frequent level of each categorical is dropped as reference
    (ties go to the lexicographically smallest level).

    Raises
    ------
    UnknownCategory
        A categorical value is not among ``spec.categories`` for that feature.
    """
    if not entities:
        raise EmptyBucket("cannot build a design matrix without entities")
    regressors = spec.regressors_for(entities) if regressors is None else regressors
    registered = spec.categories or {}
    columns: list[np.ndarray] = []
    labels: list[str] = []
    encodings: list[FeatureEncoding] = []
    for name, kind in regressors:
        try:
            values = [e.features[name] for e in entities]
        except KeyError:
            raise KeyError(f"feature {name!r} missing from some entities") from None
        if name in registered:
            allowed = set(registered[name])
            for i, v in enumerate(values):
                if v not in allowed:
                    raise UnknownCategory(i + 1, name, v)
        if kind == "ordinal":
            columns.append(np.array(values, dtype=float))
            labels.append(name)
            encodings.append(FeatureEncoding(name, kind))
        else:
            ref = _reference_level(values)
            levels = tuple(sorted((v for v in set(values) if v != ref), key=str))
            for level in levels:
                columns.append(np.array([1.0 if v == level else 0.0 for v in values]))
                labels.append(f"{name}={level}")
            encodings.append(FeatureEncoding(name, kind, levels, ref))
    columns.append(np.ones(len(entities)))
    labels.append(INTERCEPT)
    return Design(np.column_stack(columns), tuple(labels), tuple(encodings))


@dataclass(frozen=True, eq=False)
class OlsFit:
    """Least-squares coefficients (intercept last) and diagnostics."""

    coef: np.ndarray
    std_errors: np.ndarray
    t_stats: np.ndarray
    p_values: np.ndarray
    cov: np.ndarray
    residuals: np.ndarray
    r_squared: float
    f_stat: float
    f_pvalue: float
    df_model: int
    df_resid: int
    n_obs: int
    rank: int
    rank_deficient: bool


def fit_ols(X, y, add_intercept: bool = True) -> OlsFit:
    """Ordinary least squares with the usual diagnostics.

    With ``add_intercept`` a constant column is appended; otherwise the last
    column of ``X`` must already be the intercept. Full-rank designs are
    solved by QR; rank-deficient ones get the minimum-norm (SVD) solution
    and ``rank_deficient`` is set.

    R^2 is taken as 0 when y has no variation. Statistics that need a
    positive residual degree of freedom are NaN otherwise.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    n = y.shape[0]
    if n == 0:
        raise DegenerateSystem("no observations to fit")
    if X.shape[0] != n:
        raise ValueError(f"X has {X.shape[0]} rows but y has {n} values")
    if add_intercept:
        X = np.column_stack([X, np.ones(n)])
    k = X.shape[1]

    rank = int(np.linalg.matrix_rank(X))
    if rank == k:
        q, r = np.linalg.qr(X)
        coef = np.linalg.solve(r, q.T @ y)
        r_inv = np.linalg.inv(r)
        xtx_inv = r_inv @ r_inv.T
    else:
        coef = np.linalg.lstsq(X, y, rcond=None)[0]
        x_pinv = np.linalg.pinv(X)
        xtx_inv = x_pinv @ x_pinv.T

    resid = y - X @ coef
    ssr = float(resid @ resid)
    centered = y - y.mean()
    sst = float(centered @ centered)
    df_model = rank - 1
    df_resid = n - rank
    r2 = 0.0 if sst == 0.0 else min(max(1.0 - ssr / sst, 0.0), 1.0)

    with np.errstate(divide="ignore", invalid="ignore"):
        if df_resid > 0:
            s2 = ssr / df_resid
            cov = s2 * xtx_inv
            se = np.sqrt(np.clip(np.diag(cov), 0.0, None))
            t = coef / se
            p = np.array([student_t_two_sided(float(v), df_resid) for v in t])
        else:
            cov = np.full((k, k), np.nan)
            se = t = p = np.full(k, np.nan)

    if df_model <= 0 or df_resid <= 0:
        f_stat = math.nan
    elif ssr == 0.0:
        f_stat = math.inf if sst > 0.0 else math.nan
    else:
        f_stat = ((sst - ssr) / df_model) / (ssr / df_resid)
    f_p = f_sf(f_stat, df_model, df_resid) if not math.isnan(f_stat) else math.nan

    return OlsFit(coef, se, t, p, cov, resid, r2, f_stat, f_p, df_model, df_resid, n, rank, rank < k)


def logit_differences(entities: Sequence[EntityObservation], scenario: str, snapshot_year: int
                      ) -> tuple[np.ndarray, list[EntityObservation]]:
    """Responses ``logit(pd_sc) - logit(pd_bs)`` in entity order.

    Returns the response vector and the entities that contributed to it.
    Entities lacking either PD at the snapshot are skipped with a single
    :class:`MissingSnapshot` warning carrying the count.
    """
    y, kept, missing = _responses(entities, scenario, snapshot_year)
    if missing:
        warnings.warn(
            MissingSnapshot(f"{missing} entities lack PDs for scenario {scenario!r} "
                            f"at {snapshot_year} and were excluded"),
            stacklevel=2,
        )
    return y, kept


def _responses(entities, scenario, year):
    y, kept, missing = [], [], 0
    for e in entities:
        p_sc = e.pd_sc.get((scenario, year))
        p_bs = e.pd_bs.get(year)
        if p_sc is None or p_bs is None:
            missing += 1
            continue
        y.append(logit(p_sc) - logit(p_bs))
        kept.append(e)
    return np.array(y, dtype=float), kept, missing


@dataclass(frozen=True, eq=False)
class RegressionFit:
    """One calibrated bucket regression (scenario, snapshot year, bucket)."""

    bucket: tuple[tuple[str, object], ...]
    scenario: str
    snapshot_year: int
    alpha: float
    betas: dict[str, float]
    std_errors: dict[str, float]
    t_stats: dict[str, float]
    p_values: dict[str, float]
    r_squared: float
    f_stat: float
    f_pvalue: float
    df_model: int
    df_resid: int
    n_obs: int
    dropped_categories: tuple[str, ...]
    fallback_used: bool
    design: Design = field(repr=False)
    cov: np.ndarray = field(repr=False)
    entity_ids: tuple[str, ...] = field(repr=False, default=())
    residuals: np.ndarray = field(repr=False, default=None)
    n_missing: int = 0

    @property
    def bucket_label(self) -> str:
        return ";".join(f"{k}={v}" for k, v in self.bucket)

    def predict(self, features: Mapping[str, object]) -> float:
        coef = np.array([self.betas[c] for c in self.design.columns[:-1]] + [self.alpha])
        return float(self.design.encode(features) @ coef)


def _bucket_items(bucket, spec: CalibrationSpec) -> tuple[tuple[str, object], ...]:
    if isinstance(bucket, Mapping):
        missing = set(spec.homogeneous_features) - set(bucket)
        if missing:
            raise InconsistentBucket(f"bucket lacks values for {sorted(missing)}")
        return tuple((f, bucket[f]) for f in spec.homogeneous_features)
    if isinstance(bucket, (str, int)):
        bucket = (bucket,)
    bucket = tuple(bucket)
    if len(bucket) != len(spec.homogeneous_features):
        raise InconsistentBucket(
            f"bucket {bucket} does not match homogeneous features {spec.homogeneous_features}")
    return tuple(zip(spec.homogeneous_features, bucket))


def calibrate_bucket(sample: Sequence[EntityObservation], bucket, scenario: str,
                     snapshot_year: int, spec: CalibrationSpec) -> RegressionFit:
    """Fit the logit-shift regression for one bucket, scenario and snapshot.

    ``bucket`` gives the homogeneous feature values, as a mapping or a tuple in
    ``spec.homogeneous_features`` order. Buckets with fewer than
    ``spec.min_bucket_size`` usable entities drop their categorical
    regressors and keep only the ordinal ones (``fallback_used``). A
    rank-deficient design also sets ``fallback_used``.
    """
    items = _bucket_items(bucket, spec)
    members = [e for e in sample if all(e.features.get(f) == v for f, v in items)]
    if not members:
        raise EmptyBucket(f"no entities in bucket {dict(items)}")
    y, kept, missing = _responses(members, scenario, snapshot_year)
    if not kept:
        raise DegenerateSystem(
            f"bucket {dict(items)}: no entity has PDs for {scenario!r} at {snapshot_year}")
    regressors = spec.regressors_for(sample)
    fallback = len(kept) < spec.min_bucket_size
    if fallback:
        regressors = tuple((n, k) for n, k in regressors if k == "ordinal")
    design = build_design_matrix(kept, spec, regressors)
    ols = fit_ols(design.matrix, y, add_intercept=False)
    names = design.columns[:-1]

    def by_column(values):
        return {c: float(v) for c, v in zip(design.columns, values)}

    return RegressionFit(
        bucket=items,
        scenario=scenario,
        snapshot_year=int(snapshot_year),
        alpha=float(ols.coef[-1]),
        betas={c: float(v) for c, v in zip(names, ols.coef[:-1])},
        std_errors=by_column(ols.std_errors),
        t_stats=by_column(ols.t_stats),
        p_values=by_column(ols.p_values),
        r_squared=ols.r_squared,
        f_stat=ols.f_stat,
        f_pvalue=ols.f_pvalue,
        df_model=ols.df_model,
        df_resid=ols.df_resid,
        n_obs=ols.n_obs,
        dropped_categories=design.dropped_categories,
        fallback_used=fallback or ols.rank_deficient,
        design=design,
        cov=ols.cov,
        entity_ids=tuple(e.entity_id for e in kept),
        residuals=ols.residuals,
        n_missing=missing,
    )


def _target_features(fit: RegressionFit, target) -> Mapping[str, object]:
    features = target.as_features() if isinstance(target, BucketKey) else dict(target)
    for name, value in fit.bucket:
        if features.get(name) != value:
            raise InconsistentBucket(
                f"target {features} is outside fitted bucket {fit.bucket_label}")
    return features


def extract_delta(fit: RegressionFit, target) -> float:
    """Fitted logit shift at ``target`` (a BucketKey or feature mapping).

    Reference categories, and levels the bucket never saw, contribute 0.
    """
    return fit.predict(_target_features(fit, target))


def delta_standard_error(fit: RegressionFit, target) -> float:
    """Standard error of :func:`extract_delta` from the coefficient covariance."""
    c = fit.design.encode(_target_features(fit, target))
    return float(math.sqrt(max(c @ fit.cov @ c, 0.0)))


@dataclass
class CalibrationResult:
    """Delta tables per scenario, every fit, and per-bucket failures.

    ``errors`` holds ``(scenario, snapshot_year, bucket_label, message)``.
    """

    tables: dict[str, DeltaTable] = field(default_factory=dict)
    fits: list[RegressionFit] = field(default_factory=list)
    errors: list[tuple[str, int, str, str]] = field(default_factory=list)

    @property
    def n_missing(self) -> int:
        return sum(f.n_missing for f in self.fits)


def _universe(sample, spec: CalibrationSpec, name: str) -> list:
    registered = (spec.categories or {}).get(name)
    values = registered if registered is not None else {e.features[name] for e in sample}
    return sorted(values, key=lambda v: (str(type(v)), v))


def calibrate_all(sample: Sequence[EntityObservation], spec: CalibrationSpec) -> CalibrationResult:
    """Fit every scenario x snapshot x bucket and emit one delta per bucket key.

    Each fit produces deltas for every (industry, region, credit bucket)
    key consistent with its bucket; the key universe is ``spec.categories``
    when registered, otherwise the values seen in the sample. Failures are
    collected in ``errors`` rather than raised.
    """
    result = CalibrationResult()
    if not sample:
        return result
    scenarios = spec.scenarios if spec.scenarios is not None else sorted(
        {s for e in sample for s, _ in e.pd_sc})
    years = spec.snapshot_years if spec.snapshot_years is not None else sorted(
        {y for e in sample for y in e.pd_bs})
    buckets = sorted({tuple(e.features[f] for f in spec.homogeneous_features) for e in sample},
                     key=lambda b: tuple(str(v) for v in b))
    keys = [BucketKey(i, r, int(c)) for i, r, c in itertools.product(
        _universe(sample, spec, "industry"), _universe(sample, spec, "region"),
        _universe(sample, spec, "credit_bucket"))]

    for scenario in scenarios:
        entries: dict[tuple[BucketKey, int], float] = {}
        for year in years:
            for bucket in buckets:
                label = ";".join(f"{f}={v}" for f, v in zip(spec.homogeneous_features, bucket))
                try:
                    fit = calibrate_bucket(sample, bucket, scenario, year, spec)
                except (ScenarioEclError, ValueError, KeyError) as err:
                    result.errors.append((scenario, int(year), label, f"{type(err).__name__}: {err}"))
                    continue
                result.fits.append(fit)
                bucket_values = dict(fit.bucket)
                for key in keys:
                    features = key.as_features()
                    if all(features[f] == v for f, v in bucket_values.items()):
                        entries[(key, int(year))] = extract_delta(fit, features)
        result.tables[scenario] = DeltaTable(scenario, entries, tuple(int(y) for y in years))
    return result
