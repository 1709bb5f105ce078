import math
import random
import warnings

import numpy as np
import pytest

from oracles import textbook_ols
from scenario_ecl.calibration import (CalibrationSpec, EntityObservation, build_design_matrix,
                                      calibrate_all, calibrate_bucket, delta_standard_error,
                                      extract_delta, fit_ols, logit_differences)
from scenario_ecl.errors import (DegenerateSystem, EmptyBucket, InconsistentBucket,
                                 MissingSnapshot, UnknownCategory)
from scenario_ecl.overlay import BucketKey, apply_overlay, logit, sigmoid

SPEC = CalibrationSpec(min_bucket_size=30)


def entity(eid, industry="I01", region="A", cb=1, pd_bs=0.02, pd_sc=None, year=2030, scenario="sc"):
    pd_sc = {} if pd_sc is None else {(scenario, year): pd_sc}
    return EntityObservation(eid, {"industry": industry, "region": region, "credit_bucket": cb},
                             {year: pd_bs}, pd_sc)


@pytest.mark.parametrize("x, expected", [(0.5, 0.0), (0.75, math.log(3)), (0.25, -math.log(3))])
def test_logit(x, expected):
    assert logit(x) == pytest.approx(expected, abs=1e-15)


@pytest.mark.parametrize("bs, sc, expected", [(0.3, 0.3, 0.0), (0.5, 0.75, math.log(3)), (0.75, 0.5, -math.log(3))])
def test_logit_differences(bs, sc, expected):
    y, kept = logit_differences([entity("a", pd_bs=bs, pd_sc=sc)], "sc", 2030)
    assert y[0] == pytest.approx(expected, abs=1e-15)
    assert [e.entity_id for e in kept] == ["a"]


def test_logit_differences_warns_on_missing():
    sample = [entity("a", pd_sc=0.03), entity("b")]
    with pytest.warns(MissingSnapshot, match="1 entities"):
        y, kept = logit_differences(sample, "sc", 2030)
    assert len(y) == 1 and kept[0].entity_id == "a"


def test_entity_validation():
    with pytest.raises(ValueError):
        entity("a", pd_bs=1.2)
    with pytest.raises(ValueError):
        EntityObservation("a", {}, {2030: 0.1}, {("sc", 2035): 0.1})


def test_design_ordinal_column():
    d = build_design_matrix([entity(str(i), cb=c) for i, c in enumerate([1, 2, 3])],
                            CalibrationSpec(regressor_features=(("credit_bucket", "ordinal"),)))
    assert d.columns == ("credit_bucket", "intercept")
    np.testing.assert_array_equal(d.matrix, [[1, 1], [2, 1], [3, 1]])


@pytest.mark.parametrize("regions, dropped, dummy", [
    (["A", "A", "B"], "A", [0, 0, 1]),
    (["A", "B"], "A", [0, 1]),
    (["C", "B", "B"], "B", [1, 0, 0]),
])
def test_design_dummy_reference(regions, dropped, dummy):
    spec = CalibrationSpec(regressor_features=(("region", "categorical"),))
    d = build_design_matrix([entity(str(i), region=r) for i, r in enumerate(regions)], spec)
    assert d.dropped_categories == (f"region={dropped}",)
    assert len(d.columns) == 2
    np.testing.assert_array_equal(d.matrix[:, 0], dummy)
    np.testing.assert_array_equal(d.matrix[:, 1], 1)


def test_design_unknown_category():
    spec = CalibrationSpec(categories={"region": ("A", "B")})
    with pytest.raises(UnknownCategory) as info:
        build_design_matrix([entity("a", region="A"), entity("b", region="Z")], spec)
    assert info.value.row == 2 and info.value.column == "region"


def test_design_default_regressors_are_the_complement():
    spec = CalibrationSpec(regressor_features=None)
    d = build_design_matrix([entity("a", cb=1, region="A"), entity("b", cb=2, region="B")], spec)
    assert d.columns == ("credit_bucket", "region=B", "intercept")


def test_spec_rejects_overlap_and_bad_encoding():
    with pytest.raises(ValueError):
        CalibrationSpec(homogeneous_features=("region",))
    with pytest.raises(ValueError):
        CalibrationSpec(regressor_features=(("region", "nominal"),))


def test_fit_ols_noiseless_line():
    fit = fit_ols(np.array([0.0, 1, 2, 3]), np.array([1.0, 3, 5, 7]))
    assert fit.coef[0] == pytest.approx(2.0, abs=1e-8)
    assert fit.coef[1] == pytest.approx(1.0, abs=1e-8)
    assert fit.r_squared == pytest.approx(1.0, abs=1e-12)


def test_fit_ols_constant_response():
    x = np.array([[0.0], [1], [2], [5]])
    fit = fit_ols(x, np.full(4, 0.7))
    assert fit.coef[-1] == pytest.approx(0.7, abs=1e-12)
    assert fit.coef[0] == pytest.approx(0.0, abs=1e-12)
    assert fit.r_squared == 0.0


def test_fit_ols_degenerate():
    with pytest.raises(DegenerateSystem):
        fit_ols(np.empty((0, 1)), np.empty(0))


def test_fit_ols_rank_deficient_min_norm():
    x = np.array([[1.0, 2.0], [2.0, 4.0], [3.0, 6.0], [4.0, 8.0]])
    y = np.array([1.0, 2.0, 3.0, 4.1])
    fit = fit_ols(x, y)
    assert fit.rank_deficient and fit.rank == 2
    expected = np.linalg.pinv(np.column_stack([x, np.ones(4)])) @ y
    np.testing.assert_allclose(fit.coef, expected, atol=1e-10)


@pytest.mark.parametrize("seed", range(25))
def test_fit_ols_matches_textbook_oracle(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(10, 101))
    p = int(rng.integers(1, 6))
    X = rng.normal(size=(n, p))
    y = X @ rng.normal(size=p) + rng.normal() + rng.normal(scale=rng.uniform(0.1, 3), size=n)
    fit = fit_ols(X, y)
    ref = textbook_ols(X, y)
    np.testing.assert_allclose(fit.coef, ref["coef"], atol=1e-8)
    np.testing.assert_allclose(fit.std_errors, ref["se"], atol=1e-8)
    np.testing.assert_allclose(fit.t_stats, ref["t"], atol=1e-8)
    np.testing.assert_allclose(fit.p_values, ref["p"], atol=1e-8)
    assert fit.r_squared == pytest.approx(ref["r2"], abs=1e-8)
    assert fit.f_stat == pytest.approx(ref["f"], abs=1e-8, rel=1e-10)
    assert fit.f_pvalue == pytest.approx(ref["fp"], abs=1e-8)
    assert (fit.df_model, fit.df_resid) == (p, n - p - 1)


def planted_sample(n=200, seed=0, noise=0.0, industry="I01"):
    rng = random.Random(seed)
    out = []
    for i in range(n):
        cb = rng.randint(1, 6)
        region = rng.choice("ABC")
        pd_bs = rng.uniform(0.005, 0.1)
        z = 0.3 * cb + (0.1 if region == "B" else 0.0) + 0.5 + rng.gauss(0, noise)
        out.append(entity(f"e{i:04d}", industry, region, cb, pd_bs, sigmoid(logit(pd_bs) + z)))
    return out


def test_calibrate_bucket_noiseless_recovery():
    sample = planted_sample()
    fit = calibrate_bucket(sample, {"industry": "I01"}, "sc", 2030, SPEC)
    assert not fit.fallback_used
    # recover the planted line regardless of which region is the reference
    for region, bump in (("A", 0.0), ("B", 0.1), ("C", 0.0)):
        for cb in range(1, 7):
            target = BucketKey("I01", region, cb)
            assert extract_delta(fit, target) == pytest.approx(0.5 + 0.3 * cb + bump, abs=1e-8)
    assert fit.r_squared == pytest.approx(1.0, abs=1e-10)


def test_calibrate_bucket_small_falls_back():
    fit = calibrate_bucket(planted_sample(5), ("I01",), "sc", 2030, SPEC)
    assert fit.fallback_used
    assert list(fit.betas) == ["credit_bucket"]
    assert fit.dropped_categories == ()


def test_calibrate_bucket_single_entity():
    fit = calibrate_bucket(planted_sample(1), "I01", "sc", 2030, SPEC)
    assert fit.fallback_used and fit.n_obs == 1


def test_calibrate_bucket_empty():
    with pytest.raises(EmptyBucket):
        calibrate_bucket(planted_sample(40), "I99", "sc", 2030, SPEC)
    with pytest.raises(DegenerateSystem):
        calibrate_bucket(planted_sample(40), "I01", "other", 2030, SPEC)


def _fit_with(alpha, beta_credit, beta_b):
    # construct an exact fit by planting the requested coefficients
    rng = random.Random(3)
    sample = []
    for i in range(60):
        cb, region = rng.randint(1, 6), "AB"[i % 2] if i < 59 else "A"
        pd_bs = rng.uniform(0.01, 0.05)
        z = alpha + beta_credit * cb + (beta_b if region == "B" else 0.0)
        sample.append(entity(f"x{i}", region=region, cb=cb, pd_bs=pd_bs, pd_sc=sigmoid(logit(pd_bs) + z)))
    return calibrate_bucket(sample, "I01", "sc", 2030, SPEC)


def test_extract_delta_examples():
    fit = _fit_with(0.5, 0.3, 0.1)
    assert fit.dropped_categories == ("region=A",)
    assert fit.alpha == pytest.approx(0.5, abs=1e-9)
    assert extract_delta(fit, BucketKey("I01", "B", 2)) == pytest.approx(1.2, abs=1e-9)
    assert extract_delta(fit, BucketKey("I01", "A", 2)) == pytest.approx(1.1, abs=1e-9)
    zero = _fit_with(0.7, 0.0, 0.0)
    assert extract_delta(zero, BucketKey("I01", "B", 4)) == pytest.approx(zero.alpha, abs=1e-9)


def test_extract_delta_inconsistent_bucket():
    fit = _fit_with(0.5, 0.3, 0.1)
    with pytest.raises(InconsistentBucket):
        extract_delta(fit, BucketKey("I02", "A", 1))


def test_permutation_invariance():
    sample = planted_sample(300, seed=4, noise=0.2)
    a = calibrate_bucket(sample, "I01", "sc", 2030, SPEC)
    shuffled = sample[:]
    random.Random(9).shuffle(shuffled)
    b = calibrate_bucket(shuffled, "I01", "sc", 2030, SPEC)
    assert a.dropped_categories == b.dropped_categories
    assert abs(a.alpha - b.alpha) <= 1e-10
    for k in a.betas:
        assert abs(a.betas[k] - b.betas[k]) <= 1e-10


def test_pipeline_consistency_residual_identity():
    sample = planted_sample(150, seed=2, noise=0.3)
    fit = calibrate_bucket(sample, "I01", "sc", 2030, SPEC)
    by_id = {e.entity_id: e for e in sample}
    for eid, resid in zip(fit.entity_ids, fit.residuals):
        e = by_id[eid]
        adjusted = apply_overlay(e.pd_bs[2030], extract_delta(fit, e.features))
        assert logit(e.pd_sc[("sc", 2030)]) - logit(adjusted) == pytest.approx(resid, abs=1e-9)


def test_delta_standard_error_matches_covariance():
    fit = calibrate_bucket(planted_sample(200, seed=1, noise=0.2), "I01", "sc", 2030, SPEC)
    se_alpha = delta_standard_error(fit, {"industry": "I01", "region": fit.dropped_categories[0].split("=")[1],
                                          "credit_bucket": 0})
    assert se_alpha == pytest.approx(fit.std_errors["intercept"], rel=1e-12)


def test_calibrate_all_identity_and_layout():
    sample = [entity(f"e{i}", industry=f"I0{i % 2}", region="AB"[i % 3 % 2], cb=1 + i % 6,
                     pd_bs=0.01 + 0.001 * i, pd_sc=0.01 + 0.001 * i) for i in range(80)]
    res = calibrate_all(sample, SPEC)
    assert not res.errors
    table = res.tables["sc"]
    assert all(abs(v) < 1e-9 for v in table.entries.values())
    # one delta per (industry, region, bucket) seen in the sample
    assert len(table) == 2 * 2 * 6


def test_calibrate_all_empty_scenarios():
    res = calibrate_all(planted_sample(40), CalibrationSpec(scenarios=()))
    assert res.tables == {} and res.fits == []


def test_calibrate_all_collects_errors():
    spec = CalibrationSpec(scenarios=("sc", "ghost"))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        res = calibrate_all(planted_sample(40), spec)
    assert [e[0] for e in res.errors] == ["ghost"]
    assert len(res.tables["ghost"]) == 0
    assert len(res.tables["sc"]) == 18
