"""Independent reference computations used only by the tests.

Nothing here imports the package's numerical paths except where a check is
explicitly defined against them (the bisection quantile inverts the
package's normal_cdf by design).
"""

from __future__ import annotations

import math

import mpmath as mp
import numpy as np
from scipy import stats

# values frozen from the 50-digit mpmath oracles below
FRYE_JACOBS_WORKED = 0.45498075996173877   # pd_bs 0.02, lgd_bs 0.4, pd_sc 0.05
OVERLAY_001_2 = 0.069453159656380483       # sigmoid(logit(0.01) + 2)
QUANTILE_0975 = 1.9599639845400542
QUANTILE_002 = -2.0537489106318231
ECL_SC_WORKED = 22.749037998086939         # 0.05 * FRYE_JACOBS_WORKED * 1000
ECL_TWO_YEAR = 8.8435374149659864          # 5/1.05 + 4.5/1.05**2


def mp_quantile(p):
    """50-digit normal quantile; root-finds in log space to stay sane deep in the tail."""
    with mp.workdps(50):
        p = mp.mpf(p)
        if p > mp.mpf("1e-10"):
            return mp.findroot(lambda x: mp.ncdf(x) - p, mp.sqrt(2) * mp.erfinv(2 * p - 1))
        start = -mp.sqrt(-2 * mp.log(p))
        return mp.findroot(lambda x: mp.log(mp.ncdf(x)) - mp.log(p), start)


def mp_frye_jacobs(pd_bs, lgd_bs, pd_sc):
    with mp.workdps(50):
        pb, l, ps = mp.mpf(pd_bs), mp.mpf(lgd_bs), mp.mpf(pd_sc)
        z = mp_quantile(ps) - mp_quantile(pb) + mp_quantile(pb * l)
        return float(mp.ncdf(z) / ps)


def mp_overlay(p, delta):
    with mp.workdps(50):
        p = mp.mpf(p)
        z = mp.log(p / (1 - p)) + mp.mpf(delta)
        return float(1 / (1 + mp.exp(-z)))


def bisection_quantile(cdf, p, lo=-40.0, hi=40.0, iters=200):
    """Invert a monotone CDF by bisection."""
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if cdf(mid) < p:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-15:
            break
    return 0.5 * (lo + hi)


def forward_simulate_unconditional(cpd):
    """Unconditional PDs by walking survival mass forward year by year."""
    alive, out = 1.0, []
    for c in cpd:
        out.append(alive * c)
        alive -= alive * c
    return out


def textbook_ols(X, y):
    """Normal-equations OLS with textbook diagnostics; X excludes the intercept."""
    X = np.asarray(X, float)
    y = np.asarray(y, float)
    n, p = X.shape
    Z = np.column_stack([X, np.ones(n)])
    xtx = Z.T @ Z
    coef = np.linalg.solve(xtx, Z.T @ y)
    resid = y - Z @ coef
    sse = float(np.sum(resid ** 2))
    sst = float(np.sum((y - y.mean()) ** 2))
    df = n - p - 1
    s2 = sse / df
    se = np.sqrt(s2 * np.diag(np.linalg.inv(xtx)))
    t = coef / se
    pvals = 2 * stats.t.sf(np.abs(t), df)
    r2 = 1 - sse / sst
    f = ((sst - sse) / p) / (sse / df)
    fp = stats.f.sf(f, p, df)
    return dict(coef=coef, se=se, t=t, p=pvals, r2=r2, f=f, fp=fp)


def logit_exact(p):
    return math.log(p / (1 - p))
