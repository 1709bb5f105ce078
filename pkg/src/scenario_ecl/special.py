"""
Special functions: standard normal CDF and quantile, regularized incomplete
beta, and the Student-t / F tail probabilities built on it.

Everything here is scalar and pure-Python (``math`` only) so results do not
depend on the numpy/scipy build in use.
"""

from __future__ import annotations

import math

from .errors import DomainError

_SQRT2 = math.sqrt(2.0)
_SQRT2PI = math.sqrt(2.0 * math.pi)

#: clamp range applied by normal_quantile(..., clamp=True)
QUANTILE_CLAMP_LO = 1e-300
QUANTILE_CLAMP_HI = 1.0 - 1e-16


def normal_cdf(x: float) -> float:
    """Standard normal CDF.

    Uses ``erfc`` on the tail side so both tails keep full relative
    precision; ``normal_cdf(-8)`` is about 6.2e-16, not 0.
    """
    if x < 0.0:
        return 0.5 * math.erfc(-x / _SQRT2)
    return 1.0 - 0.5 * math.erfc(x / _SQRT2)


def normal_pdf(x: float) -> float:
    return math.exp(-0.5 * x * x) / _SQRT2PI


# Acklam's rational approximation, relative error ~1.15e-9 before refinement
_A = (-3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02,
      1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00)
_B = (-5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02,
      6.680131188771972e01, -1.328068155288572e01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e00,
      -2.549732539343734e00, 4.374664141464968e00, 2.938163982698783e00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e00,
      3.754408661907416e00)
_P_LOW = 0.02425


def _lower_quantile(p: float) -> float:
    """Quantile for 0 < p <= 0.5."""
    if p < _P_LOW:
        q = math.sqrt(-2.0 * math.log(p))
        x = (((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]) / (
            (((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0
        )
    else:
        q = p - 0.5
        r = q * q
        x = (((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * q / (
            ((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0
        )
    # one Halley step against the erfc-based CDF
    density = normal_pdf(x)
    if density > 0.0:
        u = (0.5 * math.erfc(-x / _SQRT2) - p) / density
        x -= u / (1.0 + 0.5 * x * u)
    return x


def normal_quantile(p: float, clamp: bool = False) -> float:
    """Inverse of :func:`normal_cdf`.

    Parameters
    ----------
    p : float
        Probability in (0, 1).
    clamp : bool
        If true, ``p`` is first clipped to ``[1e-300, 1 - 1e-16]`` so that 0
        and 1 map to large finite values instead of raising.

    Raises
    ------
    DomainError
        ``p`` outside (0, 1) (or NaN) and ``clamp`` is false.
    """
    if clamp and not math.isnan(p):
        p = min(max(p, QUANTILE_CLAMP_LO), QUANTILE_CLAMP_HI)
    if not 0.0 < p < 1.0:
        raise DomainError(f"normal_quantile needs 0 < p < 1, got {p!r}")
    if p > 0.5:
        # 1 - p is exact here (Sterbenz), so reflect onto the accurate side
        return -_lower_quantile(1.0 - p)
    return _lower_quantile(p)


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for I_x(a, b), modified Lentz evaluation."""
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, 10_000):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            return h
    raise ArithmeticError(f"incomplete beta continued fraction did not converge (a={a}, b={b}, x={x})")


def betainc(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta function I_x(a, b) for a, b > 0."""
    if a <= 0.0 or b <= 0.0:
        raise DomainError(f"betainc needs a, b > 0, got a={a}, b={b}")
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"betainc needs 0 <= x <= 1, got {x}")
    if x == 0.0 or x == 1.0:
        return x
    log_front = (
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
        + a * math.log(x) + b * math.log1p(-x)
    )
    front = math.exp(log_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def student_t_two_sided(t: float, df: float) -> float:
    """P(|T| >= |t|) for a Student-t variable with ``df`` degrees of freedom."""
    if math.isnan(t) or df <= 0:
        return math.nan
    if math.isinf(t):
        return 0.0
    return betainc(0.5 * df, 0.5, df / (df + t * t))


def f_sf(f: float, dfn: float, dfd: float) -> float:
    """Upper tail P(F >= f) of the F(dfn, dfd) distribution."""
    if math.isnan(f) or dfn <= 0 or dfd <= 0:
        return math.nan
    if math.isinf(f):
        return 0.0
    if f <= 0.0:
        return 1.0
    return betainc(0.5 * dfd, 0.5 * dfn, dfd / (dfd + dfn * f))
