"""Scenario LGD from a PD shift via the Frye-Jacobs relationship."""

from __future__ import annotations

from dataclasses import dataclass

from .special import normal_cdf, normal_quantile

__all__ = ["LgdInputs", "frye_jacobs", "normal_cdf", "normal_quantile"]


@dataclass(frozen=True)
class LgdInputs:
    pd_bs: float
    lgd_bs: float
    pd_sc: float

    def __post_init__(self) -> None:
        for name in ("pd_bs", "lgd_bs", "pd_sc"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v!r}")


def frye_jacobs(pd_bs: float | LgdInputs, lgd_bs: float | None = None,
                pd_sc: float | None = None) -> float:
    """Scenario LGD implied by moving the annual PD from ``pd_bs`` to ``pd_sc``.

    ``Phi(Phi^-1(pd_sc) - Phi^-1(pd_bs) + Phi^-1(pd_bs * lgd_bs)) / pd_sc``,
    with zero correlation between the PD and LGD drivers.

    Accepts either an :class:`LgdInputs` or the three floats. Degenerate
    cases: ``pd_sc == 0`` or ``pd_bs == 0`` returns ``lgd_bs`` unchanged, and a
    zero baseline expected loss is floored at 1e-300 before the quantile,
    which drives the result to ~0. The result is clipped to [0, 1].
    """
    if isinstance(pd_bs, LgdInputs):
        inputs = pd_bs
    else:
        inputs = LgdInputs(pd_bs, lgd_bs, pd_sc)
    p0, lgd0, p1 = inputs.pd_bs, inputs.lgd_bs, inputs.pd_sc
    if p1 == 0.0 or p0 == 0.0:
        return lgd0
    z = (normal_quantile(p1, clamp=True) - normal_quantile(p0, clamp=True)
         + normal_quantile(p0 * lgd0, clamp=True))
    return min(max(normal_cdf(z) / p1, 0.0), 1.0)
