"""
Annual PD term structures.

Unconditional PDs ``pd[t]`` are the probability of defaulting in year ``t``
as seen from today. Conditional PDs ``cpd[t]`` (annual hazards) condition on
survival through years ``1..t-1``. The two are linked through survival
factors::

    pd[t] = ps[t-1] * cpd[t],    ps[t] = prod_{j<=t} (1 - cpd[j]),  ps[0] = 1

Early termination is assumed to happen only through default, so no
prepayment or restructuring hazard enters the survival product.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

from .errors import InfeasibleTermStructure

Kind = Literal["unconditional", "conditional"]

#: slack allowed on cpd <= 1 so that consistent curves survive rounding
CPD_TOLERANCE = 1e-12
#: survival below this before the last period makes later hazards meaningless
SURVIVAL_FLOOR = 1e-300


def _frozen(values) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class PdTermStructure:
    """Per-year default probabilities over the remaining life of an exposure.

    Parameters
    ----------
    values : sequence of float
        Probabilities for years ``1..n``.
    kind : {"unconditional", "conditional"}
        Whether ``values`` are unconditional PDs or annual hazards.
    """

    values: np.ndarray
    kind: Kind = "unconditional"

    def __post_init__(self) -> None:
        arr = _frozen(self.values)
        object.__setattr__(self, "values", arr)
        if self.kind not in ("unconditional", "conditional"):
            raise ValueError(f"unknown term structure kind {self.kind!r}")
        if arr.ndim != 1 or arr.size < 1:
            raise ValueError("a term structure needs at least one year")
        if not np.all(np.isfinite(arr)) or np.any(arr < 0.0) or np.any(arr > 1.0):
            raise ValueError(f"probabilities must lie in [0, 1], got {arr.tolist()}")

    @property
    def n(self) -> int:
        return int(self.values.size)

    def __len__(self) -> int:
        return self.n

    def __eq__(self, other) -> bool:
        if not isinstance(other, PdTermStructure):
            return NotImplemented
        return self.kind == other.kind and np.array_equal(self.values, other.values)

    @classmethod
    def unconditional(cls, values: Sequence[float]) -> "PdTermStructure":
        return cls(values, "unconditional")

    @classmethod
    def conditional(cls, values: Sequence[float]) -> "PdTermStructure":
        return cls(values, "conditional")


@dataclass(frozen=True, eq=False)
class SurvivalCurve:
    """Survival probabilities ``ps[0..n]`` with ``ps[0] == 1``."""

    ps: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "ps", _frozen(self.ps))

    def __getitem__(self, t):
        return self.ps[t]

    def __len__(self) -> int:
        return int(self.ps.size)


def _require(pd: PdTermStructure, kind: Kind) -> None:
    if not isinstance(pd, PdTermStructure):
        raise TypeError(f"expected PdTermStructure, got {type(pd).__name__}")
    if pd.kind != kind:
        raise ValueError(f"expected a {kind} term structure, got {pd.kind}")


def to_conditional(pd: PdTermStructure) -> PdTermStructure:
    """Decompose unconditional PDs into annual conditional PDs.

    ``cpd[1] = pd[1]`` and ``cpd[t] = pd[t] / prod_{j<t}(1 - cpd[j])``.

    Raises
    ------
    InfeasibleTermStructure
        If some implied hazard exceeds 1, or survival is exhausted
        (below ``SURVIVAL_FLOOR``) while periods remain.
    """
    _require(pd, "unconditional")
    out = np.empty(pd.n)
    survival = 1.0
    for t, p in enumerate(pd.values):
        if survival < SURVIVAL_FLOOR:
            raise InfeasibleTermStructure(
                f"survival exhausted before year {t + 1} "
                f"(remaining PD mass {float(pd.values[t:].sum()):.3g})"
            )
        c = p / survival
        if c > 1.0 + CPD_TOLERANCE:
            raise InfeasibleTermStructure(
                f"year {t + 1}: implied conditional PD {c:.6g} exceeds 1"
            )
        c = min(c, 1.0)
        out[t] = c
        survival *= 1.0 - c
    return PdTermStructure(out, "conditional")


def to_unconditional(cpd: PdTermStructure) -> PdTermStructure:
    """Rebuild unconditional PDs: ``pd[t] = ps[t-1] * cpd[t]``."""
    _require(cpd, "conditional")
    ps = survival_curve(cpd).ps
    return PdTermStructure(ps[:-1] * cpd.values, "unconditional")


def survival_curve(cpd: PdTermStructure) -> SurvivalCurve:
    _require(cpd, "conditional")
    ps = np.empty(cpd.n + 1)
    ps[0] = 1.0
    # sequential product, not np.cumprod, so the rounding matches to_conditional
    s = 1.0
    for t, c in enumerate(cpd.values, start=1):
        s *= 1.0 - c
        ps[t] = s
    return SurvivalCurve(ps)


def constant_hazard(h: float, n: int) -> PdTermStructure:
    """Unconditional curve of a constant annual hazard ``h``: ``(1-h)**(t-1) * h``."""
    t = np.arange(n)
    return PdTermStructure((1.0 - h) ** t * h, "unconditional")
