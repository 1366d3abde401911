"""Likelihood-ratio algebra for plausible deniability.

A session ratio compares how likely the observations so far are under two
interest vectors. It factorises into per-step incremental ratios, and it can
also be recovered from indistinguishability scores measured at step ``k`` and
at the baseline step. The PDE estimate is the absolute log of that composed
ratio, with the zeroth probe as the baseline.
"""

from __future__ import annotations

import dataclasses
import decimal
import math
from typing import Sequence

from plausdeny.core import DeniabilityParams


@dataclasses.dataclass(frozen=True)
class DeniabilityRatio:
    value: float
    first: int = 1
    last: int = 1

    def __post_init__(self):
        if not (self.value > 0 and math.isfinite(self.value)):
            raise ValueError(f"deniability ratio must be positive and finite, got {self.value}")

    def __float__(self):
        return float(self.value)

    @property
    def log(self) -> float:
        return math.log(self.value)


@dataclasses.dataclass(frozen=True)
class PdeScore:
    probe: int
    epsilon_star: float

    def __post_init__(self):
        if not self.epsilon_star >= 0:
            raise ValueError("epsilon_star must be non-negative")

    def __float__(self):
        return float(self.epsilon_star)


def _positive(*values) -> list[float]:
    out = [float(v) for v in values]
    for v in out:
        if not v > 0:
            raise ValueError(f"expected a positive probability or score, got {v}")
    return out


def incremental_ratio(p_num: float, p_den: float, step: int = 1) -> DeniabilityRatio:
    """Single-step factor p(obs | x) / p(obs | x') for two interest vectors."""
    if p_den == 0:
        raise ZeroDivisionError("zero-probability denominator")
    for p in (p_num, p_den):
        if not 0 < p <= 1:
            raise ValueError(f"probability outside (0, 1]: {p}")
    return DeniabilityRatio(p_num / p_den, step, step)


def session_ratio(factors: Sequence) -> DeniabilityRatio:
    """Chain-rule product of incremental factors."""
    if not len(factors):
        raise ValueError("session ratio needs at least one factor")
    value = 1.0
    for f in factors:
        value *= float(f)
    first = getattr(factors[0], "first", 1)
    last = getattr(factors[-1], "last", first + len(factors) - 1)
    return DeniabilityRatio(value, first, last)


def check_pd(ratios: Sequence, params: DeniabilityParams) -> bool:
    """At least ``m - 1`` alternatives strictly inside ``(e^-eps, e^eps)``."""
    lo, hi = math.exp(-params.epsilon), math.exp(params.epsilon)
    inside = sum(1 for r in ratios if lo < float(r) < hi)
    return inside >= params.m - 1


def check_indist(score, epsilon: float) -> bool:
    s = float(score)
    if not s > 0:
        raise ValueError("indistinguishability score must be positive")
    return math.exp(-epsilon) <= s <= math.exp(epsilon)


def pd_from_pri(m_k_1, m_k_2, m_1_1, m_1_2, step: int | None = None) -> DeniabilityRatio:
    """Session ratio between ``x1`` and ``x2`` from scores at step k and at the baseline."""
    a, b, c, d = _positive(m_k_1, m_k_2, m_1_1, m_1_2)
    value = (a / b) * (d / c)
    if step is None:
        step = getattr(m_k_1, "step", 1) or 1
    return DeniabilityRatio(value, 1, max(int(step), 1))


def pde(m_k_i, m_k_comp, m_1_i, m_1_comp, probe: int | None = None) -> PdeScore:
    """Absolute log of the composed topic/complement ratio against the baseline."""
    a, b, c, d = _positive(m_k_i, m_k_comp, m_1_i, m_1_comp)
    if probe is None:
        probe = getattr(m_k_i, "step", 0)
    if (a, b) == (c, d):
        return PdeScore(probe, 0.0)
    return PdeScore(probe, abs(math.log(a / b) + math.log(d / c)))


def report_percent(score) -> int:
    """Integer percentage, rounded half-up and never clamped."""
    d = decimal.Decimal(repr(float(score))) * 100
    return int(d.quantize(decimal.Decimal(1), rounding=decimal.ROUND_HALF_UP))


def lemma1_holds(x: float, y: float, epsilon: float) -> bool:
    """Whether ``e^-eps < x/y < e^eps`` for probabilities ``x`` and ``y``.

    When true, ``|x - y| < eps`` is guaranteed; the property tests check that.
    """
    if not (0 < x < 1 and 0 < y < 1):
        raise ValueError("x and y must lie strictly between 0 and 1")
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    return math.exp(-epsilon) < x / y < math.exp(epsilon)
