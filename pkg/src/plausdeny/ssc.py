"""Single sensitive category channel: exact ground truth for the ratio algebra.

The observer sees one binary output per step. With fidelity ``pi[k]`` the
output matches the user's true topic (``c1`` sensitive, ``co`` catch-all).
"""

from __future__ import annotations

import dataclasses
import itertools
from typing import Sequence

import numpy as np

from plausdeny.deniability import DeniabilityRatio, incremental_ratio

SENSITIVE = "s"
NON_SENSITIVE = "n"
C1 = "c1"
CO = "co"
MAX_ENUMERATION = 20


@dataclasses.dataclass(frozen=True)
class SscModel:
    pi: tuple[float, ...]
    p0_s: float = 0.5

    def __post_init__(self):
        pi = tuple(float(p) for p in self.pi)
        if not pi:
            raise ValueError("fidelity schedule must cover at least one step")
        if any(not 0 < p < 1 for p in pi):
            raise ValueError("every fidelity must lie strictly between 0 and 1")
        if not 0 < self.p0_s < 1:
            raise ValueError("prior must lie strictly between 0 and 1")
        object.__setattr__(self, "pi", pi)

    @classmethod
    def constant(cls, pi: float, steps: int, p0_s: float = 0.5) -> "SscModel":
        return cls((pi,) * steps, p0_s)

    @property
    def p0_n(self) -> float:
        return 1.0 - self.p0_s

    @property
    def steps(self) -> int:
        return len(self.pi)

    def fidelity(self, k: int) -> float:
        if not 1 <= k <= len(self.pi):
            raise IndexError(f"step {k} outside 1..{len(self.pi)}")
        return self.pi[k - 1]


def _check_output(output: str) -> None:
    if output not in (SENSITIVE, NON_SENSITIVE):
        raise ValueError(f"output must be {SENSITIVE!r} or {NON_SENSITIVE!r}, got {output!r}")


def _check_topic(topic: str) -> None:
    if topic not in (C1, CO):
        raise ValueError(f"topic must be {C1!r} or {CO!r}, got {topic!r}")


def emission_prob(model: SscModel, k: int, output: str, topic: str) -> float:
    _check_output(output)
    _check_topic(topic)
    p = model.fidelity(k)
    matched = (output == SENSITIVE) == (topic == C1)
    return p if matched else 1.0 - p


def step_deniability(model: SscModel, k: int, output: str) -> DeniabilityRatio:
    _check_output(output)
    p = model.fidelity(k)
    value = p / (1.0 - p) if output == SENSITIVE else (1.0 - p) / p
    return DeniabilityRatio(value, k, k)


def session_deniability(model: SscModel, outputs: Sequence[str]) -> DeniabilityRatio:
    """Closed form: product of odds over sensitive steps times inverse odds over the rest."""
    if not outputs:
        raise ValueError("output sequence is empty")
    if len(outputs) > model.steps:
        raise ValueError("output sequence longer than the fidelity schedule")
    for o in outputs:
        _check_output(o)
    pi = np.asarray(model.pi[: len(outputs)])
    odds = pi / (1.0 - pi)
    sens = np.array([o == SENSITIVE for o in outputs])
    value = float(np.prod(odds[sens]) / np.prod(odds[~sens]))
    return DeniabilityRatio(value, 1, len(outputs))


def sequence_prob(model: SscModel, outputs: Sequence[str], topic: str) -> float:
    p = 1.0
    for k, o in enumerate(outputs, 1):
        p *= emission_prob(model, k, o, topic)
    return p


def brute_force_ratio(model: SscModel, outputs: Sequence[str]) -> DeniabilityRatio:
    """P(outputs | c1) / P(outputs | co), each side a direct product of table entries."""
    if len(outputs) > MAX_ENUMERATION:
        raise ValueError(f"enumeration oracle limited to {MAX_ENUMERATION} steps")
    if not outputs:
        raise ValueError("output sequence is empty")
    return DeniabilityRatio(sequence_prob(model, outputs, C1) / sequence_prob(model, outputs, CO),
                            1, len(outputs))


def all_sequences(k: int):
    return itertools.product((SENSITIVE, NON_SENSITIVE), repeat=k)


def sample_session(model: SscModel, topic: str, seed) -> list[str]:
    """Independent per-step draws from the channel, reproducible from ``seed``."""
    _check_topic(topic)
    rng = np.random.default_rng(seed)
    u = rng.random(model.steps)
    pi = np.asarray(model.pi)
    match = u < pi
    sens = match if topic == C1 else ~match
    return [SENSITIVE if s else NON_SENSITIVE for s in sens]


def incremental_factors(model: SscModel, outputs: Sequence[str]) -> list[DeniabilityRatio]:
    """Per-step ratio of emission probabilities under ``c1`` and ``co``."""
    return [incremental_ratio(emission_prob(model, k, o, C1), emission_prob(model, k, o, CO), k)
            for k, o in enumerate(outputs, 1)]


def posterior_trajectory(model: SscModel, outputs: Sequence[str]) -> np.ndarray:
    """Posteriors (P(c1 | outputs[:k]), P(co | outputs[:k])) for k = 0..K.

    Both columns are computed from the joint likelihoods rather than one as
    the complement of the other, so tiny posteriors keep full precision.
    """
    rows = [(model.p0_s, model.p0_n)]
    like1 = like0 = 1.0
    for k, o in enumerate(outputs, 1):
        like1 *= emission_prob(model, k, o, C1)
        like0 *= emission_prob(model, k, o, CO)
        j1, j0 = model.p0_s * like1, model.p0_n * like0
        rows.append((j1 / (j1 + j0), j0 / (j1 + j0)))
    return np.array(rows)


def indistinguishability_scores(model: SscModel, outputs: Sequence[str]) -> np.ndarray:
    """Exact scores M_k(c1), M_k(co) for k = 1..K.

    ``M_k(x)`` is the posterior of ``x`` after step ``k`` divided by the prior
    at session start. Returns an array of shape (K, 2).
    """
    post = posterior_trajectory(model, outputs)
    return post[1:] / post[0]
