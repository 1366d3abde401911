"""Smoothed keyword-ratio estimators of the indistinguishability score.

``pri_plus`` scores an advert page against an interest vector as the
page-weighted sum of per-keyword ratios between the topic's training
distribution and the global one. A page whose keyword mix looks exactly like
the training data as a whole therefore scores 1, and so does a page with no
dictionary keywords at all.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from pathlib import Path
from typing import Sequence

import numpy as np

from plausdeny.core import (
    AdvertPage,
    DataError,
    InterestVector,
    TopicSet,
    TrainingCorpus,
    complement_interest,
    make_single_interest,
)
from plausdeny.textpipe import (
    EMPTY_PAGE,
    Dictionary,
    TextNormalizer,
    build_dictionary,
    default_normalizer,
    distribution,
    page_weights,
)

DEFAULT_LAMBDA = 0.001
DEFAULT_THRESHOLD = 1.1


@dataclasses.dataclass(frozen=True)
class EstimatorConfig:
    lam: float = DEFAULT_LAMBDA
    threshold: float = DEFAULT_THRESHOLD

    def __post_init__(self):
        if not 0 <= self.lam < 1:
            raise ValueError("smoothing parameter must lie in [0, 1)")
        if not self.threshold > 1:
            raise ValueError("detection threshold must exceed 1")


@dataclasses.dataclass(frozen=True)
class PriScore:
    """Estimated indistinguishability score of one interest vector at one step."""

    topic: str
    step: int
    value: float

    def __float__(self):
        return float(self.value)


class TrainedEstimator:
    """Per-topic keyword counts over a frozen dictionary.

    Smoothed distributions for every single topic, every complement and the
    whole corpus are precomputed; arbitrary interest vectors are scored by
    pooling the counts of their active topics.
    """

    def __init__(self, topics: TopicSet, dictionary: Dictionary, counts: np.ndarray,
                 config: EstimatorConfig = EstimatorConfig()):
        counts = np.asarray(counts, dtype=np.int64)
        if counts.shape != (len(topics), len(dictionary)):
            raise ValueError("count matrix must be topics x keywords")
        empty = [t for t, row in zip(topics, counts) if row.sum() == 0]
        if empty and config.lam == 0:
            raise ValueError(f"topics with no training keywords need smoothing: {empty}")
        self.topics = topics
        self.dictionary = dictionary
        self.counts = counts
        self.config = config
        self.global_counts = counts.sum(axis=0)
        self.global_dist = distribution(self.global_counts, config.lam)
        self.topic_dist = np.stack([distribution(row, config.lam) for row in counts])
        self.complement_dist = np.stack(
            [distribution(self.global_counts - row, config.lam) for row in counts])
        self._topic_ratio = self.topic_dist / self.global_dist
        self._complement_ratio = self.complement_dist / self.global_dist
        self._raw_global = distribution(self.global_counts, 0.0)

    @property
    def lam(self) -> float:
        return self.config.lam

    def label(self, v: InterestVector) -> str:
        if v.is_single:
            return self.topics.topics[v.active[0]]
        if v.is_complement:
            missing = v.bits.index(0)
            return "-" + self.topics.topics[missing]
        return "+".join(self.topics.topics[i] for i in v.active)

    def ratio(self, v: InterestVector, lam: float | None = None) -> np.ndarray:
        """Per-keyword ratio of the distribution for ``v`` to the global one."""
        if len(v) != len(self.topics):
            raise ValueError("interest vector length does not match the topic set")
        if not v.active:
            raise ValueError("interest vector selects no topics")
        if lam is None or lam == self.lam:
            if v.is_single:
                return self._topic_ratio[v.active[0]]
            if v.is_complement:
                return self._complement_ratio[v.bits.index(0)]
            pooled = self.counts[list(v.active)].sum(axis=0)
            return distribution(pooled, self.lam) / self.global_dist
        pooled = self.counts[list(v.active)].sum(axis=0)
        return distribution(pooled, lam) / distribution(self.global_counts, lam)

    def single(self, topic: str) -> InterestVector:
        return make_single_interest(self.topics, self.topics.index(topic))

    # persistence ---------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "topics": list(self.topics),
            "keywords": list(self.dictionary.keywords),
            "counts": self.counts.tolist(),
            "lambda": self.config.lam,
            "threshold": self.config.threshold,
        }

    def content_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    def save(self, path: str | Path) -> str:
        payload = dict(self.to_dict(), sha256=self.content_hash())
        Path(path).write_text(json.dumps(payload, sort_keys=True) + "\n", encoding="utf-8")
        return payload["sha256"]

    @classmethod
    def load(cls, path: str | Path, normalizer: TextNormalizer | None = None) -> "TrainedEstimator":
        try:
            payload = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise DataError(f"cannot load estimator {path}: {exc}") from exc
        dictionary = Dictionary(tuple(payload["keywords"]), normalizer or default_normalizer())
        est = cls(TopicSet(tuple(payload["topics"])), dictionary, np.array(payload["counts"]),
                  EstimatorConfig(payload["lambda"], payload["threshold"]))
        if payload.get("sha256") not in (None, est.content_hash()):
            raise DataError(f"estimator {path} failed its content hash check")
        return est


def topic_counts(corpus: TrainingCorpus, dictionary: Dictionary) -> np.ndarray:
    """Keyword counts of each topic's concatenated training adverts."""
    counts = np.zeros((len(corpus.topics), len(dictionary)), dtype=np.int64)
    for label, text in corpus.entries:
        counts[corpus.topics.index(label)] += dictionary.text_counts(text)
    return counts


def train(corpus: TrainingCorpus, config: EstimatorConfig = EstimatorConfig(),
          dictionary: Dictionary | None = None,
          normalizer: TextNormalizer | None = None) -> TrainedEstimator:
    if not len(corpus):
        raise ValueError("training corpus is empty")
    dictionary = dictionary or build_dictionary(corpus, normalizer)
    counts = topic_counts(corpus, dictionary)
    return TrainedEstimator(corpus.topics, dictionary, counts, config)


def _score(est: TrainedEstimator, page, v: InterestVector, lam: float, step: int) -> PriScore:
    weights = page_weights(est.dictionary, page, lam)
    label = est.label(v)
    if weights is EMPTY_PAGE:
        return PriScore(label, step, 1.0)
    return PriScore(label, step, float(np.dot(est.ratio(v, lam), weights)))


def pri_plus(est: TrainedEstimator, page: AdvertPage | str, v: InterestVector,
             step: int = 0) -> PriScore:
    """Smoothed score; exactly 1 for a page without dictionary keywords."""
    return _score(est, page, v, est.lam, step)


def pri(est: TrainedEstimator, page: AdvertPage | str, v: InterestVector,
        step: int = 0) -> PriScore:
    """Unsmoothed score. Keywords never seen for the topic contribute nothing."""
    return _score(est, page, v, 0.0, step)


def pri_pair(est: TrainedEstimator, page: AdvertPage | str, topic: str,
             step: int = 0) -> tuple[PriScore, PriScore]:
    v = est.single(topic)
    return pri_plus(est, page, v, step), pri_plus(est, page, complement_interest(v), step)


def pri_all(est: TrainedEstimator, page: AdvertPage | str) -> np.ndarray:
    """PRI+ of every single-topic vector, in topic order."""
    weights = page_weights(est.dictionary, page, est.lam)
    if weights is EMPTY_PAGE:
        return np.ones(len(est.topics))
    return est._topic_ratio @ weights


def detect(score, config: EstimatorConfig = EstimatorConfig()) -> bool:
    """One-sided: only evidence of increased interest counts as a detection."""
    return float(score) > config.threshold


def session_detect(scores: Sequence, config: EstimatorConfig = EstimatorConfig(),
                   n_probes: int = 5) -> bool:
    if len(scores) != n_probes:
        raise ValueError(f"expected {n_probes} probe scores, got {len(scores)}")
    return any(detect(s, config) for s in scores)


class NaiveBayes:
    """Multinomial naive Bayes over the same dictionary, additive smoothing.

    The posterior for an interest vector is normalised against its
    complement under a uniform prior, so an empty page returns 0.5.
    """

    def __init__(self, topics: TopicSet, dictionary: Dictionary, counts: np.ndarray, lam: float):
        if lam < 0:
            raise ValueError("smoothing parameter must be non-negative")
        self.topics = topics
        self.dictionary = dictionary
        self.counts = np.asarray(counts, dtype=np.int64)
        self.lam = lam

    def _log_likelihood(self, active, page_counts) -> float:
        pooled = self.counts[list(active)].sum(axis=0)
        with np.errstate(divide="ignore"):
            logp = np.log(distribution(pooled, self.lam))
        mask = page_counts > 0
        if not mask.any():
            return 0.0
        return float(np.dot(page_counts[mask], logp[mask]))

    def posterior(self, page: AdvertPage | str, v: InterestVector) -> float:
        text = page.text if isinstance(page, AdvertPage) else page
        page_counts = self.dictionary.text_counts(text)
        if page_counts.sum() == 0:
            return 0.5
        rest = tuple(i for i, b in enumerate(v.bits) if not b)
        if not rest:
            return 1.0
        ll_v = self._log_likelihood(v.active, page_counts)
        ll_rest = self._log_likelihood(rest, page_counts)
        diff = ll_rest - ll_v
        if np.isnan(diff):
            return 0.5
        if diff == np.inf:
            return 0.0
        if diff == -np.inf:
            return 1.0
        return float(1.0 / (1.0 + np.exp(diff)))

    def score(self, page, v: InterestVector, step: int = 0) -> PriScore:
        """Posterior over uniform prior, i.e. the score on the same scale as PRI+."""
        return PriScore("nb:" + "".join(map(str, v.bits)), step, self.posterior(page, v) / 0.5)


def nb_train(corpus: TrainingCorpus, lam: float = DEFAULT_LAMBDA,
             dictionary: Dictionary | None = None) -> NaiveBayes:
    if not len(corpus):
        raise ValueError("training corpus is empty")
    dictionary = dictionary or build_dictionary(corpus)
    counts = topic_counts(corpus, dictionary)
    if lam == 0 and any(row.sum() == 0 for row in counts):
        raise ValueError("topics with no training keywords need smoothing")
    return NaiveBayes(corpus.topics, dictionary, counts, lam)


def nb_posterior(model: NaiveBayes, page: AdvertPage | str, v: InterestVector) -> float:
    return model.posterior(page, v)
