"""Simulated black-box search engine.

The observer keeps per-topic evidence, turns it into a belief with a softmax,
and fills each response page with adverts for the topics it believes in.
Queries are scored against per-topic keyword distributions built from advert
template banks; a query whose words are equally likely under every topic
(or unknown to all of them) carries no information and is ignored.
"""

from __future__ import annotations

import dataclasses
from typing import Mapping, Sequence

import numpy as np

from plausdeny.core import Interaction, Item
from plausdeny.textpipe import TextNormalizer, default_normalizer


@dataclasses.dataclass(frozen=True)
class ObserverParams:
    """Learning and page-emission knobs.

    Attributes:
      alpha: weight of query evidence.
      beta: weight of evidence from each clicked item.
      gamma: multiplicative bonus per consecutive query on the same topic.
      rho: per-query decay of accumulated evidence, 1 means none.
      mean_adverts: mean number of adverts per page.
      empty_page_cap: probability that a page carries no adverts.
      kappa: softmax sharpness turning evidence into belief.
      target_floor: minimum belief for a topic to be advertised.
      organic_results: non-advert result items per page.
      smoothing: additive smoothing of the per-topic keyword distributions.
    """

    alpha: float = 1.0
    beta: float = 0.1
    gamma: float = 1.5
    rho: float = 1.0
    mean_adverts: float = 2.5
    empty_page_cap: float = 0.08
    kappa: float = 3.0
    target_floor: float = 0.05
    organic_results: int = 3
    smoothing: float = 0.01

    def __post_init__(self):
        if self.alpha < 0 or self.beta < 0:
            raise ValueError("evidence weights must be non-negative")
        if self.gamma < 1:
            raise ValueError("coherence bonus must be at least 1")
        if not 0 < self.rho <= 1:
            raise ValueError("decay must lie in (0, 1]")
        if not self.mean_adverts > 0:
            raise ValueError("mean adverts per page must be positive")
        if not 0 <= self.empty_page_cap < 0.10:
            raise ValueError("empty-page probability must be below 0.10")
        if self.mean_adverts < 1 - self.empty_page_cap:
            raise ValueError("mean adverts too small for the empty-page cap")
        if not self.kappa > 0 or not 0 <= self.target_floor < 1:
            raise ValueError("invalid belief sharpness or targeting floor")
        if self.organic_results < 0 or not self.smoothing > 0:
            raise ValueError("invalid organic result count or smoothing")


@dataclasses.dataclass(frozen=True)
class TemplateBank:
    """Advert texts the observer may show for one topic."""

    topic: str
    texts: tuple[str, ...]
    organic: tuple[str, ...] = ()

    def __post_init__(self):
        if not self.texts:
            raise ValueError(f"template bank for {self.topic!r} is empty")


@dataclasses.dataclass(frozen=True, eq=False)
class ObserverState:
    evidence: np.ndarray
    belief: np.ndarray
    streak: int = 0
    last_topic: int | None = None

    def __eq__(self, other):
        if not isinstance(other, ObserverState):
            return NotImplemented
        return (np.array_equal(self.evidence, other.evidence)
                and np.array_equal(self.belief, other.belief)
                and self.streak == other.streak and self.last_topic == other.last_topic)


class SearchObserver:
    """Stateless engine; all session state lives in :class:`ObserverState`."""

    def __init__(self, banks: Sequence[TemplateBank], params: ObserverParams = ObserverParams(),
                 normalizer: TextNormalizer | None = None, house_ads: Sequence[str] = ("sponsored",)):
        if len(banks) < 2:
            raise ValueError("observer needs at least two topics")
        self.banks = tuple(banks)
        self.topics = tuple(b.topic for b in banks)
        if len(set(self.topics)) != len(self.topics):
            raise ValueError("duplicate observer topics")
        self.params = params
        self.normalizer = normalizer or default_normalizer()
        self.house_ads = tuple(house_ads)

        vocab: dict[str, int] = {}
        token_lists = []
        for bank in self.banks:
            toks = [t for text in bank.texts for t in self.normalizer.normalize(text)]
            token_lists.append(toks)
            for t in toks:
                vocab.setdefault(t, len(vocab))
        counts = np.zeros((len(self.banks), len(vocab)))
        for i, toks in enumerate(token_lists):
            for t in toks:
                counts[i, vocab[t]] += 1
        s = params.smoothing
        self.vocab = vocab
        self.log_word_prob = np.log((counts + s) / (counts.sum(axis=1, keepdims=True) + s * len(vocab)))

    @property
    def n_topics(self) -> int:
        return len(self.topics)

    def index(self, topic: str) -> int:
        return self.topics.index(topic)

    def topic_posterior(self, text: str) -> np.ndarray | None:
        """Posterior over topics from the text's known words, uniform prior.

        Returns None when the text is uninformative.
        """
        idx = [self.vocab[t] for t in self.normalizer.normalize(text) if t in self.vocab]
        if not idx:
            return None
        ll = self.log_word_prob[:, idx].sum(axis=1)
        if np.ptp(ll) == 0:
            return None
        ll -= ll.max()
        r = np.exp(ll)
        return r / r.sum()

    def _centered(self, r: np.ndarray) -> np.ndarray:
        t = self.n_topics
        return np.maximum(r - 1.0 / t, 0.0) * t / (t - 1)

    def _belief(self, evidence: np.ndarray) -> np.ndarray:
        z = self.params.kappa * evidence
        z = np.exp(z - z.max())
        return z / z.sum()

    def reset(self) -> ObserverState:
        n = self.n_topics
        return ObserverState(np.zeros(n), np.full(n, 1.0 / n), 0, None)

    def observe_query(self, state: ObserverState, query: str) -> ObserverState:
        r = self.topic_posterior(query)
        if r is None:
            return state
        p = self.params
        top = int(np.argmax(r))
        streak = state.streak + 1 if top == state.last_topic else 0
        evidence = state.evidence * p.rho + p.alpha * p.gamma ** streak * self._centered(r)
        return ObserverState(evidence, self._belief(evidence), streak, top)

    def observe_clicks(self, state: ObserverState, interaction: Interaction) -> ObserverState:
        """Each click, duplicates included, adds the clicked item's topic evidence."""
        if not interaction.clicks or self.params.beta == 0:
            return state
        gain = np.zeros(self.n_topics)
        for c in interaction.clicks:
            r = self.topic_posterior(interaction.page[c].text)
            if r is not None:
                gain += self._centered(r)
        if not gain.any():
            return state
        evidence = state.evidence + self.params.beta * gain
        return ObserverState(evidence, self._belief(evidence), state.streak, state.last_topic)

    def targeted(self, state: ObserverState) -> np.ndarray:
        return (state.evidence > 0) & (state.belief >= self.params.target_floor)

    def advert_count(self, rng: np.random.Generator) -> int:
        p = self.params
        if rng.random() < p.empty_page_cap:
            return 0
        return 1 + int(rng.poisson(p.mean_adverts / (1 - p.empty_page_cap) - 1))

    def emit_page(self, state: ObserverState, query: str, seed=None) -> tuple[Item, ...]:
        """Organic results for the query followed by adverts reflecting the belief.

        With nothing targeted the page carries untargeted house adverts.
        """
        rng = np.random.default_rng(seed)
        items = list(self._organic(query, rng))
        n_ads = self.advert_count(rng)
        mask = self.targeted(state)
        if n_ads and mask.any():
            w = np.where(mask, state.belief, 0.0)
            picks = rng.choice(self.n_topics, size=n_ads, p=w / w.sum())
            for t in picks:
                bank = self.banks[t]
                items.append(Item(bank.texts[rng.integers(len(bank.texts))], True, bank.topic))
        else:
            for _ in range(n_ads):
                items.append(Item(self.house_ads[rng.integers(len(self.house_ads))], True, None))
        return tuple(items)

    def _organic(self, query: str, rng: np.random.Generator):
        k = self.params.organic_results
        r = self.topic_posterior(query)
        if r is None:
            for j in range(k):
                yield Item(f"{query} result {j + 1}", False, None)
            return
        bank = self.banks[int(np.argmax(r))]
        pool = bank.organic or bank.texts
        for _ in range(k):
            yield Item(pool[rng.integers(len(pool))], False, bank.topic)


def belief_of(observer: SearchObserver, state: ObserverState) -> Mapping[str, float]:
    return dict(zip(observer.topics, state.belief.tolist()))
