"""The standard simulated world: topic vocabularies, query lists, advert text.

Advert texts are generated per topic from the shipped vocabulary fixtures and
split into two disjoint halves. One half becomes the labelled training corpus
(sensitive topics plus the pooled catch-all); the other half is the observer's
template bank. Proxy topics exist only on the observer side, so their
keywords never enter the estimator's dictionary.
"""

from __future__ import annotations

import dataclasses
from pathlib import Path

from plausdeny.core import CATCH_ALL, DataError, TopicSet, TrainingCorpus, substream
from plausdeny.observer import ObserverParams, SearchObserver, TemplateBank
from plausdeny.textpipe import DATA_DIR, TextNormalizer, default_normalizer, read_word_list

ORGANIC_FILLERS = ("article", "forum", "wiki", "blog")


@dataclasses.dataclass(frozen=True)
class WorldSize:
    sensitive_adverts: int = 80
    other_adverts: int = 40
    proxy_adverts: int = 40
    train_fraction: float = 0.5


def _read_dir(path: Path) -> dict[str, list[str]]:
    if not path.is_dir():
        raise DataError(f"missing fixture directory {path}")
    out = {}
    for f in sorted(path.glob("*.txt")):
        words = read_word_list(f)
        if not words:
            raise DataError(f"empty fixture file {f}")
        out[f.stem.casefold()] = words
    if not out:
        raise DataError(f"no fixture files in {path}")
    return out


def _advert(rng, words, generic, boiler, j: int) -> str:
    k = min(len(words), int(rng.integers(2, 4)))
    parts = list(rng.choice(words, size=k, replace=False))
    if generic:
        # cycled, not sampled: generic words carry no topic signal by construction
        parts.append(generic[j % len(generic)])
    rng.shuffle(parts)
    b = rng.choice(boiler, size=2, replace=False)
    return f"{b[0].capitalize()} {' '.join(parts)} - {b[1]}"


def _organic(rng, words) -> str:
    k = min(len(words), int(rng.integers(2, 4)))
    parts = list(rng.choice(words, size=k, replace=False))
    return " ".join(parts) + " " + ORGANIC_FILLERS[rng.integers(len(ORGANIC_FILLERS))]


@dataclasses.dataclass
class World:
    """Everything a session needs besides the estimator and observer params."""

    topics: TopicSet
    corpus: TrainingCorpus
    banks: dict[str, TemplateBank]
    other_categories: tuple[str, ...]
    proxy_topics: tuple[str, ...]
    vocab: dict[str, list[str]]
    sensitive_queries: dict[str, list[str]]
    noise_queries: dict[str, list[str]]
    proxy_queries: dict[str, list[str]]
    probes: list[str]
    house_ads: tuple[str, ...]
    normalizer: TextNormalizer

    def observer(self, params: ObserverParams = ObserverParams()) -> SearchObserver:
        return SearchObserver(list(self.banks.values()), params, self.normalizer, self.house_ads)

    def topic_keywords(self, topic: str) -> frozenset[str]:
        """Stemmed vocabulary of a session topic; the catch-all pools every category."""
        if topic == CATCH_ALL:
            words = [w for c in self.other_categories for w in self.vocab[c]]
        else:
            words = self.vocab[topic]
        return frozenset(t for w in words for t in self.normalizer.normalize(w))

    def popular_queries(self) -> list[tuple[str, str]]:
        """(category, query) pairs making up the popular-query list."""
        return [(c, q) for c in self.other_categories for q in self.noise_queries[c]]


def build_world(seed: int = 0, data_dir: str | Path = DATA_DIR,
                size: WorldSize = WorldSize(), normalizer: TextNormalizer | None = None) -> World:
    data_dir = Path(data_dir)
    normalizer = normalizer or default_normalizer()
    sens_vocab = _read_dir(data_dir / "vocab" / "sensitive")
    other_vocab = _read_dir(data_dir / "vocab" / "other")
    proxy_vocab = _read_dir(data_dir / "vocab" / "proxy")
    generic = read_word_list(data_dir / "vocab" / "generic.txt")
    boiler = read_word_list(data_dir / "vocab" / "boilerplate.txt")
    sens_q = _read_dir(data_dir / "queries" / "sensitive")
    noise_q = _read_dir(data_dir / "queries" / "noise")
    proxy_q = _read_dir(data_dir / "queries" / "proxy")
    probes = read_word_list(data_dir / "queries" / "probes.txt")

    for name, vocab, queries in (("sensitive", sens_vocab, sens_q), ("proxy", proxy_vocab, proxy_q)):
        missing = sorted(set(vocab) ^ set(queries))
        if missing:
            raise DataError(f"{name} vocab and query fixtures disagree on topics: {missing}")
    if set(noise_q) != set(other_vocab):
        raise DataError("noise query categories must match the catch-all vocab categories")
    clash = (set(sens_vocab) | set(proxy_vocab) | {CATCH_ALL}) & set(other_vocab)
    if clash or set(sens_vocab) & set(proxy_vocab):
        raise DataError(f"topic names must be distinct across groups: {sorted(clash)}")
    if len(probes) < 6:
        raise DataError("need at least six probe queries")

    topics = TopicSet.with_sensitive(sorted(sens_vocab))
    entries = []
    banks = {}

    def make(topic, words, n, with_generic, label):
        rng = substream(seed, "adverts", topic)
        offset = int(rng.integers(len(generic)))
        texts = [_advert(rng, words, generic if with_generic else (), boiler, offset + j)
                 for j in range(n)]
        organic = tuple(_organic(rng, words) for _ in range(20))
        order = rng.permutation(n)
        cut = int(round(n * size.train_fraction)) if label else 0
        train_idx, bank_idx = order[:cut], order[cut:]
        for i in sorted(train_idx):
            entries.append((label, texts[i]))
        banks[topic] = TemplateBank(topic, tuple(texts[i] for i in sorted(bank_idx)), organic)

    for t in topics.sensitive:
        make(t, sens_vocab[t], size.sensitive_adverts, True, t)
    for c in sorted(other_vocab):
        make(c, other_vocab[c], size.other_adverts, True, CATCH_ALL)
    for p in sorted(proxy_vocab):
        make(p, proxy_vocab[p], size.proxy_adverts, False, None)

    house_rng = substream(seed, "house-ads")
    house = tuple(" ".join(house_rng.choice(boiler, size=3, replace=False)).capitalize()
                  for _ in range(12))

    vocab = {**sens_vocab, **other_vocab, **proxy_vocab}
    return World(
        topics=topics,
        corpus=TrainingCorpus(topics, tuple(entries)),
        banks=banks,
        other_categories=tuple(sorted(other_vocab)),
        proxy_topics=tuple(sorted(proxy_vocab)),
        vocab=vocab,
        sensitive_queries=sens_q,
        noise_queries=noise_q,
        proxy_queries=proxy_q,
        probes=probes,
        house_ads=house,
        normalizer=normalizer,
    )


def corpus_from_pages(pages, labels, topics: TopicSet) -> TrainingCorpus:
    """Labelled corpus from advert pages, skipping pages with no adverts."""
    entries = [(label, page.text) for page, label in zip(pages, labels) if len(page)]
    return TrainingCorpus(topics, tuple(entries))
