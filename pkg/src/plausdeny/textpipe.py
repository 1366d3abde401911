"""Tokenisation, stop-word removal, suffix stemming and keyword frequencies.

Every advert and training text goes through the same :class:`TextNormalizer`;
a :class:`Dictionary` then restricts the resulting stems to the keyword
universe seen in training. Frequencies are computed on count vectors aligned
with the dictionary order.
"""

from __future__ import annotations

import dataclasses
import enum
import re
from pathlib import Path
from typing import Iterable

import numpy as np

from plausdeny.core import AdvertPage, TrainingCorpus

DATA_DIR = Path(__file__).parent / "data"
DEFAULT_STOPLIST = DATA_DIR / "stoplist.txt"
DEFAULT_SUFFIXES = DATA_DIR / "suffixes.txt"

_TOKEN_RE = re.compile(r"[a-z0-9]+")


class PageFlag(enum.Enum):
    """Marker returned instead of page weights when a page has no keywords."""

    EMPTY = "empty-page"


EMPTY_PAGE = PageFlag.EMPTY


def read_word_list(path: str | Path) -> list[str]:
    """One entry per line; blank lines and ``#`` comments are skipped."""
    words = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            words.append(line.casefold())
    return words


@dataclasses.dataclass(frozen=True)
class TextNormalizer:
    """Lower-case, split, drop stop-words and strip suffixes.

    Suffix rules are tried in listed order and re-applied until none fires,
    so stemming is idempotent. A rule only fires if ``min_stem`` characters
    survive.
    """

    stoplist: frozenset[str]
    suffixes: tuple[str, ...]
    min_stem: int = 3

    @classmethod
    def from_files(cls, stoplist_path=DEFAULT_STOPLIST, suffix_path=DEFAULT_SUFFIXES):
        return cls(frozenset(read_word_list(stoplist_path)), tuple(read_word_list(suffix_path)))

    def stem(self, word: str) -> str:
        changed = True
        while changed:
            changed = False
            for suf in self.suffixes:
                if word.endswith(suf) and len(word) - len(suf) >= self.min_stem:
                    word = word[: -len(suf)]
                    changed = True
                    break
        return word

    def normalize(self, text: str) -> list[str]:
        out = []
        for tok in _TOKEN_RE.findall(text.casefold().replace("'", "")):
            if len(tok) < 2 or tok in self.stoplist:
                continue
            stem = self.stem(tok)
            if stem not in self.stoplist:
                out.append(stem)
        return out


_default_normalizer: TextNormalizer | None = None


def default_normalizer() -> TextNormalizer:
    global _default_normalizer
    if _default_normalizer is None:
        _default_normalizer = TextNormalizer.from_files()
    return _default_normalizer


class KeywordSeq(tuple):
    """Ordered keywords, every one a member of the dictionary that produced it."""

    __slots__ = ()


@dataclasses.dataclass(frozen=True, eq=False)
class Dictionary:
    """Frozen keyword universe; unseen words are dropped at tokenisation."""

    keywords: tuple[str, ...]
    normalizer: TextNormalizer

    def __post_init__(self):
        if not self.keywords:
            raise ValueError("dictionary must contain at least one keyword")
        if len(set(self.keywords)) != len(self.keywords):
            raise ValueError("duplicate dictionary keywords")
        stopped = [k for k in self.keywords if k in self.normalizer.stoplist]
        if stopped:
            raise ValueError(f"stop-words in dictionary: {stopped[:5]}")
        object.__setattr__(self, "_index", {k: i for i, k in enumerate(self.keywords)})

    def __len__(self):
        return len(self.keywords)

    def __contains__(self, word):
        return word in self._index

    def position(self, word: str) -> int:
        try:
            return self._index[word]
        except KeyError:
            raise KeyError(f"{word!r} is not a dictionary keyword") from None

    def tokenize(self, text: str) -> KeywordSeq:
        return KeywordSeq(w for w in self.normalizer.normalize(text) if w in self._index)

    def counts(self, words: Iterable[str]) -> np.ndarray:
        """Count vector over the dictionary; words outside it are ignored."""
        vec = np.zeros(len(self.keywords), dtype=np.int64)
        idx = self._index
        for w in words:
            i = idx.get(w)
            if i is not None:
                vec[i] += 1
        return vec

    def text_counts(self, text: str) -> np.ndarray:
        return self.counts(self.normalizer.normalize(text))


def build_dictionary(corpus: TrainingCorpus | Iterable[str],
                     normalizer: TextNormalizer | None = None) -> Dictionary:
    """Collect every stemmed non-stop-word token in the corpus text.

    Keywords are kept in order of first appearance so the dictionary, and
    everything aligned with it, is reproducible for a given corpus.
    """
    normalizer = normalizer or default_normalizer()
    texts = corpus.texts() if isinstance(corpus, TrainingCorpus) else list(corpus)
    if not texts:
        raise ValueError("cannot build a dictionary from an empty corpus")
    seen: dict[str, None] = {}
    for text in texts:
        for w in normalizer.normalize(text):
            seen.setdefault(w, None)
    if not seen:
        raise ValueError("corpus contains no keywords after stop-word removal")
    return Dictionary(tuple(seen), normalizer)


def tokenize(dictionary: Dictionary, text: str) -> KeywordSeq:
    return dictionary.tokenize(text)


def count(dictionary: Dictionary, w: str, seq: Iterable[str]) -> int:
    dictionary.position(w)
    return sum(1 for x in seq if x == w)


def distribution(counts: np.ndarray, lam: float = 0.0) -> np.ndarray:
    """Relative frequencies of a count vector with additive smoothing ``lam``."""
    if lam < 0:
        raise ValueError("smoothing parameter must be non-negative")
    counts = np.asarray(counts, dtype=float)
    total = counts.sum() + lam * counts.size
    if total <= 0:
        raise ValueError("relative frequency undefined for an empty sequence without smoothing")
    return (counts + lam) / total


def rel_freq(dictionary: Dictionary, w: str, seq: Iterable[str]) -> float:
    seq = list(seq)
    if not any(x in dictionary for x in seq):
        raise ValueError("relative frequency undefined for an empty keyword sequence")
    return rel_freq_smoothed(dictionary, w, seq, 0.0)


def rel_freq_smoothed(dictionary: Dictionary, w: str, seq: Iterable[str], lam: float) -> float:
    pos = dictionary.position(w)
    return float(distribution(dictionary.counts(seq), lam)[pos])


def page_weights(dictionary: Dictionary, page: AdvertPage | str,
                 lam: float) -> np.ndarray | PageFlag:
    """Smoothed keyword distribution of all advert text on a page.

    Returns :data:`EMPTY_PAGE` when the page carries no dictionary keywords.
    """
    text = page.text if isinstance(page, AdvertPage) else page
    counts = dictionary.text_counts(text)
    if counts.sum() == 0:
        return EMPTY_PAGE
    return distribution(counts, lam)


def page_weight(dictionary: Dictionary, w: str, page: AdvertPage | str,
                lam: float) -> float | PageFlag:
    weights = page_weights(dictionary, page, lam)
    if weights is EMPTY_PAGE:
        return EMPTY_PAGE
    return float(weights[dictionary.position(w)])
