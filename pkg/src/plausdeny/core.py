"""Shared domain vocabulary: topics, interest vectors, pages, corpora, session logs."""

from __future__ import annotations

import dataclasses
import json
import zlib
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np

CATCH_ALL = "other"


class DataError(ValueError):
    """Raised for malformed input data (corpus files, logs, fixtures)."""


def substream(seed: int, *names) -> np.random.Generator:
    """Independent generator for a named stage of a seeded run.

    String names are hashed so the stream does not depend on call order.
    """
    key = [int(seed)]
    for n in names:
        key.append(zlib.crc32(n.encode()) if isinstance(n, str) else int(n))
    return np.random.default_rng(key)


@dataclasses.dataclass(frozen=True)
class TopicSet:
    """Ordered topic universe; index 0 is always the catch-all topic."""

    topics: tuple[str, ...]

    def __post_init__(self):
        topics = tuple(t.strip().casefold() for t in self.topics)
        if not topics or topics[0] != CATCH_ALL:
            raise ValueError(f"topic 0 must be the catch-all {CATCH_ALL!r}")
        if any(not t for t in topics):
            raise ValueError("topic identifiers must be non-empty")
        if len(set(topics)) != len(topics):
            raise ValueError("topic identifiers must be unique")
        object.__setattr__(self, "topics", topics)

    @classmethod
    def with_sensitive(cls, sensitive: Iterable[str]) -> "TopicSet":
        return cls((CATCH_ALL, *sensitive))

    def __len__(self):
        return len(self.topics)

    def __iter__(self):
        return iter(self.topics)

    def __contains__(self, topic):
        return topic.casefold() in self.topics

    def index(self, topic: str) -> int:
        try:
            return self.topics.index(topic.casefold())
        except ValueError:
            raise KeyError(f"unknown topic {topic!r}") from None

    @property
    def sensitive(self) -> tuple[str, ...]:
        return self.topics[1:]


@dataclasses.dataclass(frozen=True)
class InterestVector:
    """Binary interest vector aligned positionally with a TopicSet."""

    bits: tuple[int, ...]

    def __post_init__(self):
        bits = tuple(int(b) for b in self.bits)
        if any(b not in (0, 1) for b in bits):
            raise ValueError("interest vector entries must be 0 or 1")
        object.__setattr__(self, "bits", bits)

    def __len__(self):
        return len(self.bits)

    def as_array(self) -> np.ndarray:
        return np.array(self.bits, dtype=bool)

    @property
    def is_single(self) -> bool:
        return sum(self.bits) == 1

    @property
    def is_complement(self) -> bool:
        return len(self.bits) >= 2 and sum(self.bits) == len(self.bits) - 1

    @property
    def active(self) -> tuple[int, ...]:
        return tuple(i for i, b in enumerate(self.bits) if b)


def make_single_interest(topics: TopicSet, i: int) -> InterestVector:
    """Return the single-topic vector with a 1 at position ``i``."""
    n = len(topics)
    if not 0 <= i < n:
        raise IndexError(f"topic index {i} out of range for {n} topics")
    bits = [0] * n
    bits[i] = 1
    return InterestVector(tuple(bits))


def complement_interest(v: InterestVector) -> InterestVector:
    """Bitwise complement of a single-topic vector (interest in every other topic)."""
    if not v.is_single:
        raise ValueError(f"complement is only defined for single-topic vectors, got {v.bits}")
    return InterestVector(tuple(1 - b for b in v.bits))


@dataclasses.dataclass(frozen=True)
class Item:
    """One entry on a result page: visible text plus whether it is an advert."""

    text: str
    is_advert: bool
    topic: str | None = None  # simulator-side ground truth, never read by estimators


@dataclasses.dataclass(frozen=True)
class AdvertPage:
    adverts: tuple[str, ...] = ()

    @property
    def text(self) -> str:
        # adverts on one page are scored as a single concatenated sequence
        return " ".join(self.adverts)

    def __len__(self):
        return len(self.adverts)


@dataclasses.dataclass(frozen=True)
class Interaction:
    """A (query, response page, clicks) triple."""

    query: str
    page: tuple[Item, ...]
    clicks: tuple[int, ...] = ()

    def __post_init__(self):
        n = len(self.page)
        bad = [c for c in self.clicks if not 0 <= c < n]
        if bad:
            raise ValueError(f"click indices {bad} outside page of {n} items")

    def advert_page(self) -> AdvertPage:
        return AdvertPage(tuple(it.text for it in self.page if it.is_advert))


@dataclasses.dataclass(frozen=True)
class TrainingCorpus:
    """Labelled (topic, advert text) pairs; the estimator's picture of prior knowledge."""

    topics: TopicSet
    entries: tuple[tuple[str, str], ...]

    def __post_init__(self):
        entries = tuple((label.strip().casefold(), text) for label, text in self.entries)
        unknown = sorted({label for label, _ in entries if label not in self.topics})
        if unknown:
            raise DataError(f"corpus labels not in topic set: {unknown}")
        object.__setattr__(self, "entries", entries)

    def __len__(self):
        return len(self.entries)

    def slice(self, topic: str) -> list[str]:
        topic = topic.casefold()
        return [text for label, text in self.entries if label == topic]

    def texts(self) -> list[str]:
        return [text for _, text in self.entries]

    def save(self, path: str | Path) -> None:
        """Write JSON-lines with keys ``label`` and ``text``."""
        with open(path, "w", encoding="utf-8") as fh:
            for label, text in self.entries:
                fh.write(json.dumps({"label": label, "text": text}) + "\n")

    @classmethod
    def load(cls, path: str | Path, topics: TopicSet | None = None) -> "TrainingCorpus":
        """Read a corpus file, either JSON-lines or tab-separated ``label<TAB>text``.

        When ``topics`` is omitted the topic set is the catch-all followed by
        every other label in order of first appearance.
        """
        entries = list(_read_corpus_lines(Path(path)))
        if topics is None:
            seen = [CATCH_ALL]
            for label, _ in entries:
                if label not in seen:
                    seen.append(label)
            topics = TopicSet(tuple(seen))
        return cls(topics, tuple(entries))


def _read_corpus_lines(path: Path) -> Iterator[tuple[str, str]]:
    try:
        fh = open(path, encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read corpus {path}: {exc}") from exc
    with fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.rstrip("\n")
            if not line.strip():
                continue
            if line.lstrip().startswith("{"):
                try:
                    rec = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise DataError(f"{path}:{lineno}: invalid JSON ({exc.msg})") from exc
                for key in ("label", "text"):
                    if key not in rec:
                        raise DataError(f"{path}:{lineno}: missing field {key!r}")
                yield str(rec["label"]).casefold(), str(rec["text"])
            else:
                label, sep, text = line.partition("\t")
                if not sep or not label.strip():
                    raise DataError(f"{path}:{lineno}: expected 'label<TAB>text'")
                yield label.strip().casefold(), text


@dataclasses.dataclass(frozen=True)
class DeniabilityParams:
    epsilon: float
    m: int = 2

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if self.m < 2:
            raise ValueError("m must be at least 2")


@dataclasses.dataclass
class StepRecord:
    """One step of an executed session, as persisted in the JSON-lines log."""

    step: int
    kind: str  # probe | sensitive | noise | proxy
    interaction: Interaction
    probe: int | None = None
    pri_topic: float | None = None
    pri_complement: float | None = None
    pde: float | None = None
    pri_all: dict[str, float] | None = None

    @property
    def is_probe(self) -> bool:
        return self.probe is not None

    @property
    def adverts(self) -> AdvertPage:
        return self.interaction.advert_page()


@dataclasses.dataclass
class SessionLog:
    script_id: str
    topic: str
    config: str
    steps: list[StepRecord]

    def probes(self) -> list[StepRecord]:
        return [s for s in self.steps if s.is_probe]

    def pde_by_probe(self) -> dict[int, float]:
        return {s.probe: s.pde for s in self.probes()}

    def to_records(self) -> list[dict]:
        out = []
        for s in self.steps:
            ia = s.interaction
            out.append({
                "script_id": self.script_id,
                "topic": self.topic,
                "config": self.config,
                "step": s.step,
                "kind": s.kind,
                "is_probe": s.is_probe,
                "probe": s.probe,
                "query": ia.query,
                "page": [
                    {"text": it.text, "advert": it.is_advert, "topic": it.topic}
                    for it in ia.page
                ],
                "adverts": list(s.adverts.adverts),
                "clicks": list(ia.clicks),
                "pri_topic": s.pri_topic,
                "pri_complement": s.pri_complement,
                "pde": s.pde,
                "pri_all": s.pri_all,
            })
        return out

    @classmethod
    def from_records(cls, records: Sequence[dict]) -> "SessionLog":
        if not records:
            raise DataError("empty session record list")
        head = records[0]
        steps = []
        for r in records:
            page = tuple(Item(p["text"], bool(p["advert"]), p.get("topic")) for p in r["page"])
            steps.append(StepRecord(
                step=r["step"],
                kind=r["kind"],
                interaction=Interaction(r["query"], page, tuple(r["clicks"])),
                probe=r["probe"],
                pri_topic=r["pri_topic"],
                pri_complement=r["pri_complement"],
                pde=r["pde"],
                pri_all=r["pri_all"],
            ))
        return cls(head["script_id"], head["topic"], head["config"], steps)


def write_logs(logs: Iterable[SessionLog], path: str | Path) -> None:
    """Persist logs as JSON-lines, one record per step."""
    with open(path, "w", encoding="utf-8") as fh:
        for log in logs:
            for rec in log.to_records():
                fh.write(json.dumps(rec, sort_keys=True) + "\n")


def read_logs(path: str | Path) -> list[SessionLog]:
    grouped: dict[str, list[dict]] = {}
    try:
        fh = open(path, encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read session logs {path}: {exc}") from exc
    with fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"{path}:{lineno}: invalid JSON ({exc.msg})") from exc
            grouped.setdefault(rec["script_id"], []).append(rec)
    return [SessionLog.from_records(recs) for recs in grouped.values()]
