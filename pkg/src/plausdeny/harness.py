"""Query-session construction, execution, aggregation and reporting.

A session opens with probe 0 and then alternates gaps of topic queries with
probes 1 to 5. Noise models insert popular queries after every topic query,
click policies decide which result items are clicked, and proxy sessions
replace each gap by a shuffled block of proxy queries around one topic query.
"""

from __future__ import annotations

import csv
import dataclasses
import enum
import io
from typing import Iterable, Sequence

import numpy as np

from plausdeny.core import (
    CATCH_ALL,
    AdvertPage,
    Interaction,
    Item,
    SessionLog,
    StepRecord,
    TopicSet,
    TrainingCorpus,
    substream,
)
from plausdeny.deniability import pde, report_percent
from plausdeny.estimators import (
    EstimatorConfig,
    TrainedEstimator,
    nb_train,
    pri,
    pri_all,
    pri_pair,
    pri_plus,
    session_detect,
    train,
)
from plausdeny.observer import SearchObserver
from plausdeny.textpipe import TextNormalizer, default_normalizer
from plausdeny.world import World

N_PROBES = 6
DEFAULT_GAP = 3
DEFAULT_FOLDS = 7


class NoiseModel(enum.Enum):
    NONE = 0
    L = 1
    M = 2
    H = 3

    @classmethod
    def parse(cls, s: str) -> "NoiseModel":
        try:
            return cls[s.strip().upper()]
        except KeyError:
            raise ValueError(f"unknown noise model {s!r}; expected L, M, H or none") from None


class ClickKind(enum.Enum):
    NO_CLICK = "NoClick"
    RELEVANT = "ClickRelevant"
    NON_RELEVANT = "ClickNonRelevant"
    ALL = "ClickAll"
    TWO_RANDOM = "ClickTwoRandom"

    @classmethod
    def parse(cls, s: str) -> "ClickKind":
        for k in cls:
            if k.value.casefold() == s.strip().casefold():
                return k
        raise ValueError(f"unknown click policy {s!r}; expected one of {[k.value for k in cls]}")


@dataclasses.dataclass(frozen=True)
class ClickPolicy:
    kind: ClickKind = ClickKind.NO_CLICK
    threshold: float = 0.1

    def __post_init__(self):
        if not self.threshold > 0:
            raise ValueError("click threshold must be positive")


@dataclasses.dataclass(frozen=True)
class Step:
    kind: str  # probe | sensitive | noise | proxy
    query: str
    probe: int | None = None


@dataclasses.dataclass(frozen=True)
class SessionScript:
    script_id: str
    topic: str
    steps: tuple[Step, ...]
    clicks: ClickPolicy = ClickPolicy()
    noise: NoiseModel = NoiseModel.NONE
    proxy: str | None = None

    @property
    def config(self) -> str:
        parts = [f"noise:{self.noise.name}", f"clicks:{self.clicks.kind.value}"]
        if self.proxy:
            parts.append(f"proxy:{self.proxy}")
        return "+".join(parts)


class ScriptError(ValueError):
    pass


def validate_script(script: SessionScript) -> None:
    """Raise ScriptError if probe placement, noise counts or proxy blocks are wrong."""
    steps = script.steps
    probes = [(i, s.probe) for i, s in enumerate(steps) if s.kind == "probe"]
    if not steps or steps[0].kind != "probe" or steps[0].probe != 0:
        raise ScriptError("session must open with probe 0")
    if [p for _, p in probes] != list(range(N_PROBES)):
        raise ScriptError(f"probes must be 0..{N_PROBES - 1} in order")
    if steps[-1].kind != "probe":
        raise ScriptError("session must end with the last probe")
    n = script.noise.value
    for (a, _), (b, _) in zip(probes, probes[1:]):
        gap = steps[a + 1:b]
        tail = 0
        for s in reversed(gap):
            if s.kind != "noise":
                break
            tail += 1
        if tail != n:
            raise ScriptError(f"expected {n} noise steps before probe at step {b}, found {tail}")
        kinds = [s.kind for s in gap]
        if script.proxy is None:
            if "proxy" in kinds:
                raise ScriptError("proxy step in a non-proxy session")
            topic_steps = [i for i, k in enumerate(kinds) if k == "sensitive"]
            for i in topic_steps:
                run = kinds[i + 1:i + 1 + n]
                if run != ["noise"] * n:
                    raise ScriptError("each topic query must be followed by the noise model's noise steps")
        else:
            block = kinds[:len(kinds) - tail]
            if block.count("sensitive") != 1 or not 3 <= block.count("proxy") <= 4:
                raise ScriptError("proxy block must hold one topic query and 3-4 proxy queries")
            if len(block) != block.count("sensitive") + block.count("proxy"):
                raise ScriptError("proxy block contains foreign steps")
            if not any(x == y == "proxy" for x, y in zip(block, block[1:])):
                raise ScriptError("proxy block must keep two adjacent proxy queries")


def _noise_picker(world: World, rng: np.random.Generator):
    popular = world.popular_queries()
    last = [None]

    def pick() -> str:
        # consecutive noise queries come from different categories
        while True:
            cat, q = popular[rng.integers(len(popular))]
            if cat != last[0]:
                last[0] = cat
                return q
    return pick


def build_session(world: World, topic: str, noise: NoiseModel = NoiseModel.NONE,
                  clicks: ClickPolicy = ClickPolicy(), proxy: str | None = None,
                  seed: int = 0, gap: int = DEFAULT_GAP, index: int = 0) -> SessionScript:
    """Scripted session for ``topic``; ``other`` builds a catch-all session of popular queries."""
    topic = topic.casefold()
    if topic not in world.topics:
        raise KeyError(f"unknown topic {topic!r}")
    if proxy is not None:
        proxy = proxy.casefold()
        if proxy == topic:
            raise ValueError("proxy topic must differ from the session topic")
        if proxy not in world.proxy_queries:
            raise KeyError(f"no query list for proxy topic {proxy!r}")
    if gap < 1:
        raise ValueError("gap must hold at least one topic query")
    config = f"{noise.name}/{clicks.kind.value}/{proxy or '-'}"
    rng = substream(seed, "script", topic, config, index)
    noise_pick = _noise_picker(world, rng)
    if topic == CATCH_ALL:
        topic_pick = noise_pick
    else:
        qs = world.sensitive_queries[topic]
        if not qs:
            raise ValueError(f"empty query list for {topic!r}")
        topic_pick = lambda: qs[rng.integers(len(qs))]  # noqa: E731
    probes = world.probes
    n = noise.value

    steps = [Step("probe", probes[0], 0)]
    for k in range(1, N_PROBES):
        if proxy is None:
            for _ in range(gap):
                steps.append(Step("sensitive", topic_pick()))
                steps.extend(Step("noise", noise_pick()) for _ in range(n))
        else:
            steps.extend(_proxy_block(rng, topic_pick(), world.proxy_queries[proxy]))
            steps.extend(Step("noise", noise_pick()) for _ in range(n))
        steps.append(Step("probe", probes[k % len(probes)], k))
    script = SessionScript(f"{topic}/{config}/{index:04d}", topic, tuple(steps), clicks, noise, proxy)
    validate_script(script)
    return script


def _proxy_block(rng, topic_query: str, proxy_queries: Sequence[str]) -> list[Step]:
    m = int(rng.integers(3, 5))
    block = [Step("proxy", proxy_queries[rng.integers(len(proxy_queries))]) for _ in range(m)]
    block.append(Step("sensitive", topic_query))
    while True:
        order = rng.permutation(len(block))
        kinds = [block[i].kind for i in order]
        if any(x == y == "proxy" for x, y in zip(kinds, kinds[1:])):
            return [block[i] for i in order]


def term_frequency(text: str, topic_keywords: Iterable[str],
                   normalizer: TextNormalizer | None = None) -> float:
    """Share of the item's content words that are topic keywords.

    Tokens are counted after stop-word removal and stemming.
    """
    toks = (normalizer or default_normalizer()).normalize(text)
    if not toks:
        return 0.0
    kw = set(topic_keywords)
    return sum(1 for t in toks if t in kw) / len(toks)


def apply_clicks(policy: ClickPolicy, page: Sequence[Item], topic_keywords: Iterable[str],
                 rng: np.random.Generator | None = None, is_probe: bool = False,
                 normalizer: TextNormalizer | None = None) -> tuple[int, ...]:
    kind = policy.kind
    if is_probe or kind is ClickKind.NO_CLICK or not page:
        return ()
    if kind is ClickKind.ALL:
        return tuple(range(len(page)))
    if kind is ClickKind.TWO_RANDOM:
        if rng is None:
            raise ValueError("random click policy needs a seeded generator")
        return tuple(int(i) for i in rng.integers(len(page), size=2))
    kw = frozenset(topic_keywords)
    tf = [term_frequency(it.text, kw, normalizer) for it in page]
    if kind is ClickKind.RELEVANT:
        return tuple(i for i, v in enumerate(tf) if v > policy.threshold)
    return tuple(i for i, v in enumerate(tf) if v <= policy.threshold)


def run_session(script: SessionScript, observer: SearchObserver, estimator: TrainedEstimator,
                world: World, seed: int = 0) -> SessionLog:
    """Play a script against a fresh observer and score every probe page."""
    rng = substream(seed, "session", script.script_id)
    state = observer.reset()
    keywords = world.topic_keywords(script.topic)
    records = []
    base = None
    for i, step in enumerate(script.steps):
        page = observer.emit_page(state, step.query, rng)
        is_probe = step.kind == "probe"
        clicks = apply_clicks(script.clicks, page, keywords, rng, is_probe, world.normalizer)
        interaction = Interaction(step.query, page, clicks)
        state = observer.observe_query(state, step.query)
        state = observer.observe_clicks(state, interaction)
        rec = StepRecord(i, step.kind, interaction, step.probe)
        if is_probe:
            adverts = interaction.advert_page()
            m_i, m_c = pri_pair(estimator, adverts, script.topic, step.probe)
            if base is None:
                base = (m_i, m_c)
            rec.pri_topic, rec.pri_complement = m_i.value, m_c.value
            rec.pde = pde(m_i, m_c, base[0], base[1], step.probe).epsilon_star
            rec.pri_all = dict(zip(estimator.topics, map(float, pri_all(estimator, adverts))))
        records.append(rec)
    return SessionLog(script.script_id, script.topic, script.config, records)


def run_grid(world: World, observer: SearchObserver, estimator: TrainedEstimator,
             topics: Sequence[str], sessions: int, seed: int, noise=NoiseModel.NONE,
             clicks=ClickPolicy(), proxy=None, gap: int = DEFAULT_GAP) -> list[SessionLog]:
    """``sessions`` sessions per topic. ``proxy='rotate'`` cycles through proxy topics."""
    logs = []
    for t in topics:
        for j in range(sessions):
            p = world.proxy_topics[j % len(world.proxy_topics)] if proxy == "rotate" else proxy
            script = build_session(world, t, noise, clicks, p, seed, gap, j)
            logs.append(run_session(script, observer, estimator, world, seed))
    return logs


# aggregation ----------------------------------------------------------------

@dataclasses.dataclass(frozen=True)
class ReportRow:
    topic: str
    cells: tuple[tuple[int, int], ...]  # (max, median) per probe 1..5


@dataclasses.dataclass(frozen=True)
class ReportTable:
    title: str
    rows: tuple[ReportRow, ...]
    folds: int = DEFAULT_FOLDS

    def __post_init__(self):
        for r in self.rows:
            if len(r.cells) != N_PROBES - 1:
                raise ValueError("report rows need exactly five probe columns")

    @staticmethod
    def cell(mx: int, med: int) -> str:
        return f"{mx} ({med:2d})"

    def row(self, topic: str) -> ReportRow:
        for r in self.rows:
            if r.topic == topic:
                return r
        raise KeyError(topic)

    def to_text(self) -> str:
        header = ["topic"] + [f"probe {k}" for k in range(1, N_PROBES)]
        body = [[r.topic] + [self.cell(*c) for c in r.cells] for r in self.rows]
        widths = [max(len(x[i]) for x in [header] + body) for i in range(len(header))]
        lines = [self.title, f"max (median) over {self.folds} folds, percent"]
        for line in [header] + body:
            lines.append("  ".join(x.rjust(w) if i else x.ljust(w)
                                   for i, (x, w) in enumerate(zip(line, widths))).rstrip())
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["topic"] + [f"probe{k}_{s}" for k in range(1, N_PROBES) for s in ("max", "median")])
        for r in self.rows:
            w.writerow([r.topic] + [v for c in r.cells for v in c])
        return buf.getvalue()


def fold_assignment(n: int, folds: int, seed: int, key: str = "") -> np.ndarray:
    """Seeded, balanced partition of ``n`` items into ``folds`` groups."""
    rng = substream(seed, "folds", key)
    return rng.permutation(np.arange(n) % folds)


def aggregate(logs: Sequence[SessionLog], folds: int = DEFAULT_FOLDS, seed: int = 0,
              title: str = "PDE") -> ReportTable:
    """Per topic and probe, max and median of the fold-mean PDE as integer percent."""
    if not logs:
        raise ValueError("no session logs to aggregate")
    groups: dict[str, list[SessionLog]] = {}
    for log in sorted(logs, key=lambda g: g.script_id):
        groups.setdefault(log.topic, []).append(log)
    rows = []
    for topic in sorted(groups, key=lambda t: (t == CATCH_ALL, t)):
        g = groups[topic]
        if len(g) < folds:
            raise ValueError(f"topic {topic!r} has {len(g)} logs, need at least {folds}")
        pdes = np.array([[log.pde_by_probe()[k] for k in range(1, N_PROBES)] for log in g])
        assign = fold_assignment(len(g), folds, seed, topic)
        fold_means = np.array([pdes[assign == f].mean(axis=0) for f in range(folds)])
        cells = []
        for k in range(N_PROBES - 1):
            col = fold_means[:, k]
            cells.append((report_percent(col.max()), report_percent(np.median(col))))
        rows.append(ReportRow(topic, tuple(cells)))
    return ReportTable(title, tuple(rows), folds)


# detection ------------------------------------------------------------------

def session_detection_rates(logs: Sequence[SessionLog], cfg: EstimatorConfig = EstimatorConfig(),
                            scorer: str = "pri_all") -> tuple[float, float]:
    """(true, false) session-level detection rates.

    A topic session is detected when its own topic scores above threshold at
    any of probes 1-5; a catch-all session is a false detection when any
    sensitive topic does.
    """
    if not logs:
        raise ValueError("no session logs")
    true_hits = true_n = false_hits = false_n = 0
    for log in logs:
        probes = [s for s in log.probes() if s.probe >= 1]
        if log.topic == CATCH_ALL:
            false_n += 1
            flagged = any(
                session_detect([p.pri_all[t] for p in probes], cfg, len(probes))
                for t in probes[0].pri_all if t != CATCH_ALL)
            false_hits += flagged
        else:
            true_n += 1
            true_hits += session_detect([p.pri_all[log.topic] for p in probes], cfg, len(probes))
    true_rate = true_hits / true_n if true_n else float("nan")
    false_rate = false_hits / false_n if false_n else float("nan")
    return true_rate, false_rate


def unsmoothed_session_scores(logs: Sequence[SessionLog], estimator: TrainedEstimator) -> list[SessionLog]:
    """Copies of ``logs`` with every probe's per-topic scores recomputed by PRI."""
    out = []
    for log in logs:
        steps = []
        for s in log.steps:
            s = dataclasses.replace(s)
            if s.is_probe:
                page = s.adverts
                s.pri_all = {t: pri(estimator, page, estimator.single(t)).value
                             for t in estimator.topics}
            steps.append(s)
        out.append(SessionLog(log.script_id, log.topic, log.config, steps))
    return out


# estimator comparison -------------------------------------------------------

@dataclasses.dataclass(frozen=True)
class ComparisonRow:
    topic: str
    pri_plus: float
    pri: float
    nb: float
    n_test: int


def labelled_pages(logs: Sequence[SessionLog]) -> list[tuple[str, AdvertPage]]:
    """Every advert page of every session, labelled with the session topic."""
    return [(log.topic, s.adverts) for log in logs for s in log.steps]


def compare_estimators(pages: Sequence[tuple[str, AdvertPage]], world: World,
                       cfg: EstimatorConfig = EstimatorConfig(), seed: int = 0,
                       folds: int = 5) -> list[ComparisonRow]:
    """Per-topic detection rates of PRI+, PRI and naive Bayes.

    For each sensitive topic a balanced two-topic set of labelled pages (the
    topic against the catch-all) is cross-validated over ``folds`` disjoint
    folds: each fold in turn is the test part and the rest trains every
    estimator. Rates are measured on the topic-labelled test pages.
    """
    by_topic: dict[str, list[AdvertPage]] = {}
    for label, page in pages:
        if len(page):
            by_topic.setdefault(label, []).append(page)
    others = by_topic.get(CATCH_ALL, [])
    rows = []
    for topic in world.topics.sensitive:
        mine = by_topic.get(topic, [])
        n = min(len(mine), len(others))
        if folds < 2:
            raise ValueError("need at least two folds")
        if n < folds:
            raise ValueError(f"not enough labelled pages for {topic!r}")
        pick = substream(seed, "compare-balance", topic)
        pos = [mine[i] for i in sorted(pick.choice(len(mine), n, replace=False))]
        neg = [others[i] for i in sorted(pick.choice(len(others), n, replace=False))]
        items = [(topic, p) for p in pos] + [(CATCH_ALL, p) for p in neg]
        topics = TopicSet((CATCH_ALL, topic))
        hits = {"pri_plus": 0, "pri": 0, "nb": 0}
        total = 0
        order = substream(seed, "compare-split", topic).permutation(len(items))
        for part in np.array_split(order, folds):
            held = set(part.tolist())
            test = [items[i] for i in part]
            corpus = TrainingCorpus(topics, tuple((items[i][0], items[i][1].text)
                                                  for i in order if i not in held))
            est = train(corpus, cfg, normalizer=world.normalizer)
            nb = nb_train(corpus, cfg.lam, est.dictionary)
            v = est.single(topic)
            for lab, page in test:
                if lab != topic:
                    continue
                total += 1
                hits["pri_plus"] += pri_plus(est, page, v).value > cfg.threshold
                hits["pri"] += pri(est, page, v).value > cfg.threshold
                hits["nb"] += nb.score(page, v).value > cfg.threshold
        rows.append(ComparisonRow(topic, hits["pri_plus"] / total, hits["pri"] / total,
                                  hits["nb"] / total, total))
    return rows


def comparison_text(rows: Sequence[ComparisonRow]) -> str:
    lines = ["per-topic detection rate on topic-labelled test pages (percent)",
             f"{'topic':<12} {'PRI+':>6} {'PRI':>6} {'NB':>6} {'n':>5}"]
    for r in rows:
        lines.append(f"{r.topic:<12} {100 * r.pri_plus:6.1f} {100 * r.pri:6.1f} "
                     f"{100 * r.nb:6.1f} {r.n_test:5d}")
    return "\n".join(lines) + "\n"
