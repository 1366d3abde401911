import dataclasses

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from plausdeny.core import Item, SessionLog, StepRecord, Interaction
from plausdeny.harness import (
    ClickKind,
    ClickPolicy,
    NoiseModel,
    ReportTable,
    ScriptError,
    aggregate,
    apply_clicks,
    build_session,
    run_grid,
    run_session,
    session_detection_rates,
    term_frequency,
    validate_script,
)


def fake_log(topic, idx, pdes, pri=None):
    steps = []
    for k, v in enumerate(pdes):
        rec = StepRecord(k, "probe", Interaction("p", ()), k, 1.0, 1.0, v,
                         pri if pri is not None else {"other": 1.0, topic: 1.0})
        steps.append(rec)
    return SessionLog(f"{topic}/{idx:03d}", topic, "x", steps)


class TestBuildSession:
    @pytest.mark.parametrize("noise", list(NoiseModel))
    def test_noise_before_each_probe(self, world, noise):
        script = build_session(world, "gambling", noise, seed=1)
        kinds = [s.kind for s in script.steps]
        probes = [i for i, k in enumerate(kinds) if k == "probe"]
        assert len(probes) == 6 and probes[0] == 0
        for p in probes[1:]:
            n = noise.value
            assert kinds[p - n:p] == ["noise"] * n
            assert kinds[p - n - 1] != "noise"
        sens, nz = kinds.count("sensitive"), kinds.count("noise")
        assert nz == noise.value * sens

    def test_proxy_blocks(self, world):
        script = build_session(world, "divorce", proxy="tickets", seed=2)
        kinds = [s.kind for s in script.steps]
        assert kinds.count("probe") == 6
        assert {s.query for s in script.steps if s.kind == "proxy"} <= set(world.proxy_queries["tickets"])

    def test_catch_all_uses_popular_queries(self, world):
        script = build_session(world, "other", seed=3)
        popular = {q for _, q in world.popular_queries()}
        assert all(s.query in popular for s in script.steps if s.kind == "sensitive")

    def test_errors(self, world):
        with pytest.raises(KeyError):
            build_session(world, "nope")
        with pytest.raises(KeyError):
            build_session(world, "gambling", proxy="boats")

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 10_000), st.sampled_from(list(NoiseModel)),
           st.sampled_from([None, "car", "tickets", "vacation"]), st.integers(1, 4))
    def test_scripts_validate(self, world, seed, noise, proxy, gap):
        script = build_session(world, "payday", noise, proxy=proxy, seed=seed, gap=gap)
        validate_script(script)
        noise_q = [s.query for s in script.steps if s.kind == "noise"]
        assert len(noise_q) == 5 * noise.value * (1 if proxy else gap)

    def test_validator_catches_bad_scripts(self, world):
        script = build_session(world, "gay", NoiseModel.L, seed=4)
        steps = list(script.steps)
        broken = dataclasses.replace(script, steps=tuple(steps[1:]))
        with pytest.raises(ScriptError):
            validate_script(broken)
        no_noise = tuple(s for s in steps if s.kind != "noise")
        with pytest.raises(ScriptError):
            validate_script(dataclasses.replace(script, steps=no_noise))


class TestClicks:
    def test_term_frequency(self, world):
        kw = {"casino", "poker"}
        assert term_frequency("casino poker roulette jackpot casino slot wheel table chip dealer", kw) == 0.3
        assert term_frequency("weather rain", kw) == 0
        assert term_frequency("casino poker", kw) == 1.0
        assert term_frequency("", kw) == 0

    def test_policies(self):
        page = (Item("casino poker", False), Item("weather rain snow forecast storm wind sunny gale fog hail cloud", True),
                Item("casino weather rain snow forecast storm wind sunny gale fog hail", False))
        kw = {"casino"}
        rel = ClickPolicy(ClickKind.RELEVANT)
        assert apply_clicks(rel, page, kw) == (0,)
        assert apply_clicks(ClickPolicy(ClickKind.NON_RELEVANT), page, kw) == (1, 2)
        assert apply_clicks(ClickPolicy(ClickKind.ALL), page, kw) == (0, 1, 2)
        assert apply_clicks(ClickPolicy(ClickKind.NO_CLICK), page, kw) == ()
        assert apply_clicks(ClickPolicy(ClickKind.ALL), page, kw, is_probe=True) == ()

    def test_threshold_boundary(self):
        # TF of exactly 0.1 is not relevant
        page = (Item("casino " + " ".join(f"w{i}x" for i in range(9)), False),)
        assert term_frequency(page[0].text, {"casino"}) == pytest.approx(0.1)
        assert apply_clicks(ClickPolicy(ClickKind.RELEVANT), page, {"casino"}) == ()
        assert apply_clicks(ClickPolicy(ClickKind.NON_RELEVANT), page, {"casino"}) == (0,)

    def test_two_random_with_replacement(self):
        page = tuple(Item(f"t{i}", False) for i in range(2))
        rng = np.random.default_rng(0)
        draws = [apply_clicks(ClickPolicy(ClickKind.TWO_RANDOM), page, set(), rng) for _ in range(50)]
        assert all(len(d) == 2 for d in draws)
        assert any(d[0] == d[1] for d in draws)
        with pytest.raises(ValueError):
            apply_clicks(ClickPolicy(ClickKind.TWO_RANDOM), page, set())

    def test_policy_threshold_positive(self):
        with pytest.raises(ValueError):
            ClickPolicy(threshold=0)


class TestRunSession:
    def test_probe_zero_and_replay(self, world, observer, estimator):
        script = build_session(world, "diabetes", NoiseModel.M, ClickPolicy(ClickKind.ALL), seed=5)
        a = run_session(script, observer, estimator, world, 5)
        b = run_session(script, observer, estimator, world, 5)
        assert a == b
        assert a.pde_by_probe()[0] == 0.0
        assert sorted(a.pde_by_probe()) == list(range(6))

    def test_probe_pages_never_clicked(self, world, observer, estimator):
        script = build_session(world, "location", clicks=ClickPolicy(ClickKind.ALL), seed=6)
        log = run_session(script, observer, estimator, world, 6)
        assert all(not s.interaction.clicks for s in log.probes())
        assert any(s.interaction.clicks for s in log.steps if not s.is_probe)

    def test_topic_belief_grows(self, world, observer, estimator):
        script = build_session(world, "anorexia", seed=7)
        state = observer.reset()
        beliefs = []
        for step in script.steps:
            state = observer.observe_query(state, step.query)
            if step.kind == "probe":
                beliefs.append(state.belief[observer.index("anorexia")])
        assert all(b2 >= b1 for b1, b2 in zip(beliefs, beliefs[1:]))


class TestAggregate:
    def test_all_zero(self):
        logs = [fake_log("gay", i, [0.0] * 6) for i in range(7)]
        t = aggregate(logs)
        assert t.rows[0].cells == ((0, 0),) * 5
        assert "0 ( 0)" in t.to_text()

    def test_constant(self):
        logs = [fake_log("gay", i, [0.0] + [0.47] * 5) for i in range(14)]
        t = aggregate(logs)
        assert ReportTable.cell(*t.rows[0].cells[0]) == "47 (47)"
        assert ReportTable.cell(123, 8) == "123 ( 8)"

    def test_needs_enough_logs(self):
        with pytest.raises(ValueError):
            aggregate([fake_log("gay", i, [0.0] * 6) for i in range(6)])
        with pytest.raises(ValueError):
            aggregate([])

    def test_permutation_invariant(self):
        rng = np.random.default_rng(0)
        logs = [fake_log(t, i, [0.0] + list(rng.uniform(0, 2, 5))) for t in ("a", "b") for i in range(15)]
        ref = aggregate(logs, seed=3)
        for _ in range(5):
            perm = [logs[i] for i in rng.permutation(len(logs))]
            assert aggregate(perm, seed=3) == ref

    def test_csv_and_text_layout(self):
        logs = [fake_log("gay", i, [0.0] + [0.1 * k for k in range(1, 6)]) for i in range(7)]
        t = aggregate(logs, title="demo")
        assert t.to_csv().splitlines()[0].startswith("topic,probe1_max,probe1_median")
        header = t.to_text().splitlines()[2]
        assert header.split()[1:] == ["probe", "1", "probe", "2", "probe", "3", "probe", "4", "probe", "5"]


class TestDetectionRates:
    def test_rates(self):
        hit = {"other": 1.0, "gay": 1.5}
        miss = {"other": 1.0, "gay": 1.0}
        logs = [fake_log("gay", 0, [0] * 6, hit), fake_log("gay", 1, [0] * 6, miss),
                fake_log("other", 2, [0] * 6, miss), fake_log("other", 3, [0] * 6, hit)]
        assert session_detection_rates(logs) == (0.5, 0.5)

    def test_no_logs(self):
        with pytest.raises(ValueError):
            session_detection_rates([])

    def test_infinite_threshold(self, world, observer, estimator):
        from plausdeny.estimators import EstimatorConfig

        logs = run_grid(world, observer, estimator, ["gambling"], 5, 1)
        assert session_detection_rates(logs, EstimatorConfig(threshold=1e300))[0] == 0.0


class TestCompare:
    def test_every_topic_page_tested_once(self, world, observer, estimator):
        from plausdeny.harness import compare_estimators, labelled_pages

        logs = run_grid(world, observer, estimator, list(world.topics), 3, 2)
        pages = labelled_pages(logs)
        rows = compare_estimators(pages, world, folds=5)
        others = sum(1 for lab, p in pages if lab == "other" and len(p))
        for r in rows:
            mine = sum(1 for lab, p in pages if lab == r.topic and len(p))
            assert r.n_test == min(mine, others)
            assert 0 <= r.nb <= 1 and 0 <= r.pri_plus <= 1
        with pytest.raises(ValueError):
            compare_estimators(pages, world, folds=1)
