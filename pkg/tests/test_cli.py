import json

import pytest

from plausdeny.cli import EXIT_DATA, EXIT_USAGE, Mode, main, parse_mode
from plausdeny.harness import ClickKind, NoiseModel


@pytest.fixture(scope="module")
def trained(tmp_path_factory):
    out = tmp_path_factory.mktemp("train")
    assert main(["train", "--out", str(out)]) == 0
    return out


def small_config(tmp_path, **extra):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"sessions": 7, "folds": 7, **extra}))
    return path


def test_parse_mode():
    assert parse_mode("baseline") == Mode()
    m = parse_mode("noise:H+clicks:ClickAll+proxy:car")
    assert (m.noise, m.clicks, m.proxy) == (NoiseModel.H, ClickKind.ALL, "car")
    assert parse_mode("proxy").proxy == "rotate"
    assert parse_mode(m.name) == m


def test_train_is_idempotent(trained, tmp_path):
    assert main(["train", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "estimator.json").read_bytes() == (trained / "estimator.json").read_bytes()
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["command"] == "train" and "estimator.json" in manifest["outputs"]


def test_experiment_replays_from_manifest(trained, tmp_path):
    cfg = small_config(tmp_path, estimator=str(trained / "estimator.json"))
    run1, run2 = tmp_path / "run1", tmp_path / "run2"
    assert main(["experiment", "--config", str(cfg), "--seed", "11", "--mode", "noise:L",
                 "--out", str(run1)]) == 0
    assert main(["experiment", "--config", str(run1 / "manifest.json"), "--out", str(run2)]) == 0
    for name in ("report.txt", "report.csv", "detection.txt", "logs.jsonl"):
        assert (run1 / name).read_bytes() == (run2 / name).read_bytes()
    assert json.loads((run2 / "manifest.json").read_text())["mode"] == "noise:L"


def test_report_from_logs(trained, tmp_path):
    cfg = small_config(tmp_path, estimator=str(trained / "estimator.json"))
    assert main(["experiment", "--config", str(cfg), "--seed", "2", "--out", str(tmp_path)]) == 0
    first = (tmp_path / "report.csv").read_bytes()
    assert main(["report", "--config", str(cfg), "--seed", "2", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "report.csv").read_bytes() == first


def test_compare(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"compare_sessions": 4, "compare_folds": 2}))
    assert main(["compare", "--config", str(path), "--seed", "1", "--out", str(tmp_path)]) == 0
    lines = (tmp_path / "compare.csv").read_text().splitlines()
    assert lines[0] == "topic,pri_plus,pri,nb,n_test" and len(lines) == 12


def test_usage_errors(trained, tmp_path, capsys):
    est = str(trained / "estimator.json")
    cfg = small_config(tmp_path, estimator=est)
    assert main(["experiment", "--config", str(cfg), "--seed", "1", "--mode", "turbo",
                 "--out", str(tmp_path)]) == EXIT_USAGE
    assert main(["experiment", "--config", str(cfg), "--out", str(tmp_path)]) == EXIT_USAGE
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"lambda": -1}))
    assert main(["train", "--config", str(bad), "--out", str(tmp_path)]) == EXIT_USAGE
    assert "plausdeny" in capsys.readouterr().err


def test_data_errors(tmp_path, capsys):
    assert main(["experiment", "--seed", "1", "--out", str(tmp_path / "empty")]) == EXIT_DATA
    corpus = tmp_path / "corpus.jsonl"
    corpus.write_text('{"text": "casino poker", "label": "gambling"}\n{"text": "loans"}\n')
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"corpus": str(corpus)}))
    assert main(["train", "--config", str(cfg), "--out", str(tmp_path)]) == EXIT_DATA
    assert ":2" in capsys.readouterr().err
