"""Command-line entry point: train, experiment, compare, report.

Exit codes: 0 success, 2 usage error, 3 data error.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

from plausdeny.config import RunConfig, load_config, write_manifest
from plausdeny.core import CATCH_ALL, DataError, TrainingCorpus, read_logs, write_logs
from plausdeny.estimators import TrainedEstimator, train
from plausdeny.harness import (
    ClickKind,
    ClickPolicy,
    NoiseModel,
    aggregate,
    compare_estimators,
    comparison_text,
    labelled_pages,
    run_grid,
    session_detection_rates,
    unsmoothed_session_scores,
)
from plausdeny.world import build_world

EXIT_USAGE = 2
EXIT_DATA = 3


class UsageError(Exception):
    pass


@dataclasses.dataclass(frozen=True)
class Mode:
    noise: NoiseModel = NoiseModel.NONE
    clicks: ClickKind = ClickKind.NO_CLICK
    proxy: str | None = None

    @property
    def name(self) -> str:
        parts = []
        if self.noise is not NoiseModel.NONE:
            parts.append(f"noise:{self.noise.name}")
        if self.clicks is not ClickKind.NO_CLICK:
            parts.append(f"clicks:{self.clicks.value}")
        if self.proxy:
            parts.append("proxy" if self.proxy == "rotate" else f"proxy:{self.proxy}")
        return "+".join(parts) or "baseline"


def parse_mode(text: str, proxy_topics=()) -> Mode:
    """``baseline``, ``noise:L|M|H``, ``clicks:<policy>``, ``proxy[:<topic>]``, joined by '+'."""
    noise, clicks, proxy = NoiseModel.NONE, ClickKind.NO_CLICK, None
    for part in filter(None, (p.strip() for p in text.split("+"))):
        key, _, arg = part.partition(":")
        key = key.casefold()
        try:
            if key == "baseline" and not arg:
                continue
            if key == "noise" and arg:
                noise = NoiseModel.parse(arg)
            elif key == "clicks" and arg:
                clicks = ClickKind.parse(arg)
            elif key == "proxy":
                proxy = arg.casefold() if arg else "rotate"
                if proxy != "rotate" and proxy_topics and proxy not in proxy_topics:
                    raise ValueError(f"unknown proxy topic {arg!r}")
            else:
                raise ValueError(f"unknown mode component {part!r}")
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    return Mode(noise, clicks, proxy)


def _out_dir(args) -> Path:
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write(path: Path, text: str) -> Path:
    path.write_text(text, encoding="utf-8")
    return path


def _corpus(cfg: RunConfig, world):
    if cfg.corpus:
        return TrainingCorpus.load(cfg.corpus, world.topics)
    return world.corpus


def cmd_train(cfg: RunConfig, args) -> int:
    out = _out_dir(args)
    normalizer = cfg.normalizer()
    world = build_world(cfg.world_seed, cfg.data_dir, normalizer=normalizer)
    corpus = _corpus(cfg, world)
    missing = [t for t in corpus.topics if not corpus.slice(t)]
    if missing:
        raise DataError(f"corpus has no adverts for topics: {missing}")
    est = train(corpus, cfg.estimator_config(), normalizer=normalizer)
    path = out / "estimator.json"
    digest = est.save(path)
    corpus_path = out / "corpus.jsonl"
    corpus.save(corpus_path)
    write_manifest(out, "train", cfg, [path, corpus_path])
    print(f"estimator {path} sha256 {digest}")
    return 0


def _load_estimator(cfg: RunConfig, out: Path, normalizer) -> tuple[TrainedEstimator, Path]:
    path = Path(cfg.estimator) if cfg.estimator else out / "estimator.json"
    if not path.is_file():
        raise DataError(f"no trained estimator at {path}; run 'train' first")
    return TrainedEstimator.load(path, normalizer), path


def cmd_experiment(cfg: RunConfig, args) -> int:
    if cfg.seed is None:
        raise UsageError("experiment needs a seed (--seed or 'seed' in the config)")
    out = _out_dir(args)
    normalizer = cfg.normalizer()
    world = build_world(cfg.world_seed, cfg.data_dir, normalizer=normalizer)
    mode = parse_mode(args.mode or "baseline", world.proxy_topics)
    est, est_path = _load_estimator(cfg, out, normalizer)
    cfg = dataclasses.replace(cfg, estimator=str(est_path.resolve()))
    if tuple(est.topics) != tuple(world.topics):
        raise DataError("estimator topics do not match the simulated world")
    observer = world.observer(cfg.observer_params())
    topics = list(world.topics.sensitive)
    if mode.proxy is None:
        topics.append(CATCH_ALL)
    logs = run_grid(world, observer, est, topics, cfg.sessions, cfg.seed, mode.noise,
                    ClickPolicy(mode.clicks), mode.proxy, cfg.gap)
    table = aggregate(logs, cfg.folds, cfg.seed, title=f"PDE, mode {mode.name}")
    true_rate, false_rate = session_detection_rates(logs, cfg.estimator_config())
    paths = [
        _write(out / "report.txt", table.to_text()),
        _write(out / "report.csv", table.to_csv()),
        _write(out / "detection.txt", _rates_text(true_rate, false_rate)),
    ]
    logs_path = out / "logs.jsonl"
    write_logs(logs, logs_path)
    paths.append(logs_path)
    write_manifest(out, "experiment", cfg, paths, mode.name)
    sys.stdout.write(table.to_text())
    return 0


def _rates_text(true_rate: float, false_rate: float, label: str = "PRI+") -> str:
    def pct(x):
        return "n/a" if x != x else f"{100 * x:.1f}%"
    return f"{label} session detection: true {pct(true_rate)}, false {pct(false_rate)}\n"


def cmd_compare(cfg: RunConfig, args) -> int:
    if cfg.seed is None:
        raise UsageError("compare needs a seed (--seed or 'seed' in the config)")
    out = _out_dir(args)
    normalizer = cfg.normalizer()
    world = build_world(cfg.world_seed, cfg.data_dir, normalizer=normalizer)
    corpus = _corpus(cfg, world)
    est = train(corpus, cfg.estimator_config(), normalizer=normalizer)
    observer = world.observer(cfg.observer_params())
    logs = run_grid(world, observer, est, list(world.topics), cfg.compare_sessions, cfg.seed,
                    gap=cfg.gap)
    rows = compare_estimators(labelled_pages(logs), world, cfg.estimator_config(), cfg.seed,
                              cfg.compare_folds)
    ec = cfg.estimator_config()
    text = (comparison_text(rows) + "\n"
            + _rates_text(*session_detection_rates(logs, ec), "PRI+")
            + _rates_text(*session_detection_rates(unsmoothed_session_scores(logs, est), ec), "PRI"))
    csv_lines = ["topic,pri_plus,pri,nb,n_test"] + [
        f"{r.topic},{r.pri_plus:.6f},{r.pri:.6f},{r.nb:.6f},{r.n_test}" for r in rows]
    paths = [_write(out / "compare.txt", text), _write(out / "compare.csv", "\n".join(csv_lines) + "\n")]
    write_manifest(out, "compare", cfg, paths)
    sys.stdout.write(text)
    return 0


def cmd_report(cfg: RunConfig, args) -> int:
    out = _out_dir(args)
    path = Path(cfg.logs) if cfg.logs else out / "logs.jsonl"
    logs = read_logs(path)
    cfg = dataclasses.replace(cfg, logs=str(path.resolve()))
    if not logs:
        raise DataError(f"no session logs in {path}")
    table = aggregate(logs, cfg.folds, cfg.seed or 0, title=f"PDE, logs {path.name}")
    paths = [_write(out / "report.txt", table.to_text()), _write(out / "report.csv", table.to_csv())]
    write_manifest(out, "report", cfg, paths)
    sys.stdout.write(table.to_text())
    return 0


COMMANDS = {"train": cmd_train, "experiment": cmd_experiment, "compare": cmd_compare,
            "report": cmd_report}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="plausdeny", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON or key=value config file, or a run manifest")
        p.add_argument("--seed", type=int, help="run seed (overrides the config)")
        p.add_argument("--out", help="output directory (default: current directory)")
        if name == "experiment":
            p.add_argument("--mode", help="baseline, noise:L|M|H, clicks:<policy>, proxy[:<topic>]; "
                                          "combine with '+'")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg, extra = load_config(args.config, seed=args.seed)
        if args.command == "experiment" and args.mode is None:
            args.mode = extra.get("mode")
        return COMMANDS[args.command](cfg, args)
    except UsageError as exc:
        print(f"plausdeny {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"plausdeny {args.command}: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (ValueError, KeyError) as exc:
        print(f"plausdeny {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
