"""Run configuration: loading, validation and manifests."""

from __future__ import annotations

import dataclasses
import hashlib
import json
import platform
from pathlib import Path

from plausdeny.core import DataError
from plausdeny.estimators import EstimatorConfig
from plausdeny.observer import ObserverParams
from plausdeny.textpipe import DEFAULT_STOPLIST, DEFAULT_SUFFIXES, DATA_DIR, TextNormalizer

MANIFEST = "manifest.json"

# config-file key -> RunConfig field
_ALIASES = {
    "lambda": "lam",
    "suffix_rules_path": "suffix_path",
}


@dataclasses.dataclass
class RunConfig:
    seed: int | None = None
    world_seed: int = 0
    data_dir: str = str(DATA_DIR)
    corpus: str | None = None
    estimator: str | None = None
    logs: str | None = None
    stoplist_path: str = str(DEFAULT_STOPLIST)
    suffix_path: str = str(DEFAULT_SUFFIXES)
    lam: float = 0.001
    threshold: float = 1.1
    alpha: float = 1.0
    beta: float = 0.1
    gamma: float = 1.5
    rho: float = 1.0
    mean_adverts: float = 2.5
    empty_page_cap: float = 0.08
    kappa: float = 3.0
    target_floor: float = 0.05
    sessions: int = 100
    folds: int = 7
    gap: int = 3
    compare_sessions: int = 30
    compare_folds: int = 5

    def estimator_config(self) -> EstimatorConfig:
        return EstimatorConfig(self.lam, self.threshold)

    def observer_params(self) -> ObserverParams:
        return ObserverParams(alpha=self.alpha, beta=self.beta, gamma=self.gamma, rho=self.rho,
                              mean_adverts=self.mean_adverts, empty_page_cap=self.empty_page_cap,
                              kappa=self.kappa, target_floor=self.target_floor)

    def normalizer(self) -> TextNormalizer:
        for p in (self.stoplist_path, self.suffix_path):
            if not Path(p).is_file():
                raise DataError(f"cannot read {p}")
        return TextNormalizer.from_files(self.stoplist_path, self.suffix_path)

    def validate(self) -> None:
        self.estimator_config()
        self.observer_params()
        if not Path(self.data_dir).is_dir():
            raise DataError(f"fixture directory {self.data_dir} not found")
        if self.sessions < 1 or self.folds < 2 or self.gap < 1:
            raise ValueError("sessions, folds and gap must be positive (folds at least 2)")

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def _coerce(name: str, value):
    field = {f.name: f for f in dataclasses.fields(RunConfig)}[name]
    if value is None:
        return None
    kind = field.type if isinstance(field.type, str) else field.type.__name__
    if kind.startswith("int"):
        return int(value)
    if kind.startswith("float"):
        return float(value)
    return str(value)


def _parse_key_values(text: str, path) -> dict:
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise DataError(f"{path}:{lineno}: expected key=value")
        out[key.strip()] = value.strip()
    return out


def load_config(path: str | Path | None = None, **overrides) -> tuple[RunConfig, dict]:
    """Read a JSON or key=value config file, or a manifest written by a previous run.

    Returns the config and any extra manifest fields (command, mode) so a run
    can be replayed exactly.
    """
    raw: dict = {}
    extra: dict = {}
    if path is not None:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise DataError(f"cannot read config {path}: {exc}") from exc
        if text.lstrip().startswith("{"):
            try:
                raw = json.loads(text)
            except json.JSONDecodeError as exc:
                raise DataError(f"{path}: invalid JSON ({exc.msg})") from exc
            if "config" in raw and isinstance(raw["config"], dict):
                extra = {k: v for k, v in raw.items() if k != "config"}
                raw = raw["config"]
        else:
            raw = _parse_key_values(text, path)
    names = {f.name for f in dataclasses.fields(RunConfig)}
    kwargs = {}
    for key, value in {**raw, **{k: v for k, v in overrides.items() if v is not None}}.items():
        name = _ALIASES.get(key, key)
        if name not in names:
            raise ValueError(f"unknown config key {key!r}")
        kwargs[name] = _coerce(name, value)
    cfg = RunConfig(**kwargs)
    cfg.validate()
    return cfg, extra


def file_sha256(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def versions() -> dict:
    import numpy

    from plausdeny import __version__

    return {"plausdeny": __version__, "python": platform.python_version(), "numpy": numpy.__version__}


def write_manifest(out: Path, command: str, cfg: RunConfig, outputs, mode: str | None = None) -> Path:
    manifest = {
        "command": command,
        "mode": mode,
        "seed": cfg.seed,
        "config": cfg.to_dict(),
        "versions": versions(),
        "outputs": {Path(p).name: file_sha256(p) for p in outputs},
    }
    path = out / MANIFEST
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path
