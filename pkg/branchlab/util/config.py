from __future__ import annotations

import hashlib
import json
import os
import sys
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any

import yaml

from branchlab.errors import ConfigError

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

ENV_OUT = "BRANCHLAB_OUT"

DEFAULT_SEEDS = [0, 1, 2, 3, 4]
DEFAULT_STRATEGIES = ["random", "fsb", "mostinf", "gcnn", "policy", "policy+mcts"]


@dataclass
class Limits:
    node_limit: int = 1000
    time_limit_s: float = 60.0
    score_T: float | None = None  # required
    iter_limit: int = 20_000


@dataclass
class InstanceCounts:
    train: int = 20
    test: int | None = None  # required


@dataclass
class TrainingConfig:
    hidden: int = 32
    collect_node_cap: int = 50
    heldout_frac: float = 0.2

    pretrain_epochs: int = 30
    pretrain_lr: float = 1e-3
    batch_size: int = 16

    ppo_rounds: int = 1
    ppo_epochs: int = 4
    ppo_lr: float = 1e-4
    ppo_eps: float = 0.1
    ppo_c1: float = 0.5
    ppo_c2: float = 0.01
    gamma: float = 0.99

    mcts_k: int = 10
    mcts_depth: int = 3
    mcts_sims: int = 1000
    c_explore: float = 2.0
    visit_threshold: int = 10
    mcts_roots: int = 20
    refine_rounds: int = 1
    refine_epochs: int = 20
    refine_lr: float = 1e-3


@dataclass
class EvaluationConfig:
    clock: str = "monotonic"
    online_mcts: bool = False
    online_mcts_sims: int = 50


@dataclass
class Paths:
    root: str | None = None
    instances: str = "instances"
    datasets: str = "datasets"
    checkpoints: str = "checkpoints"
    results: str = "results"


@dataclass
class ExperimentConfig:
    name: str
    families: dict[str, dict[str, Any]]
    limits: Limits
    instances: InstanceCounts
    strategies: list[str] = field(default_factory=lambda: list(DEFAULT_STRATEGIES))
    seeds: list[int] = field(default_factory=lambda: list(DEFAULT_SEEDS))
    workers: int = 1
    training: TrainingConfig = field(default_factory=TrainingConfig)
    evaluation: EvaluationConfig = field(default_factory=EvaluationConfig)
    paths: Paths = field(default_factory=Paths)

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    @staticmethod
    def from_dict(d: dict[str, Any], *, default_name: str = "experiment") -> "ExperimentConfig":
        if not isinstance(d, dict):
            raise ConfigError("<root>", "config must be a mapping")
        known = {f.name for f in fields(ExperimentConfig)}
        for k in d:
            if k not in known:
                raise ConfigError(str(k), "unknown field")

        families = d.get("families")
        if not isinstance(families, dict) or not families:
            raise ConfigError("families", "expected a non-empty mapping of family -> params")
        for fam, params in families.items():
            if params is not None and not isinstance(params, dict):
                raise ConfigError(f"families.{fam}", "expected a mapping of params")

        cfg = ExperimentConfig(
            name=str(d.get("name") or default_name),
            families={str(k): dict(v or {}) for k, v in families.items()},
            limits=_section(Limits, d.get("limits"), "limits"),
            instances=_section(InstanceCounts, d.get("instances"), "instances"),
            strategies=[str(s) for s in d.get("strategies", DEFAULT_STRATEGIES)],
            seeds=[_as_int(s, "seeds") for s in d.get("seeds", DEFAULT_SEEDS)],
            workers=_as_int(d.get("workers", 1), "workers"),
            training=_section(TrainingConfig, d.get("training"), "training"),
            evaluation=_section(EvaluationConfig, d.get("evaluation"), "evaluation"),
            paths=_section(Paths, d.get("paths"), "paths"),
        )
        cfg.check()
        return cfg

    def check(self) -> None:
        if self.limits.score_T is None:
            raise ConfigError("limits.score_T", "required (time budget of the dual-integral score)")
        if not self.limits.score_T > 0:
            raise ConfigError("limits.score_T", "must be > 0")
        if self.instances.test is None:
            raise ConfigError("instances.test", "required (test-set size per family)")
        if self.instances.test < 1 or self.instances.train < 0:
            raise ConfigError("instances", "test must be >= 1 and train >= 0")
        if not self.seeds:
            raise ConfigError("seeds", "at least one seed is required")
        if len(set(self.seeds)) != len(self.seeds):
            raise ConfigError("seeds", "seeds must be distinct")
        if self.workers < 1:
            raise ConfigError("workers", "must be >= 1")
        if self.limits.node_limit < 1 or self.limits.time_limit_s <= 0:
            raise ConfigError("limits", "node_limit and time_limit_s must be positive")
        if self.evaluation.clock not in ("monotonic", "fake"):
            raise ConfigError("evaluation.clock", "expected 'monotonic' or 'fake'")
        if not 0.0 <= self.training.heldout_frac < 1.0:
            raise ConfigError("training.heldout_frac", "expected a value in [0, 1)")

    def with_seed(self, seed: int) -> "ExperimentConfig":
        """``--seed`` replaces the first seed (the collection/training seed)."""
        seeds = [int(seed)] + [s for s in self.seeds[1:] if s != int(seed)]
        d = self.to_dict()
        d["seeds"] = seeds
        return ExperimentConfig.from_dict(d, default_name=self.name)

    @property
    def train_seed(self) -> int:
        return int(self.seeds[0])


def _as_int(v: Any, name: str) -> int:
    if isinstance(v, bool) or not isinstance(v, (int, float)) or int(v) != v:
        raise ConfigError(name, f"expected an integer, got {v!r}")
    return int(v)


def _section(cls: type, data: Any, prefix: str) -> Any:
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(prefix, "expected a mapping")
    defaults = cls()
    kwargs: dict[str, Any] = {}
    known = {f.name for f in fields(cls)}
    for k, v in data.items():
        if k not in known:
            raise ConfigError(f"{prefix}.{k}", "unknown field")
        proto = getattr(defaults, k)
        name = f"{prefix}.{k}"
        if v is None:
            kwargs[k] = None
        elif isinstance(proto, bool):
            if not isinstance(v, bool):
                raise ConfigError(name, f"expected a boolean, got {v!r}")
            kwargs[k] = v
        elif isinstance(proto, int) or k in ("test",):
            kwargs[k] = _as_int(v, name)
        elif isinstance(proto, float) or k == "score_T":
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ConfigError(name, f"expected a number, got {v!r}")
            kwargs[k] = float(v)
        else:
            kwargs[k] = str(v)
    return cls(**kwargs)


def load_config_data(path: str | Path) -> dict[str, Any]:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError("<file>", f"cannot read {p}: {e}") from e
    suffix = p.suffix.lower()
    try:
        if suffix in (".yaml", ".yml"):
            data = yaml.safe_load(text) or {}
        elif suffix == ".toml":
            data = tomllib.loads(text)
        elif suffix == ".json":
            data = json.loads(text)
        else:
            raise ConfigError("<file>", f"unsupported config format: {p.suffix or p.name}")
    except (yaml.YAMLError, tomllib.TOMLDecodeError, json.JSONDecodeError) as e:
        raise ConfigError("<file>", f"cannot parse {p}: {e}") from e
    return data


def load_config(path: str | Path) -> ExperimentConfig:
    p = Path(path)
    return ExperimentConfig.from_dict(load_config_data(p), default_name=p.stem)


def config_hash(cfg: ExperimentConfig) -> str:
    blob = json.dumps(cfg.to_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def resolve_out_root(cfg: ExperimentConfig, cli_out: str | None = None, env: dict[str, str] | None = None) -> Path:
    """``--out`` > ``$BRANCHLAB_OUT`` > ``paths.root`` > ``runs/<name>``."""
    env = os.environ if env is None else env
    if cli_out:
        return Path(cli_out).expanduser()
    if env.get(ENV_OUT):
        return Path(env[ENV_OUT]).expanduser()
    if cfg.paths.root:
        return Path(cfg.paths.root).expanduser()
    return Path("runs") / cfg.name
