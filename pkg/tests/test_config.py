from __future__ import annotations

import json
from pathlib import Path
from typing import Any

import pytest

from branchlab.errors import ConfigError
from branchlab.util.config import ENV_OUT, ExperimentConfig, config_hash, load_config, resolve_out_root

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def _base(**over: Any) -> dict[str, Any]:
    d: dict[str, Any] = {
        "name": "t",
        "families": {"setcover": {"rows": 10, "cols": 12}},
        "instances": {"train": 2, "test": 1},
        "limits": {"score_T": 1.0},
    }
    d.update(over)
    return d


def test_shipped_configs_load() -> None:
    desk = load_config(CONFIGS / "desk.yaml")
    assert desk.name == "desk" and desk.limits.score_T == 10.0
    assert set(desk.families) == {"setcover", "cauction"}
    full = load_config(CONFIGS / "full.toml")
    assert full.workers == 4 and full.instances.test == 20
    assert full.training.hidden == 32


def test_json_config_and_defaults(tmp_path: Path) -> None:
    p = tmp_path / "small.json"
    p.write_text(json.dumps(_base(name=None)), encoding="utf-8")
    cfg = load_config(p)
    assert cfg.name == "small"
    assert cfg.seeds == [0, 1, 2, 3, 4] and cfg.train_seed == 0
    assert cfg.training.gamma == 0.99 and cfg.evaluation.clock == "monotonic"


@pytest.mark.parametrize(
    "over,field",
    [
        ({"limits": {}}, "limits.score_T"),
        ({"instances": {"train": 2}}, "instances.test"),
        ({"families": {}}, "families"),
        ({"colour": 1}, "colour"),
        ({"training": {"hiden": 3}}, "training.hiden"),
        ({"training": {"hidden": "wide"}}, "training.hidden"),
        ({"seeds": [1, 1]}, "seeds"),
        ({"evaluation": {"clock": "wall"}}, "evaluation.clock"),
        ({"limits": {"score_T": -1.0}}, "limits.score_T"),
    ],
)
def test_bad_configs_name_the_field(over: dict[str, Any], field: str) -> None:
    with pytest.raises(ConfigError) as exc:
        ExperimentConfig.from_dict(_base(**over))
    assert exc.value.field == field
    assert field in str(exc.value)


def test_unreadable_and_unknown_formats(tmp_path: Path) -> None:
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.yaml")
    odd = tmp_path / "cfg.ini"
    odd.write_text("[x]\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_config(odd)
    broken = tmp_path / "broken.yaml"
    broken.write_text("families: [unclosed\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_config(broken)


def test_out_root_precedence(tmp_path: Path) -> None:
    cfg = ExperimentConfig.from_dict(_base(paths={"root": str(tmp_path / "cfg")}))
    env = {ENV_OUT: str(tmp_path / "env")}
    assert resolve_out_root(cfg, str(tmp_path / "cli"), env) == tmp_path / "cli"
    assert resolve_out_root(cfg, None, env) == tmp_path / "env"
    assert resolve_out_root(cfg, None, {}) == tmp_path / "cfg"
    plain = ExperimentConfig.from_dict(_base())
    assert resolve_out_root(plain, None, {}) == Path("runs") / "t"


def test_with_seed_replaces_the_training_seed() -> None:
    cfg = ExperimentConfig.from_dict(_base(seeds=[0, 1, 2]))
    moved = cfg.with_seed(2)
    assert moved.seeds == [2, 1] and moved.train_seed == 2
    assert config_hash(moved) != config_hash(cfg)
    assert config_hash(ExperimentConfig.from_dict(_base(seeds=[0, 1, 2]))) == config_hash(cfg)
