from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from branchlab.errors import MissingArtifact
from branchlab.generators.base import Family, FamilySpec
from branchlab.util.config import ExperimentConfig

# learned strategy -> checkpoint stem
CHECKPOINT_FOR = {"gcnn": "gcnn", "policy": "ppo", "policy+mcts": "mcts"}


def family_short(name: str) -> str:
    return FamilySpec(Family.parse(name)).short_name()


@dataclass(frozen=True)
class RunLayout:
    """Where every stage reads and writes under one output root."""

    root: Path
    cfg: ExperimentConfig

    @property
    def instances_dir(self) -> Path:
        return self.root / self.cfg.paths.instances

    @property
    def datasets_dir(self) -> Path:
        return self.root / self.cfg.paths.datasets

    @property
    def checkpoints_dir(self) -> Path:
        return self.root / self.cfg.paths.checkpoints

    @property
    def results_dir(self) -> Path:
        return self.root / self.cfg.paths.results

    def split_dir(self, family: str, split: str) -> Path:
        return self.instances_dir / family_short(family) / split

    def instance_paths(self, split: str) -> dict[str, list[Path]]:
        """Instance files per family short name; a family with no directory is a missing artifact."""
        out: dict[str, list[Path]] = {}
        for fam in self.cfg.families:
            d = self.split_dir(fam, split)
            if not d.is_dir():
                raise MissingArtifact(str(d), f"{split} instances")
            out[family_short(fam)] = sorted(d.glob("*.json"))
        return out

    @property
    def sb_train(self) -> Path:
        return self.datasets_dir / "sb_train.jsonl"

    @property
    def sb_heldout(self) -> Path:
        return self.datasets_dir / "sb_heldout.jsonl"

    def rollouts(self, round_: int) -> Path:
        return self.datasets_dir / f"rollouts_round{round_}.jsonl"

    def checkpoint(self, stem: str) -> Path:
        return self.checkpoints_dir / f"{stem}.json"

    @property
    def runs_csv(self) -> Path:
        return self.results_dir / "runs.csv"

    @property
    def summary_md(self) -> Path:
        return self.results_dir / "summary.md"

    @property
    def ablation_md(self) -> Path:
        return self.results_dir / "ablation.md"

    @property
    def reference_json(self) -> Path:
        return self.results_dir / "reference.json"
