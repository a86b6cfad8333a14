"""Training stages: generate, collect, pretrain, train-ppo, refine-mcts.

Each stage reads the previous stage's artifacts under the run's output root, writes its own, and
records a manifest. Rerunning a stage whose manifest still matches is a no-op.
"""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Callable

from branchlab.cli.layout import CHECKPOINT_FOR, RunLayout, family_short
from branchlab.cli.manifest import Manifest, digests, is_up_to_date, read_manifest, write_manifest
from branchlab.cli.workers import map_ordered
from branchlab.errors import MissingArtifact
from branchlab.generators.registry import generate, make_spec
from branchlab.gnn.checkpoint import load_checkpoint, save_checkpoint
from branchlab.gnn.params import init_params
from branchlab.io.instance_json import read_instance, write_instance
from branchlab.model.types import MilpInstance
from branchlab.training.dataset import (
    SbSample,
    collect_sb_data,
    concat_samples,
    read_dataset,
    write_dataset,
    write_trajectories,
)
from branchlab.training.imitation import imitation_pretrain, top1_agreement, uniform_agreement
from branchlab.training.mcts import MctsConfig
from branchlab.training.ppo import collect_rollouts, ppo_update
from branchlab.training.refine import collect_mcts_stats, mcts_refine
from branchlab.util.config import ExperimentConfig, config_hash
from branchlab.util.rng import derive_seed, make_rng

log = logging.getLogger(__name__)

SEED_MODULUS = 10**9


@dataclass
class StageResult:
    stage: str
    outputs: list[Path]
    skipped: bool = False
    metrics: dict[str, Any] = field(default_factory=dict)


def instance_seed(seed: int, family: str, split: str, index: int) -> int:
    return derive_seed(seed, family_short(family), split, index) % SEED_MODULUS


def mcts_config(cfg: ExperimentConfig, n_sims: int | None = None) -> MctsConfig:
    t = cfg.training
    return MctsConfig(
        k=t.mcts_k,
        max_depth=t.mcts_depth,
        n_sims=t.mcts_sims if n_sims is None else n_sims,
        c_explore=t.c_explore,
        gamma=t.gamma,
    )


def run_stage(
    layout: RunLayout,
    stage: str,
    stage_dir: Path,
    inputs: list[Path],
    produce: Callable[[], tuple[list[Path], dict[str, Any]]],
) -> StageResult:
    for p in inputs:
        if not p.exists():
            raise MissingArtifact(str(p), f"input of {stage}")
    expected = Manifest(
        stage=stage,
        config_hash=config_hash(layout.cfg),
        seeds=list(layout.cfg.seeds),
        inputs=digests(inputs, layout.root),
    )
    current = read_manifest(stage_dir, stage)
    if current is not None and is_up_to_date(current, expected, layout.root):
        log.info("%s: up to date, skipping", stage)
        return StageResult(stage, [layout.root / k for k in current.outputs], skipped=True, metrics=current.extra)

    outputs, metrics = produce()
    expected.outputs = digests(outputs, layout.root)
    expected.extra = metrics
    write_manifest(stage_dir, expected)
    log.info("%s: wrote %d artifact(s)", stage, len(outputs))
    return StageResult(stage, sorted(outputs), metrics=metrics)


def split_heldout(paths: dict[str, list[Path]], frac: float) -> tuple[list[Path], list[Path]]:
    """Last ``frac`` of every family's training instances are held out."""
    train: list[Path] = []
    held: list[Path] = []
    for fam in sorted(paths):
        files = paths[fam]
        n_held = int(len(files) * frac)
        cut = len(files) - n_held
        train.extend(files[:cut])
        held.extend(files[cut:])
    return train, held


def _load(paths: list[Path]) -> list[MilpInstance]:
    return [read_instance(p) for p in paths]


def _collect_instance(path: Path, node_cap: int, seed: int, gamma: float) -> list[SbSample]:
    return collect_sb_data([read_instance(path)], node_cap, seed, gamma=gamma)


# stages


def cmd_generate(cfg: ExperimentConfig, root: Path) -> StageResult:
    layout = RunLayout(root, cfg)

    def produce() -> tuple[list[Path], dict[str, Any]]:
        outputs: list[Path] = []
        for fam, fam_params in cfg.families.items():
            params = dict(fam_params)
            preset = str(params.pop("preset", "desk"))
            for split, count in (("train", cfg.instances.train), ("test", int(cfg.instances.test or 0))):
                d = layout.split_dir(fam, split)
                d.mkdir(parents=True, exist_ok=True)
                for old in d.glob("*.json"):
                    old.unlink()
                for i in range(count):
                    inst = generate(make_spec(fam, params, instance_seed(cfg.train_seed, fam, split, i), preset))
                    outputs.append(Path(write_instance(inst, d / f"{inst.name}.json")))
            log.info("%s: %d train / %d test instances", family_short(fam), cfg.instances.train, cfg.instances.test)
        return outputs, {"instances": len(outputs)}

    return run_stage(layout, "generate", layout.instances_dir, [], produce)


def cmd_collect(cfg: ExperimentConfig, root: Path) -> StageResult:
    layout = RunLayout(root, cfg)
    by_family = layout.instance_paths("train")
    train, held = split_heldout(by_family, cfg.training.heldout_frac)
    t = cfg.training

    def produce() -> tuple[list[Path], dict[str, Any]]:
        outputs: list[Path] = []
        metrics: dict[str, Any] = {}
        for name, paths, target in (("train", train, layout.sb_train), ("heldout", held, layout.sb_heldout)):
            calls = [(p, t.collect_node_cap, cfg.train_seed, t.gamma) for p in paths]
            samples = concat_samples(map_ordered(_collect_instance, calls, cfg.workers))
            meta = {"instances": len(paths), "node_cap": t.collect_node_cap, "seed": cfg.train_seed}
            outputs.append(Path(write_dataset(target, samples, meta)))
            metrics[f"{name}_samples"] = len(samples)
        log.info("collect: %d train / %d held-out samples", metrics["train_samples"], metrics["heldout_samples"])
        return outputs, metrics

    return run_stage(layout, "collect", layout.datasets_dir, [*train, *held], produce)


def cmd_pretrain(cfg: ExperimentConfig, root: Path) -> StageResult:
    layout = RunLayout(root, cfg)
    t = cfg.training
    if not layout.sb_train.exists():
        raise MissingArtifact(str(layout.sb_train), "dataset")
    inputs = [layout.sb_train] + ([layout.sb_heldout] if layout.sb_heldout.exists() else [])

    def produce() -> tuple[list[Path], dict[str, Any]]:
        samples = read_dataset(layout.sb_train)
        params = init_params(make_rng(cfg.train_seed, "init"), t.hidden)
        params, curve = imitation_pretrain(
            samples, params, t.pretrain_epochs, t.pretrain_lr, t.batch_size, cfg.train_seed
        )
        metrics: dict[str, Any] = {"final_loss": curve[-1] if curve else None}
        held = read_dataset(layout.sb_heldout) if layout.sb_heldout.exists() else []
        if held:
            metrics["heldout_top1"] = top1_agreement(held, params)
            metrics["heldout_uniform"] = uniform_agreement(held)
            log.info(
                "pretrain: held-out top-1 %.3f vs uniform %.3f", metrics["heldout_top1"], metrics["heldout_uniform"]
            )
        out = save_checkpoint(
            layout.checkpoint(CHECKPOINT_FOR["gcnn"]),
            params,
            {"stage": "pretrain", "seed": cfg.train_seed, "training": asdict(t), "loss_curve": curve, **metrics},
        )
        return [Path(out)], metrics

    return run_stage(layout, "pretrain", layout.checkpoints_dir, inputs, produce)


def cmd_train_ppo(cfg: ExperimentConfig, root: Path) -> StageResult:
    layout = RunLayout(root, cfg)
    t = cfg.training
    start = layout.checkpoint(CHECKPOINT_FOR["gcnn"])
    if not start.exists():
        raise MissingArtifact(str(start), "checkpoint")
    train, _ = split_heldout(layout.instance_paths("train"), t.heldout_frac)

    def produce() -> tuple[list[Path], dict[str, Any]]:
        params, _ = load_checkpoint(start)
        instances = _load(train)
        outputs: list[Path] = []
        curves: list[list[float]] = []
        for rnd in range(t.ppo_rounds):
            seed = derive_seed(cfg.train_seed, "ppo", rnd)
            trajectories = collect_rollouts(instances, params, seed, t.collect_node_cap)
            outputs.append(Path(write_trajectories(layout.rollouts(rnd), trajectories, {"round": rnd, "seed": seed})))
            params, curve = ppo_update(
                trajectories,
                params,
                eps=t.ppo_eps,
                c1=t.ppo_c1,
                c2=t.ppo_c2,
                gamma=t.gamma,
                epochs=t.ppo_epochs,
                lr=t.ppo_lr,
                batch_size=t.batch_size,
                seed=seed,
            )
            curves.append(curve)
        out = save_checkpoint(
            layout.checkpoint(CHECKPOINT_FOR["policy"]),
            params,
            {"stage": "train-ppo", "seed": cfg.train_seed, "training": asdict(t), "loss_curves": curves},
        )
        outputs.append(Path(out))
        return outputs, {"rounds": t.ppo_rounds}

    return run_stage(layout, "train-ppo", layout.checkpoints_dir, [start, *train], produce)


def cmd_refine_mcts(cfg: ExperimentConfig, root: Path) -> StageResult:
    layout = RunLayout(root, cfg)
    t = cfg.training
    start = layout.checkpoint(CHECKPOINT_FOR["policy"])
    if not start.exists():
        raise MissingArtifact(str(start), "checkpoint")
    train, _ = split_heldout(layout.instance_paths("train"), t.heldout_frac)
    mcfg = mcts_config(cfg)

    def produce() -> tuple[list[Path], dict[str, Any]]:
        params, _ = load_checkpoint(start)
        instances = _load(train)
        curves: list[list[float]] = []
        for rnd in range(t.refine_rounds):
            seed = derive_seed(cfg.train_seed, "refine", rnd)
            stats = collect_mcts_stats(instances, params, mcfg, seed, t.mcts_roots)
            params, curve = mcts_refine(
                params, stats, t.visit_threshold, t.refine_epochs, t.refine_lr, t.batch_size, seed
            )
            curves.append(curve)
        out = save_checkpoint(
            layout.checkpoint(CHECKPOINT_FOR["policy+mcts"]),
            params,
            {
                "stage": "refine-mcts",
                "seed": cfg.train_seed,
                "training": asdict(t),
                "mcts": mcfg.to_dict(),
                "loss_curves": curves,
            },
        )
        return [Path(out)], {"rounds": t.refine_rounds}

    return run_stage(layout, "refine-mcts", layout.checkpoints_dir, [start, *train], produce)
