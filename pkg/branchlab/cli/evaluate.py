"""Evaluation: every (family, instance, strategy, seed) cell solved once, then tabulated."""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from branchlab.bnb.engine import SolveLimits, SolveStatus, bnb_solve
from branchlab.bnb.score import DualBoundTrace, dual_integral_score
from branchlab.branching.registry import LEARNED, make_brancher
from branchlab.cli.layout import CHECKPOINT_FOR, RunLayout
from branchlab.cli.manifest import Manifest, digests, write_manifest
from branchlab.cli.pipeline import StageResult, mcts_config
from branchlab.cli.workers import map_ordered
from branchlab.errors import EmptyTrace, MissingArtifact, SolveAborted
from branchlab.gnn.checkpoint import load_checkpoint
from branchlab.gnn.params import GcnnParams
from branchlab.io.instance_json import read_instance
from branchlab.training.mcts import MctsConfig
from branchlab.util.clock import make_clock
from branchlab.util.config import ExperimentConfig, config_hash
from branchlab.util.rng import derive_seed

log = logging.getLogger(__name__)

CSV_COLUMNS = ["family", "instance", "strategy", "seed", "nodes", "time_s", "score", "status"]
FAILED = "Failed"


@dataclass
class RunRow:
    family: str
    instance: str
    strategy: str
    seed: int
    nodes: int
    time_s: float
    status: str
    objective: float | None = None
    trace: DualBoundTrace | None = None
    score: float | None = None

    @property
    def key(self) -> tuple[str, str, str, int]:
        return (self.family, self.instance, self.strategy, self.seed)


def run_cell(
    family: str,
    path: Path,
    strategy: str,
    seed: int,
    limits: SolveLimits,
    clock_kind: str,
    params: GcnnParams | None,
    mcts: MctsConfig | None,
) -> RunRow:
    inst = read_instance(path)
    brancher = make_brancher(strategy, seed=derive_seed(seed, inst.name), params=params, mcts=mcts)
    try:
        stats = bnb_solve(inst, brancher, limits, make_clock(clock_kind))
    except SolveAborted as e:
        log.warning("%s/%s seed %d failed: %s", inst.name, strategy, seed, e)
        return RunRow(family, inst.name, strategy, seed, nodes=0, time_s=0.0, status=FAILED)
    return RunRow(
        family,
        inst.name,
        strategy,
        seed,
        nodes=stats.nodes_visited,
        time_s=stats.wall_time_s,
        status=stats.status.value,
        objective=stats.objective if stats.incumbent is not None else None,
        trace=stats.trace,
    )


def reference_optima(rows: Sequence[RunRow]) -> dict[str, float]:
    """Best objective per instance among Optimal runs, else the best incumbent any run found."""
    best: dict[str, float] = {}
    fallback: dict[str, float] = {}
    for r in rows:
        if r.objective is None:
            continue
        pool = best if r.status == SolveStatus.OPTIMAL.value else fallback
        pool[r.instance] = min(pool.get(r.instance, math.inf), r.objective)
    merged = {**fallback, **best}
    return dict(sorted(merged.items()))


def attach_scores(rows: Sequence[RunRow], reference: dict[str, float], T: float) -> None:
    for r in rows:
        if r.trace is None or r.instance not in reference:
            continue
        try:
            r.score = dual_integral_score(r.trace, T, reference[r.instance])
        except EmptyTrace:
            r.score = None


def _num(x: float | None) -> str:
    return "" if x is None else repr(float(x))


def format_csv(rows: Sequence[RunRow], clock_label: str) -> str:
    buf = io.StringIO()
    buf.write(f"# clock={clock_label}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in sorted(rows, key=lambda r: r.key):
        w.writerow([r.family, r.instance, r.strategy, r.seed, r.nodes, _num(r.time_s), _num(r.score), r.status])
    return buf.getvalue()


def read_csv_rows(path: str | Path) -> list[dict[str, str]]:
    lines = [ln for ln in Path(path).read_text(encoding="utf-8").splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(lines))


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def _cell(values: list[float]) -> str:
    if not values:
        return "-"
    return f"{_fmt(float(np.mean(values)))} ± {_fmt(float(np.std(values)))}"


def _ok(r: RunRow) -> bool:
    return r.status != FAILED


def format_summary(rows: Sequence[RunRow], strategies: Sequence[str], families: Sequence[str]) -> str:
    """Mean ± std over instances and seeds; strategies as rows, families as columns."""

    lines: list[str] = []
    for title, metric in (
        ("Nodes", lambda r: float(r.nodes)),
        ("Time (s)", lambda r: float(r.time_s)),
        ("Dual-integral score", lambda r: r.score),
    ):
        lines.append(f"## {title}")
        lines.append("")
        lines.append("| strategy | " + " | ".join(families) + " | failed |")
        lines.append("|---|" + "---|" * len(families) + "---|")
        for s in strategies:
            cells = []
            for fam in families:
                vals = [metric(r) for r in rows if r.strategy == s and r.family == fam and _ok(r)]
                cells.append(_cell([v for v in vals if v is not None]))
            failed = sum(1 for r in rows if r.strategy == s and not _ok(r))
            lines.append(f"| {s} | " + " | ".join(cells) + f" | {failed} |")
        lines.append("")
    return "\n".join(lines)


def format_ablation(rows: Sequence[RunRow], families: Sequence[str]) -> tuple[str, dict[str, float]]:
    """Mean score of ``policy+mcts`` minus ``policy`` per family; report only."""

    lines = ["| family | policy | policy+mcts | difference |", "|---|---|---|---|"]
    diffs: dict[str, float] = {}
    for fam in families:
        means: dict[str, float | None] = {}
        for s in ("policy", "policy+mcts"):
            vals = [r.score for r in rows if r.family == fam and r.strategy == s and r.score is not None]
            means[s] = float(np.mean(vals)) if vals else None
        base, refined = means["policy"], means["policy+mcts"]
        if base is None or refined is None:
            lines.append(f"| {fam} | - | - | - |")
            continue
        diffs[fam] = refined - base
        lines.append(f"| {fam} | {_fmt(base)} | {_fmt(refined)} | {_fmt(diffs[fam])} |")
    return "\n".join(lines) + "\n", diffs


def _write_text(path: Path, text: str) -> str:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)
    return str(path)


def _load_params(layout: RunLayout, strategies: Sequence[str]) -> dict[str, GcnnParams]:
    out: dict[str, GcnnParams] = {}
    for s in strategies:
        if s in LEARNED:
            path = layout.checkpoint(CHECKPOINT_FOR[s])
            if not path.exists():
                raise MissingArtifact(str(path), f"checkpoint for {s}")
            out[s], _ = load_checkpoint(path)
    return out


def cmd_evaluate(cfg: ExperimentConfig, root: Path) -> StageResult:
    layout = RunLayout(root, cfg)
    tests = layout.instance_paths("test")
    params = _load_params(layout, cfg.strategies)
    limits = SolveLimits(
        node_limit=cfg.limits.node_limit,
        time_limit_s=cfg.limits.time_limit_s,
        iter_limit=cfg.limits.iter_limit,
    )
    online = mcts_config(cfg, cfg.evaluation.online_mcts_sims) if cfg.evaluation.online_mcts else None
    clock_label = make_clock(cfg.evaluation.clock).label

    calls = [
        (fam, path, s, seed, limits, cfg.evaluation.clock, params.get(s), online if s == "policy+mcts" else None)
        for fam in sorted(tests)
        for path in tests[fam]
        for s in cfg.strategies
        for seed in cfg.seeds
    ]
    log.info("evaluate: %d runs on %d worker(s)", len(calls), cfg.workers)
    rows = sorted(map_ordered(run_cell, calls, cfg.workers), key=lambda r: r.key)

    reference = reference_optima(rows)
    attach_scores(rows, reference, float(cfg.limits.score_T or 0.0))
    families = sorted(tests)
    ablation, diffs = format_ablation(rows, families)
    for fam, d in diffs.items():
        log.info("ablation %s: policy+mcts %s policy by %.6g", fam, "beats" if d > 0 else "trails", abs(d))

    outputs = [
        Path(_write_text(layout.runs_csv, format_csv(rows, clock_label))),
        Path(_write_text(layout.summary_md, f"# {cfg.name}\n\n" + format_summary(rows, cfg.strategies, families))),
        Path(_write_text(layout.ablation_md, ablation)),
        Path(_write_text(layout.reference_json, json.dumps(reference, indent=2, sort_keys=True) + "\n")),
    ]
    inputs = [p for fam in families for p in tests[fam]]
    inputs += [layout.checkpoint(CHECKPOINT_FOR[s]) for s in cfg.strategies if s in LEARNED]
    manifest = Manifest(
        stage="evaluate",
        config_hash=config_hash(cfg),
        seeds=list(cfg.seeds),
        inputs=digests(inputs, root),
        outputs=digests(outputs, root),
        extra={"runs": len(rows), "failed": sum(1 for r in rows if not _ok(r)), "clock": clock_label},
    )
    write_manifest(layout.results_dir, manifest)
    metrics: dict[str, Any] = dict(manifest.extra)
    return StageResult("evaluate", outputs, metrics=metrics)
