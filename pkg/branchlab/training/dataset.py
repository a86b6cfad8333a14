from __future__ import annotations

import logging
import dataclasses
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Sequence

from branchlab.bnb.engine import SolveLimits, bnb_solve
from branchlab.bnb.node import BnbNode
from branchlab.bnb.reward import reward_excluded
from branchlab.branching.base import Brancher
from branchlab.branching.strong import StrongBrancher
from branchlab.errors import MissingArtifact, SchemaError, SolveAborted
from branchlab.gnn.state import BipartiteState, extract_state
from branchlab.model.types import BranchDecision, MilpInstance
from branchlab.training.values import StepRecord, Trajectory, normalized_targets
from branchlab.util.clock import FakeClock
from branchlab.util.state_log import read_jsonl, write_jsonl

log = logging.getLogger(__name__)

SB_SCHEMA = "branchlab.sb-samples"
TRAJ_SCHEMA = "branchlab.trajectories"
DATASET_VERSION = 1


@dataclass(eq=False)
class SbSample:
    state: BipartiteState
    sb_scores: dict[int, float]
    action: int
    reward: float
    children_refs: tuple[int | None, int | None] | None
    is_leaf: bool
    excluded: bool
    value_target: float | None = None
    instance: str = ""
    family: str = ""

    def to_dict(self) -> dict[str, Any]:
        return {
            "state": self.state.to_dict(),
            "sb_scores": {str(k): v for k, v in sorted(self.sb_scores.items())},
            "action": self.action,
            "reward": self.reward,
            "children_refs": None if self.children_refs is None else list(self.children_refs),
            "is_leaf": self.is_leaf,
            "excluded": self.excluded,
            "value_target": self.value_target,
            "instance": self.instance,
            "family": self.family,
        }

    @staticmethod
    def from_dict(d: dict[str, Any]) -> "SbSample":
        try:
            refs = d.get("children_refs")
            sample = SbSample(
                state=BipartiteState.from_dict(d["state"]),
                sb_scores={int(k): float(v) for k, v in d["sb_scores"].items()},
                action=int(d["action"]),
                reward=float(d["reward"]),
                children_refs=None if refs is None else (refs[0], refs[1]),
                is_leaf=bool(d.get("is_leaf", False)),
                excluded=bool(d.get("excluded", False)),
                value_target=None if d.get("value_target") is None else float(d["value_target"]),
                instance=str(d.get("instance", "")),
                family=str(d.get("family", "")),
            )
        except KeyError as e:
            raise SchemaError("missing field in sample", field=str(e.args[0])) from e
        if not sample.state.mask[sample.action] or not set(sample.sb_scores) <= set(sample.state.candidates):
            raise SchemaError("sample action or scores outside the candidate set", field="action")
        return sample


class TrajectoryRecorder:
    """Observer for ``bnb_solve`` that keeps one ``StepRecord`` per expansion."""

    def __init__(self, inst: MilpInstance) -> None:
        self.inst = inst
        self.records: list[StepRecord] = []
        self.scores: dict[int, dict[int, float]] = {}
        self.root_bound: float | None = None

    def __call__(self, parent: BnbNode, decision: BranchDecision, left: BnbNode, right: BnbNode, reward: float) -> None:
        if parent.depth == 0:
            self.root_bound = parent.dual_bound
        aux = decision.aux or {}
        self.records.append(
            StepRecord(
                node=parent.id,
                state=extract_state(parent, self.inst),
                action=decision.var,
                reward=float(reward),
                left=left.id,
                right=right.id,
                depth=parent.depth,
                excluded=reward_excluded(left, right),
                pi_old=aux.get(decision.var),
            )
        )
        self.scores[parent.id] = {int(k): float(v) for k, v in aux.items()}

    def trajectory(self) -> Trajectory:
        return Trajectory(
            instance=self.inst.name,
            family=self.inst.family,
            root_bound=float(self.root_bound or 0.0),
            records=list(self.records),
        )


def record_solve(inst: MilpInstance, brancher: Brancher, node_cap: int) -> TrajectoryRecorder:
    """Solve with a cap of ``node_cap`` expansions, recording every one of them."""
    recorder = TrajectoryRecorder(inst)
    bnb_solve(inst, brancher, SolveLimits(node_limit=2 * node_cap + 1), FakeClock(), observer=recorder)
    return recorder


def collect_sb_data(
    instances: Sequence[MilpInstance],
    per_instance_node_cap: int,
    seed: int = 0,
    *,
    gamma: float = 0.99,
) -> list[SbSample]:
    """Strong-branching expansions of every instance, with normalized value targets.

    Aborted solves are skipped with a warning. FSB is deterministic, so the realized action is the
    exact expectation the value recursion asks for.
    """

    samples: list[SbSample] = []
    for inst in instances:
        try:
            rec = record_solve(inst, StrongBrancher(seed), per_instance_node_cap)
        except SolveAborted as e:
            log.warning("skipping %s: %s", inst.name, e)
            continue
        traj = rec.trajectory()
        targets = normalized_targets(traj, gamma)
        base = len(samples)
        index = {r.node: base + k for k, r in enumerate(traj.records)}
        for r in traj.records:
            refs = (index.get(r.left), index.get(r.right))
            samples.append(
                SbSample(
                    state=r.state,
                    sb_scores=rec.scores.get(r.node, {}),
                    action=r.action,
                    reward=r.reward,
                    children_refs=refs,
                    is_leaf=refs == (None, None),
                    excluded=r.excluded,
                    value_target=targets[r.node],
                    instance=inst.name,
                    family=inst.family,
                )
            )
        log.info("%s: %d strong-branching samples", inst.name, len(traj.records))
    return samples


def concat_samples(chunks: Iterable[Sequence[SbSample]]) -> list[SbSample]:
    """Join per-instance datasets, shifting each chunk's child references past the previous ones."""

    out: list[SbSample] = []
    for chunk in chunks:
        base = len(out)
        for s in chunk:
            if s.children_refs is not None:
                left, right = s.children_refs
                s = dataclasses.replace(
                    s,
                    children_refs=(None if left is None else left + base, None if right is None else right + base),
                )
            out.append(s)
    return out


def write_dataset(path: str | Path, samples: Iterable[SbSample], meta: dict[str, Any] | None = None) -> str:
    header = {"schema": SB_SCHEMA, "version": DATASET_VERSION, **(meta or {})}
    return write_jsonl(path, header, (s.to_dict() for s in samples))


def read_dataset(path: str | Path) -> list[SbSample]:
    p = Path(path)
    if not p.exists():
        raise MissingArtifact(str(p), "dataset")
    header, records = read_jsonl(p, schema=SB_SCHEMA)
    if header.get("version") != DATASET_VERSION:
        raise SchemaError(f"{p}: unsupported dataset version {header.get('version')!r}", field="version", line=1)
    return [SbSample.from_dict(r) for r in records]


def write_trajectories(path: str | Path, trajectories: Iterable[Trajectory], meta: dict[str, Any] | None = None) -> str:
    header = {"schema": TRAJ_SCHEMA, "version": DATASET_VERSION, **(meta or {})}
    return write_jsonl(path, header, (t.to_dict() for t in trajectories))


def read_trajectories(path: str | Path) -> list[Trajectory]:
    p = Path(path)
    if not p.exists():
        raise MissingArtifact(str(p), "trajectories")
    _, records = read_jsonl(p, schema=TRAJ_SCHEMA)
    return [Trajectory.from_dict(r) for r in records]
