from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from branchlab.errors import CyclicTree, SchemaError
from branchlab.gnn.state import BipartiteState


@dataclass(eq=False)
class StepRecord:
    """One expansion: the state, the branching variable, its reward and the two children."""

    node: int
    state: BipartiteState
    action: int
    reward: float
    left: int
    right: int
    depth: int = 0
    excluded: bool = False
    pi_old: float | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "node": self.node,
            "state": self.state.to_dict(),
            "action": self.action,
            "reward": self.reward,
            "left": self.left,
            "right": self.right,
            "depth": self.depth,
            "excluded": self.excluded,
            "pi_old": self.pi_old,
        }

    @staticmethod
    def from_dict(d: dict[str, Any]) -> "StepRecord":
        try:
            return StepRecord(
                node=int(d["node"]),
                state=BipartiteState.from_dict(d["state"]),
                action=int(d["action"]),
                reward=float(d["reward"]),
                left=int(d["left"]),
                right=int(d["right"]),
                depth=int(d.get("depth", 0)),
                excluded=bool(d.get("excluded", False)),
                pi_old=None if d.get("pi_old") is None else float(d["pi_old"]),
            )
        except KeyError as e:
            raise SchemaError("missing field in step record", field=str(e.args[0])) from e


@dataclass(eq=False)
class Trajectory:
    """The expansions of one solve, linked by node ids; children without a record are leaves."""

    instance: str
    root_bound: float
    records: list[StepRecord] = field(default_factory=list)
    family: str = ""

    @property
    def scale(self) -> float:
        return 1.0 + abs(self.root_bound)

    def to_dict(self) -> dict[str, Any]:
        return {
            "instance": self.instance,
            "family": self.family,
            "root_bound": self.root_bound,
            "records": [r.to_dict() for r in self.records],
        }

    @staticmethod
    def from_dict(d: dict[str, Any]) -> "Trajectory":
        return Trajectory(
            instance=str(d["instance"]),
            family=str(d.get("family", "")),
            root_bound=float(d["root_bound"]),
            records=[StepRecord.from_dict(r) for r in d.get("records", [])],
        )


def value_targets_from_tree(traj: Trajectory, gamma: float) -> dict[int, float]:
    """V(s) = r + gamma * (V(left) + V(right)) / 2, bottom-up; unexpanded children count as 0."""

    by_node = {r.node: r for r in traj.records}
    values: dict[int, float] = {}
    # 0 = unseen, 1 = on the current path, 2 = done
    color: dict[int, int] = {}

    for start in by_node:
        if color.get(start) == 2:
            continue
        stack: list[tuple[int, bool]] = [(start, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                rec = by_node[node]
                v_left = values.get(rec.left, 0.0)
                v_right = values.get(rec.right, 0.0)
                values[node] = rec.reward + gamma * (v_left + v_right) / 2.0
                color[node] = 2
                continue
            state = color.get(node, 0)
            if state == 2:
                continue
            if state == 1:
                raise CyclicTree(f"{traj.instance}: node {node} is its own descendant")
            color[node] = 1
            stack.append((node, True))
            rec = by_node[node]
            for child in (rec.right, rec.left):
                if child not in by_node:
                    continue
                if color.get(child) == 1:
                    raise CyclicTree(f"{traj.instance}: node {child} is its own descendant")
                if color.get(child, 0) == 0:
                    stack.append((child, False))
    return values


def normalized_targets(traj: Trajectory, gamma: float) -> dict[int, float]:
    """Value targets divided by 1 + |root LP objective|."""
    s = traj.scale
    return {k: v / s for k, v in value_targets_from_tree(traj, gamma).items()}
