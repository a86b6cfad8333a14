from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

from branchlab.milp.candidates import fractional_candidates
from branchlab.model.types import BoundDelta, DeltaKind, LpSolution, LpStatus, MilpInstance
from branchlab.util.limits import INT_TOL

LpSolver = Callable[[Sequence[BoundDelta], int], LpSolution]


@dataclass(eq=False)
class BnbNode:
    id: int
    parent: int | None
    depth: int
    deltas: tuple[BoundDelta, ...]
    lp: LpSolution
    dual_bound: float
    candidates: tuple[int, ...] = ()
    # LP re-solves after an iteration-limit hit
    retries: int = 0

    @property
    def infeasible(self) -> bool:
        return self.lp.status is LpStatus.INFEASIBLE

    @property
    def unsolved(self) -> bool:
        return self.lp.status is LpStatus.ITERATION_LIMIT


class NodeFactory:
    """Creates nodes with their LP solved.

    ``created`` counts every node made; ``solved`` counts nodes whose LP reached a terminal status
    and is the engine's nodes_visited. A node that hits the iteration limit is counted once its
    re-solve terminates.
    """

    def __init__(self, inst: MilpInstance, solve: LpSolver, iter_limit: int, int_tol: float = INT_TOL) -> None:
        self.inst = inst
        self.solve = solve
        self.iter_limit = int(iter_limit)
        self.int_tol = float(int_tol)
        self.created = 0
        self.solved = 0
        self._next_id = 0

    def _finish(self, node: BnbNode, lp: LpSolution, fallback_bound: float) -> BnbNode:
        node.lp = lp
        if lp.status is not LpStatus.ITERATION_LIMIT:
            self.solved += 1
        if lp.status is LpStatus.OPTIMAL:
            node.dual_bound = float(lp.objective)
            node.candidates = fractional_candidates(lp.x, self.inst.integer, self.int_tol)  # type: ignore[arg-type]
        elif lp.status is LpStatus.INFEASIBLE:
            node.dual_bound = math.inf
            node.candidates = ()
        else:
            node.dual_bound = fallback_bound
            node.candidates = ()
        return node

    def make(self, parent: BnbNode | None, deltas: tuple[BoundDelta, ...]) -> BnbNode:
        node_id = self._next_id
        self._next_id += 1
        lp = self.solve(deltas, self.iter_limit)
        self.created += 1
        node = BnbNode(
            id=node_id,
            parent=None if parent is None else parent.id,
            depth=0 if parent is None else parent.depth + 1,
            deltas=deltas,
            lp=lp,
            dual_bound=math.nan,
        )
        fallback = -math.inf if parent is None else parent.dual_bound
        return self._finish(node, lp, fallback)

    def resolve(self, node: BnbNode, iter_limit: int) -> BnbNode:
        node.retries += 1
        return self._finish(node, self.solve(node.deltas, int(iter_limit)), node.dual_bound)


def branch_deltas(node: BnbNode, j: int) -> tuple[tuple[BoundDelta, ...], tuple[BoundDelta, ...]]:
    x = float(node.lp.x[j])  # type: ignore[index]
    left = node.deltas + (BoundDelta(j, DeltaKind.UPPER_AT_MOST, float(math.floor(x))),)
    right = node.deltas + (BoundDelta(j, DeltaKind.LOWER_AT_LEAST, float(math.ceil(x))),)
    return left, right


def apply_branch(node: BnbNode, j: int, factory: NodeFactory) -> tuple[BnbNode, BnbNode]:
    if j not in node.candidates:
        raise ValueError(f"variable {j} is not a branching candidate of node {node.id}")
    dl, dr = branch_deltas(node, j)
    return factory.make(node, dl), factory.make(node, dr)


@dataclass
class OpenSet:
    """Best-bound priority queue; equal bounds leave in creation order."""

    _heap: list[tuple[float, int, BnbNode]] = field(default_factory=list)

    def push(self, node: BnbNode) -> None:
        heapq.heappush(self._heap, (node.dual_bound, node.id, node))

    def pop(self) -> BnbNode:
        return heapq.heappop(self._heap)[2]

    def min_bound(self) -> float:
        return self._heap[0][0] if self._heap else math.inf

    def __len__(self) -> int:
        return len(self._heap)


def select_next_node(open_set: OpenSet) -> BnbNode:
    return open_set.pop()
