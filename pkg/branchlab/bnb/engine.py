from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import TYPE_CHECKING, Any, Callable, Sequence

import numpy as np

from branchlab.bnb.node import BnbNode, NodeFactory, OpenSet, apply_branch, select_next_node
from branchlab.bnb.reward import local_reward
from branchlab.bnb.score import DualBoundTrace
from branchlab.errors import SolveAborted, UnboundedRelaxation
from branchlab.milp.simplex import lp_relax_solve
from branchlab.model.types import BoundDelta, BranchDecision, LpSolution, LpStatus, MilpInstance
from branchlab.util.clock import Clock, MonotonicClock
from branchlab.util.limits import DEFAULT_ITER_LIMIT, INT_TOL, PRUNE_TOL, RETRY_ITER_FACTOR, reward_cap
from branchlab.util.state_log import log_event

if TYPE_CHECKING:
    from branchlab.branching.base import Brancher

log = logging.getLogger(__name__)

Observer = Callable[[BnbNode, BranchDecision, BnbNode, BnbNode, float], None]


class SolveStatus(str, Enum):
    OPTIMAL = "Optimal"
    NODE_LIMIT = "NodeLimit"
    TIME_LIMIT = "TimeLimit"
    INFEASIBLE = "Infeasible"


@dataclass(frozen=True)
class SolveLimits:
    node_limit: int = 10_000
    time_limit_s: float = math.inf
    iter_limit: int = DEFAULT_ITER_LIMIT


@dataclass(frozen=True, eq=False)
class Incumbent:
    x: np.ndarray
    objective: float


@dataclass
class SolveStats:
    nodes_visited: int
    wall_time_s: float
    status: SolveStatus
    incumbent: Incumbent | None
    trace: DualBoundTrace
    per_node_log: list[tuple[int, int, float]] = field(default_factory=list)
    lp_solves: int = 0

    @property
    def objective(self) -> float:
        return self.incumbent.objective if self.incumbent is not None else math.inf


@dataclass
class BranchContext:
    """What a brancher may use besides the node: the instance and a counted LP oracle."""

    inst: MilpInstance
    solve_lp: Callable[[Sequence[BoundDelta]], LpSolution]
    int_tol: float = INT_TOL

    def reward_cap(self, parent_bound: float) -> float:
        return reward_cap(parent_bound)


class _LpCounter:
    def __init__(self, inst: MilpInstance, clock: Clock) -> None:
        self.inst = inst
        self.clock = clock
        self.count = 0

    def __call__(self, deltas: Sequence[BoundDelta], iter_limit: int) -> LpSolution:
        lp = lp_relax_solve(self.inst, deltas, iter_limit)
        self.count += 1
        self.clock.tick_lp()
        if lp.status is LpStatus.UNBOUNDED:
            raise UnboundedRelaxation(f"{self.inst.name}: LP relaxation is unbounded")
        return lp


def _integral_point(inst: MilpInstance, node: BnbNode) -> Incumbent:
    x = np.array(node.lp.x, dtype=np.float64, copy=True)
    idx = list(inst.integer)
    x[idx] = np.round(x[idx])
    return Incumbent(x=x, objective=float(inst.c @ x))


def bnb_solve(
    inst: MilpInstance,
    brancher: "Brancher",
    limits: SolveLimits | None = None,
    clock: Clock | None = None,
    *,
    observer: Observer | None = None,
    trajectory_log: str | Path | None = None,
    int_tol: float = INT_TOL,
) -> SolveStats:
    """Best-bound branch and bound on a normalized instance.

    Children are created with their LP solved; ``nodes_visited`` counts nodes whose LP terminated,
    so a node whose LP hits the iteration limit counts only once its re-solve succeeds. Until then it
    keeps its parent's bound; it is re-solved once with a larger limit when selected, and a second
    failure raises ``SolveAborted``.
    """

    limits = limits or SolveLimits()
    clock = clock or MonotonicClock()
    t0 = clock.now()
    lp = _LpCounter(inst, clock)
    factory = NodeFactory(inst, lp, limits.iter_limit, int_tol)
    retry_limit = limits.iter_limit * RETRY_ITER_FACTOR
    ctx = BranchContext(inst=inst, solve_lp=lambda deltas: lp(deltas, limits.iter_limit), int_tol=int_tol)

    root = factory.make(None, ())
    if root.unsolved:
        root = factory.resolve(root, retry_limit)
        if root.unsolved:
            raise SolveAborted(f"{inst.name}: root LP hit the iteration limit twice")

    trace = DualBoundTrace()
    trace.record(0.0, root.dual_bound)
    open_set = OpenSet()
    open_set.push(root)
    incumbent: Incumbent | None = None
    per_node: list[tuple[int, int, float]] = []
    status = SolveStatus.OPTIMAL

    def global_bound() -> float:
        inc = incumbent.objective if incumbent is not None else math.inf
        return min(open_set.min_bound(), inc)

    while open_set:
        node = select_next_node(open_set)
        if node.unsolved:
            if node.retries >= 1:
                raise SolveAborted(f"{inst.name}: node {node.id} LP hit the iteration limit twice")
            node = factory.resolve(node, retry_limit)
            if node.unsolved:
                raise SolveAborted(f"{inst.name}: node {node.id} LP hit the iteration limit twice")
            if not node.infeasible:
                open_set.push(node)
            trace.record(clock.now() - t0, global_bound())
            continue

        cutoff = incumbent.objective if incumbent is not None else math.inf
        if node.dual_bound >= cutoff - PRUNE_TOL:
            log.debug("prune node %d (bound %.6g)", node.id, node.dual_bound)
            continue

        if not node.candidates:
            found = _integral_point(inst, node)
            if incumbent is None or found.objective < incumbent.objective:
                incumbent = found
                log.debug("incumbent %.6g at node %d", incumbent.objective, node.id)
            trace.record(clock.now() - t0, global_bound())
            continue

        if factory.solved >= limits.node_limit or clock.now() - t0 >= limits.time_limit_s:
            open_set.push(node)
            status = SolveStatus.NODE_LIMIT if factory.solved >= limits.node_limit else SolveStatus.TIME_LIMIT
            break

        decision = brancher.select(node, ctx)
        left, right = apply_branch(node, decision.var, factory)
        reward = local_reward(node, left, right)
        per_node.append((node.id, decision.var, reward))
        if observer is not None:
            observer(node, decision, left, right, reward)
        for child in (left, right):
            if not child.infeasible:
                open_set.push(child)

        z = global_bound()
        trace.record(clock.now() - t0, z)
        if trajectory_log is not None:
            log_event(
                trajectory_log,
                {
                    "node": node.id,
                    "depth": node.depth,
                    "action": decision.var,
                    "reward": reward,
                    "dual_bound": z if math.isfinite(z) else None,
                    "t": clock.now() - t0,
                },
            )

    if status is SolveStatus.OPTIMAL and incumbent is None:
        status = SolveStatus.INFEASIBLE
    trace.record(clock.now() - t0, global_bound())

    stats = SolveStats(
        nodes_visited=factory.solved,
        wall_time_s=clock.now() - t0,
        status=status,
        incumbent=incumbent,
        trace=trace,
        per_node_log=per_node,
        lp_solves=lp.count,
    )
    log.info(
        "%s: %s after %d nodes, objective %s",
        inst.name,
        status.value,
        stats.nodes_visited,
        "-" if incumbent is None else f"{inst.original_objective(incumbent.objective):.6g}",
    )
    return stats


def solve_summary(stats: SolveStats) -> dict[str, Any]:
    return {
        "nodes": stats.nodes_visited,
        "time_s": stats.wall_time_s,
        "status": stats.status.value,
        "objective": None if stats.incumbent is None else stats.incumbent.objective,
        "lp_solves": stats.lp_solves,
    }
