from __future__ import annotations

from branchlab.bnb.engine import BranchContext
from branchlab.bnb.node import BnbNode, branch_deltas
from branchlab.branching.base import argmax_smallest, require_candidates
from branchlab.model.types import BranchDecision, LpSolution, LpStatus
from branchlab.util.limits import SB_EPS


def sb_product(delta_down: float, delta_up: float, eps: float = SB_EPS) -> float:
    return max(delta_down, eps) * max(delta_up, eps)


def _gain(lp: LpSolution, parent_bound: float, cap: float) -> float:
    if lp.status is LpStatus.INFEASIBLE:
        return cap
    if lp.status is LpStatus.OPTIMAL:
        return float(lp.objective) - parent_bound
    # iteration limit: no information about this side
    return 0.0


def sb_score(node: BnbNode, j: int, ctx: BranchContext) -> float:
    """Product-rule strong-branching score from both child LPs, solved outside the tree."""

    dl, dr = branch_deltas(node, j)
    cap = ctx.reward_cap(node.dual_bound)
    down = _gain(ctx.solve_lp(dl), node.dual_bound, cap)
    up = _gain(ctx.solve_lp(dr), node.dual_bound, cap)
    return sb_product(down, up)


def fsb_select(node: BnbNode, ctx: BranchContext) -> BranchDecision:
    cands = require_candidates(node.candidates)
    scores = {j: sb_score(node, j, ctx) for j in cands}
    return BranchDecision(var=argmax_smallest(scores), aux=scores)


class StrongBrancher:
    name = "fsb"

    def __init__(self, seed: int = 0) -> None:
        self.seed = seed

    def select(self, node: BnbNode, ctx: BranchContext) -> BranchDecision:
        return fsb_select(node, ctx)
