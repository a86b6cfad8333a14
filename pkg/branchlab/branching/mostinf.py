from __future__ import annotations

import math

from branchlab.bnb.engine import BranchContext
from branchlab.bnb.node import BnbNode
from branchlab.branching.base import argmax_smallest, require_candidates
from branchlab.model.types import BranchDecision


def mostinf_select(node: BnbNode) -> BranchDecision:
    """Candidate whose fractional part is closest to one half."""
    cands = require_candidates(node.candidates)
    scores: dict[int, float] = {}
    for j in cands:
        v = float(node.lp.x[j])  # type: ignore[index]
        f = v - math.floor(v)
        scores[j] = min(f, 1.0 - f)
    return BranchDecision(var=argmax_smallest(scores), aux=scores)


class MostInfeasibleBrancher:
    name = "mostinf"

    def __init__(self, seed: int = 0) -> None:
        self.seed = seed

    def select(self, node: BnbNode, ctx: BranchContext) -> BranchDecision:
        return mostinf_select(node)
