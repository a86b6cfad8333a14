from __future__ import annotations

from typing import Sequence

import numpy as np

from branchlab.bnb.engine import BranchContext
from branchlab.bnb.node import BnbNode
from branchlab.branching.base import require_candidates
from branchlab.model.types import BranchDecision
from branchlab.util.rng import make_rng


def random_select(candidates: Sequence[int], rng: np.random.Generator) -> BranchDecision:
    cands = require_candidates(candidates)
    return BranchDecision(var=cands[int(rng.integers(len(cands)))])


class RandomBrancher:
    name = "random"

    def __init__(self, seed: int = 0) -> None:
        self.rng = make_rng(seed, self.name)

    def select(self, node: BnbNode, ctx: BranchContext) -> BranchDecision:
        return random_select(node.candidates, self.rng)
