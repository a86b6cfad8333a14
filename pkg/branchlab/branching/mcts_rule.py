from __future__ import annotations

from branchlab.bnb.engine import BranchContext
from branchlab.bnb.node import BnbNode
from branchlab.gnn.params import GcnnParams
from branchlab.gnn.state import extract_state
from branchlab.model.types import BranchDecision
from branchlab.training.mcts import GcnnEvaluator, MctsConfig, mcts_search
from branchlab.util.rng import make_rng


class MctsBrancher:
    """Runs a fresh search at every node and branches on the best root action."""

    name = "policy+mcts"

    def __init__(self, params: GcnnParams, config: MctsConfig | None = None, seed: int = 0) -> None:
        self.evaluator = GcnnEvaluator(params)
        self.config = config or MctsConfig()
        self.rng = make_rng(seed, "mcts")

    def select(self, node: BnbNode, ctx: BranchContext) -> BranchDecision:
        state = extract_state(node, ctx.inst)
        stats, best = mcts_search(state, self.evaluator, self.config, self.rng)
        return BranchDecision(var=best, aux=dict(stats.root.q))
