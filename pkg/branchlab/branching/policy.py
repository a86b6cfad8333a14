from __future__ import annotations

from typing import Literal

import numpy as np

from branchlab.bnb.engine import BranchContext
from branchlab.bnb.node import BnbNode
from branchlab.errors import EmptyCandidates
from branchlab.gnn.network import gcnn_forward
from branchlab.gnn.params import GcnnParams
from branchlab.gnn.state import BipartiteState, extract_state
from branchlab.model.types import BranchDecision
from branchlab.util.rng import make_rng


def greedy_action(pi: np.ndarray, mask: np.ndarray) -> int:
    """Most probable candidate; ties go to the smallest index."""
    if not mask.any():
        raise EmptyCandidates("no branching candidates")
    return int(np.argmax(np.where(mask, pi, -np.inf)))


def policy_select(state: BipartiteState, params: GcnnParams) -> BranchDecision:
    if not state.mask.any():
        raise EmptyCandidates("no branching candidates")
    pi, _, _ = gcnn_forward(state, params)
    return BranchDecision(var=greedy_action(pi, state.mask), aux={j: float(pi[j]) for j in state.candidates})


class PolicyBrancher:
    """GCNN policy: greedy for evaluation, sampling for on-policy rollouts.

    ``aux`` of every decision holds the policy's probability per candidate, so rollouts can record
    the behaviour probability of the chosen action.
    """

    def __init__(
        self,
        params: GcnnParams,
        *,
        mode: Literal["greedy", "sample"] = "greedy",
        seed: int = 0,
        name: str = "policy",
    ) -> None:
        self.params = params
        self.mode = mode
        self.name = name
        self.rng = make_rng(seed, "policy")

    def select(self, node: BnbNode, ctx: BranchContext) -> BranchDecision:
        state = extract_state(node, ctx.inst)
        if self.mode == "greedy":
            return policy_select(state, self.params)
        pi, _, _ = gcnn_forward(state, self.params)
        j = int(self.rng.choice(state.n, p=pi))
        return BranchDecision(var=j, aux={a: float(pi[a]) for a in state.candidates})
