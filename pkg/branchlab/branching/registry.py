from __future__ import annotations

from branchlab.branching.base import Brancher
from branchlab.branching.mcts_rule import MctsBrancher
from branchlab.branching.mostinf import MostInfeasibleBrancher
from branchlab.branching.policy import PolicyBrancher
from branchlab.branching.random_rule import RandomBrancher
from branchlab.branching.strong import StrongBrancher
from branchlab.errors import UnknownStrategy
from branchlab.gnn.params import GcnnParams
from branchlab.training.mcts import MctsConfig

BUILTIN = ("random", "fsb", "mostinf")
LEARNED = ("gcnn", "policy", "policy+mcts")
STRATEGIES = BUILTIN + LEARNED


def make_brancher(
    name: str,
    *,
    seed: int = 0,
    params: GcnnParams | None = None,
    mcts: MctsConfig | None = None,
) -> Brancher:
    """A fresh brancher for one solve.

    Learned strategies need ``params``; ``policy+mcts`` searches online only when ``mcts`` is given
    and otherwise branches greedily on the refined policy.
    """

    key = str(name).strip().lower()
    if key == "random":
        return RandomBrancher(seed)
    if key == "fsb":
        return StrongBrancher(seed)
    if key == "mostinf":
        return MostInfeasibleBrancher(seed)
    if key in LEARNED:
        if params is None:
            raise UnknownStrategy(f"strategy {name!r} needs trained parameters")
        if key == "policy+mcts" and mcts is not None:
            return MctsBrancher(params, mcts, seed)
        return PolicyBrancher(params, mode="greedy", seed=seed, name=key)
    raise UnknownStrategy(f"unknown strategy {name!r} (expected one of {', '.join(STRATEGIES)})")
