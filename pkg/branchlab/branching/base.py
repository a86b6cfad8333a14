from __future__ import annotations

from typing import Protocol, Sequence

from branchlab.bnb.engine import BranchContext
from branchlab.bnb.node import BnbNode
from branchlab.errors import EmptyCandidates
from branchlab.model.types import BranchDecision


class Brancher(Protocol):
    """Variable selection: given an expanded node with a nonempty candidate set, pick one candidate.

    Instances own their RNG and are built once per solve, so parallel solves never share state.
    """

    name: str

    def select(self, node: BnbNode, ctx: BranchContext) -> BranchDecision:
        ...


def require_candidates(candidates: Sequence[int]) -> tuple[int, ...]:
    cands = tuple(int(j) for j in candidates)
    if not cands:
        raise EmptyCandidates("no fractional integer variable to branch on")
    return cands


def argmax_smallest(scores: dict[int, float]) -> int:
    """Key with the largest score; ties go to the smallest key."""
    best_j = None
    best = -float("inf")
    for j in sorted(scores):
        if best_j is None or scores[j] > best:
            best_j, best = j, scores[j]
    assert best_j is not None
    return best_j
