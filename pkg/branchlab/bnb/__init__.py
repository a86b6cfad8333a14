"""Branch-and-bound search, rewards and the dual-integral score."""

from .engine import BranchContext, Incumbent, SolveLimits, SolveStats, SolveStatus, bnb_solve
from .node import BnbNode, NodeFactory, OpenSet, apply_branch, select_next_node
from .reward import local_reward, reward_excluded
from .score import DualBoundTrace, dual_integral_score

__all__ = [
    "BnbNode",
    "BranchContext",
    "DualBoundTrace",
    "Incumbent",
    "NodeFactory",
    "OpenSet",
    "SolveLimits",
    "SolveStats",
    "SolveStatus",
    "apply_branch",
    "bnb_solve",
    "dual_integral_score",
    "local_reward",
    "reward_excluded",
    "select_next_node",
]
