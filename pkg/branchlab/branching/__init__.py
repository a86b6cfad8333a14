"""Variable-selection strategies."""

from .base import Brancher
from .mostinf import mostinf_select
from .policy import PolicyBrancher, policy_select
from .random_rule import RandomBrancher, random_select
from .registry import STRATEGIES, make_brancher
from .strong import StrongBrancher, fsb_select, sb_score

__all__ = [
    "Brancher",
    "PolicyBrancher",
    "RandomBrancher",
    "STRATEGIES",
    "StrongBrancher",
    "fsb_select",
    "make_brancher",
    "mostinf_select",
    "policy_select",
    "random_select",
    "sb_score",
]
