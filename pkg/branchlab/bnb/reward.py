from __future__ import annotations

import math

from branchlab.bnb.node import BnbNode
from branchlab.util.limits import reward_cap


def clamped_bound(child: BnbNode, parent_bound: float) -> float:
    if math.isinf(child.dual_bound) and child.dual_bound > 0:
        return parent_bound + reward_cap(parent_bound)
    return child.dual_bound


def local_reward(parent: BnbNode, left: BnbNode, right: BnbNode) -> float:
    """Improvement of the local dual bound; an infeasible child counts as parent + cap."""

    p = parent.dual_bound
    return min(clamped_bound(left, p), clamped_bound(right, p)) - p


def reward_excluded(left: BnbNode, right: BnbNode) -> bool:
    """Both children infeasible: the reward equals the cap and is kept out of value fitting."""

    return left.infeasible and right.infeasible
