"""Numerical tolerances and hard limits shared by the solver, the features and the harness."""

from __future__ import annotations

# LP
FEAS_TOL = 1e-6
PIVOT_TOL = 1e-9
DEFAULT_ITER_LIMIT = 20_000
# re-queue factor for a node whose LP hit the iteration limit
RETRY_ITER_FACTOR = 4

# integrality
INT_TOL = 1e-6

# B&B
PRUNE_TOL = 1e-9
BOUND_MONOTONE_TOL = 1e-6
REWARD_CAP_FACTOR = 10.0

# strong branching product-rule floor
SB_EPS = 1e-6

# brute-force oracle
DEFAULT_BOX_LIMIT = 1 << 16

# feature clipping
FEATURE_CLIP = 10.0


def reward_cap(parent_bound: float) -> float:
    """Finite stand-in for the bound improvement of an infeasible child."""
    return REWARD_CAP_FACTOR * (1.0 + abs(float(parent_bound)))
