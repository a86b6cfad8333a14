"""Per-sample losses and their gradients with respect to the network outputs (pi, V).

Every function returns ``(loss, dpi, dv)`` for a quantity that is minimised; the gradients feed
``gcnn_backward`` directly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from branchlab.errors import ActionNotMasked

PI_FLOOR = 1e-300


def _check_action(pi: np.ndarray, action: int) -> None:
    if not (0 <= action < len(pi)) or pi[action] <= 0.0:
        raise ActionNotMasked(f"action {action} has zero probability")


def policy_nll(pi: np.ndarray, action: int) -> tuple[float, np.ndarray]:
    _check_action(pi, action)
    dpi = np.zeros_like(pi)
    dpi[action] = -1.0 / pi[action]
    return -float(np.log(pi[action])), dpi


def imitation_loss(pi: np.ndarray, v: float, action: int, target: float) -> tuple[float, np.ndarray, float]:
    """-log pi(a) + (V - target)^2."""
    nll, dpi = policy_nll(pi, action)
    diff = float(v) - float(target)
    return nll + diff * diff, dpi, 2.0 * diff


def distill_loss(pi: np.ndarray, target_action: int) -> tuple[float, np.ndarray, float]:
    nll, dpi = policy_nll(pi, target_action)
    return nll, dpi, 0.0


@dataclass(frozen=True)
class PpoTerms:
    advantage: float
    ratio: float
    surrogate: float
    objective: float


def clipped_surrogate(ratio: float, advantage: float, eps: float) -> tuple[float, bool]:
    """min(r A, clip(r, 1 - eps, 1 + eps) A) and whether the unclipped term is the minimum."""
    unclipped = ratio * advantage
    clipped = float(np.clip(ratio, 1.0 - eps, 1.0 + eps)) * advantage
    if unclipped <= clipped:
        return unclipped, True
    return clipped, False


def ppo_loss(
    pi: np.ndarray,
    v: float,
    mask: np.ndarray,
    action: int,
    pi_old: float,
    target: float,
    *,
    eps: float = 0.1,
    c1: float = 0.5,
    c2: float = 0.01,
) -> tuple[float, np.ndarray, float, PpoTerms]:
    """Negated PPO objective L = surrogate - c1 A^2 - c2 sum pi log pi, with A = target - V."""

    _check_action(pi, action)
    adv = float(target) - float(v)
    ratio = float(pi[action]) / float(pi_old)
    surrogate, unclipped = clipped_surrogate(ratio, adv, eps)
    logp = np.where(mask, np.log(np.maximum(pi, PI_FLOOR)), 0.0)
    neg_entropy = float(np.sum(np.where(mask, pi * logp, 0.0)))
    objective = surrogate - c1 * adv * adv - c2 * neg_entropy

    dobj_dpi = np.zeros_like(pi)
    if unclipped:
        dobj_dpi[action] = adv / float(pi_old)
    dobj_dpi -= c2 * np.where(mask, logp + 1.0, 0.0)
    dobj_dadv = (ratio if unclipped else float(np.clip(ratio, 1.0 - eps, 1.0 + eps))) - 2.0 * c1 * adv
    # dA/dV = -1, and we descend -L
    dv = dobj_dadv
    terms = PpoTerms(advantage=adv, ratio=ratio, surrogate=surrogate, objective=objective)
    return -objective, -dobj_dpi, dv, terms
