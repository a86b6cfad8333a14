"""On-policy rollouts and the clipped PPO update."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from branchlab.branching.policy import PolicyBrancher
from branchlab.errors import EmptyDataset, SolveAborted
from branchlab.gnn.network import gcnn_backward, gcnn_forward
from branchlab.gnn.params import GcnnParams
from branchlab.model.types import MilpInstance
from branchlab.training.dataset import record_solve
from branchlab.training.imitation import fit_epochs
from branchlab.training.losses import ppo_loss
from branchlab.training.values import StepRecord, Trajectory, normalized_targets
from branchlab.util.rng import derive_seed, make_rng

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class PpoItem:
    record: StepRecord
    target: float


def rollout_policy(inst: MilpInstance, params: GcnnParams, seed: int, node_cap: int) -> Trajectory:
    """One sampled-policy solve; every record keeps the behaviour probability of its action."""
    brancher = PolicyBrancher(params, mode="sample", seed=derive_seed(seed, inst.name), name="ppo-rollout")
    return record_solve(inst, brancher, node_cap).trajectory()


def collect_rollouts(
    instances: Sequence[MilpInstance], params: GcnnParams, seed: int, node_cap: int
) -> list[Trajectory]:
    out: list[Trajectory] = []
    for inst in instances:
        try:
            out.append(rollout_policy(inst, params, seed, node_cap))
        except SolveAborted as e:
            log.warning("skipping %s: %s", inst.name, e)
    return out


def ppo_items(trajectories: Sequence[Trajectory], gamma: float) -> list[PpoItem]:
    items: list[PpoItem] = []
    for traj in trajectories:
        targets = normalized_targets(traj, gamma)
        for r in traj.records:
            if r.excluded or r.pi_old is None:
                continue
            items.append(PpoItem(record=r, target=targets[r.node]))
    return items


def ppo_update(
    trajectories: Sequence[Trajectory],
    params: GcnnParams,
    eps: float = 0.1,
    c1: float = 0.5,
    c2: float = 0.01,
    gamma: float = 0.99,
    epochs: int = 4,
    lr: float = 1e-4,
    batch_size: int = 16,
    seed: int = 0,
) -> tuple[GcnnParams, list[float]]:
    """Ascend the clipped surrogate minus value and entropy penalties.

    ``pi_old`` comes from the rollouts, so ``params`` passed here is the snapshot they were drawn
    with. On ``NumericalDivergence`` nothing is returned and the snapshot stays the caller's.
    """

    items = ppo_items(trajectories, gamma)
    if not items:
        raise EmptyDataset("no rollout records to train on")

    def grad(p: GcnnParams, item: PpoItem) -> tuple[float, dict[str, np.ndarray]]:
        r = item.record
        pi, v, trace = gcnn_forward(r.state, p)
        loss, dpi, dv, _ = ppo_loss(
            pi, v, r.state.mask, r.action, float(r.pi_old), item.target, eps=eps, c1=c1, c2=c2
        )
        return loss, gcnn_backward(trace, dpi, dv)

    return fit_epochs(
        items,
        params,
        grad,
        epochs=epochs,
        lr=lr,
        batch_size=batch_size,
        rng=make_rng(seed, "ppo"),
        label="ppo",
    )


def mean_surrogate(
    trajectories: Sequence[Trajectory], params: GcnnParams, eps: float, gamma: float
) -> tuple[float, float]:
    """Mean clipped surrogate and mean advantage under ``params``; equal when params are the snapshot."""

    items = ppo_items(trajectories, gamma)
    if not items:
        raise EmptyDataset("no rollout records to score")
    surr = []
    adv = []
    for item in items:
        r = item.record
        pi, v, _ = gcnn_forward(r.state, params)
        _, _, _, terms = ppo_loss(pi, v, r.state.mask, r.action, float(r.pi_old), item.target, eps=eps)
        surr.append(terms.surrogate)
        adv.append(terms.advantage)
    return float(np.mean(surr)), float(np.mean(adv))
