from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from branchlab.branching.policy import PolicyBrancher
from branchlab.errors import NoQualifyingStates, SolveAborted
from branchlab.gnn.network import gcnn_backward, gcnn_forward
from branchlab.gnn.params import GcnnParams
from branchlab.gnn.state import BipartiteState
from branchlab.model.types import MilpInstance
from branchlab.training.dataset import record_solve
from branchlab.training.imitation import fit_epochs
from branchlab.training.losses import distill_loss
from branchlab.training.mcts import GcnnEvaluator, MctsConfig, MctsStats, mcts_search
from branchlab.util.rng import make_rng

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class DistillPair:
    state: BipartiteState
    action: int


def collect_mcts_stats(
    instances: Sequence[MilpInstance],
    params: GcnnParams,
    config: MctsConfig,
    seed: int = 0,
    roots_per_instance: int = 20,
) -> list[MctsStats]:
    """Search from the states a greedy policy solve expands, up to ``roots_per_instance`` each."""

    evaluator = GcnnEvaluator(params)
    out: list[MctsStats] = []
    for inst in instances:
        try:
            rec = record_solve(inst, PolicyBrancher(params, seed=seed), roots_per_instance)
        except SolveAborted as e:
            log.warning("skipping %s: %s", inst.name, e)
            continue
        rng = make_rng(seed, "mcts-refine", inst.name)
        for r in rec.records[:roots_per_instance]:
            stats, _ = mcts_search(r.state, evaluator, config, rng)
            out.append(stats)
    log.info("mcts: %d searches over %d instances", len(out), len(instances))
    return out


def distill_pairs(stats_list: Sequence[MctsStats], visit_threshold: int) -> list[DistillPair]:
    return [
        DistillPair(state=nd.state, action=nd.best_action())
        for stats in stats_list
        for nd in stats.qualifying(visit_threshold)
    ]


def _distill_grad(params: GcnnParams, pair: DistillPair) -> tuple[float, dict[str, np.ndarray]]:
    pi, _, trace = gcnn_forward(pair.state, params)
    loss, dpi, dv = distill_loss(pi, pair.action)
    return loss, gcnn_backward(trace, dpi, dv)


def distill_cross_entropy(pairs: Sequence[DistillPair], params: GcnnParams) -> float:
    return float(np.mean([distill_loss(gcnn_forward(p.state, params)[0], p.action)[0] for p in pairs]))


def mcts_refine(
    params: GcnnParams,
    stats_list: Sequence[MctsStats],
    visit_threshold: int = 10,
    epochs: int = 20,
    lr: float = 1e-3,
    batch_size: int = 16,
    seed: int = 0,
) -> tuple[GcnnParams, list[float]]:
    """Cross-entropy toward the argmax-Q action of every state visited at least ``visit_threshold`` times."""

    pairs = distill_pairs(stats_list, visit_threshold)
    if not pairs:
        raise NoQualifyingStates(f"no searched state reached {visit_threshold} visits")
    log.info("mcts refine: %d qualifying states", len(pairs))
    return fit_epochs(
        pairs,
        params,
        _distill_grad,
        epochs=epochs,
        lr=lr,
        batch_size=batch_size,
        rng=make_rng(seed, "refine"),
        label="refine",
    )
