from __future__ import annotations

import dataclasses
import math
from pathlib import Path
from typing import Callable

import numpy as np
import pytest

from branchlab.errors import ActionNotMasked, CyclicTree, EmptyDataset, MissingArtifact, NoQualifyingStates
from branchlab.gnn.network import gcnn_forward
from branchlab.gnn.params import init_params, zero_params
from branchlab.gnn.state import BipartiteState
from branchlab.model.types import MilpInstance
from branchlab.training.dataset import (
    SbSample,
    collect_sb_data,
    concat_samples,
    read_dataset,
    read_trajectories,
    write_dataset,
    write_trajectories,
)
from branchlab.training.imitation import imitation_pretrain, top1_agreement, uniform_agreement
from branchlab.training.losses import clipped_surrogate, imitation_loss, policy_nll, ppo_loss
from branchlab.training.mcts import MctsConfig
from branchlab.training.ppo import collect_rollouts, mean_surrogate, ppo_items, ppo_update
from branchlab.training.refine import DistillPair, collect_mcts_stats, distill_cross_entropy, mcts_refine
from branchlab.training.values import StepRecord, Trajectory, normalized_targets, value_targets_from_tree


@pytest.fixture
def tiny_corpus(make_tiny: Callable[..., MilpInstance]) -> list[MilpInstance]:
    return [make_tiny(seed, n_int=6, m=3) for seed in range(8)]


@pytest.fixture
def sb_samples(tiny_corpus: list[MilpInstance]) -> list[SbSample]:
    samples = collect_sb_data(tiny_corpus, per_instance_node_cap=10, seed=0)
    assert samples, "tiny corpus produced no expansions"
    return samples


def _record(node: int, reward: float, left: int, right: int, state: BipartiteState) -> StepRecord:
    return StepRecord(node=node, state=state, action=int(state.candidates[0]), reward=reward, left=left, right=right)


# losses


def test_policy_nll_requires_a_positive_probability() -> None:
    loss, dpi = policy_nll(np.array([0.25, 0.75, 0.0]), 1)
    assert loss == pytest.approx(-math.log(0.75), abs=1e-12)
    assert dpi.tolist() == pytest.approx([0.0, -1.0 / 0.75, 0.0], abs=1e-12)
    with pytest.raises(ActionNotMasked):
        policy_nll(np.array([0.25, 0.75, 0.0]), 2)


def test_imitation_loss_value_term_vanishes_on_target() -> None:
    pi = np.array([0.5, 0.5])
    loss, _, dv = imitation_loss(pi, 0.4, 0, 0.4)
    assert loss == pytest.approx(math.log(2.0), abs=1e-12) and dv == 0.0
    loss2, _, dv2 = imitation_loss(pi, 0.4, 0, 0.1)
    assert loss2 - loss == pytest.approx(0.09, abs=1e-12) and dv2 == pytest.approx(0.6, abs=1e-12)


def test_clip_arithmetic() -> None:
    value, unclipped = clipped_surrogate(1.3, 2.0, 0.1)
    assert value == pytest.approx(2.2, abs=1e-12) and not unclipped
    value, unclipped = clipped_surrogate(1.05, 2.0, 0.1)
    assert value == pytest.approx(2.1, abs=1e-12) and unclipped
    # negative advantage keeps the pessimistic unclipped term
    value, unclipped = clipped_surrogate(1.3, -1.0, 0.1)
    assert value == pytest.approx(-1.3, abs=1e-12) and unclipped


def test_ppo_at_the_snapshot_and_entropy_bonus() -> None:
    pi = np.array([0.5, 0.5])
    mask = np.array([True, True])
    loss, _, _, terms = ppo_loss(pi, 0.2, mask, 0, 0.5, 0.2)
    assert terms.ratio == 1.0 and terms.advantage == 0.0
    assert terms.objective == pytest.approx(0.01 * math.log(2.0), abs=1e-12)
    assert loss == pytest.approx(-0.006931, abs=1e-6)

    _, _, _, terms = ppo_loss(pi, 0.2, mask, 1, 0.5, 0.9, c1=0.0, c2=0.0)
    assert terms.surrogate == pytest.approx(terms.advantage, abs=1e-12) == pytest.approx(0.7, abs=1e-12)


def test_ppo_advantage_uses_the_current_value_head() -> None:
    pi = np.array([0.5, 0.5])
    mask = np.array([True, True])
    loss, _, dv, terms = ppo_loss(pi, 0.2, mask, 1, 0.5, 0.9, c2=0.0)
    assert terms.advantage == pytest.approx(0.7, abs=1e-12)
    # d(-L)/dV = d L/dA = ratio - 2 c1 A
    assert dv == pytest.approx(1.0 - 2 * 0.5 * 0.7, abs=1e-12)
    h = 1e-6
    up = ppo_loss(pi, 0.2 + h, mask, 1, 0.5, 0.9, c2=0.0)[0]
    down = ppo_loss(pi, 0.2 - h, mask, 1, 0.5, 0.9, c2=0.0)[0]
    assert (up - down) / (2 * h) == pytest.approx(dv, abs=1e-6)
    assert loss == pytest.approx(-(0.7 - 0.5 * 0.49), abs=1e-12)


# value targets


def test_value_targets_chain_example() -> None:
    s = BipartiteState.from_dict({"x": [[0.0] * 8], "c": [], "edges": [], "e": [], "mask": [0]})
    traj = Trajectory(instance="chain", root_bound=-3.0, records=[_record(0, 0.5, 1, 2, s), _record(1, 1.0, 3, 4, s)])
    v = value_targets_from_tree(traj, 0.99)
    assert v[1] == 1.0
    assert v[0] == pytest.approx(0.995, abs=1e-12)
    assert normalized_targets(traj, 0.99)[0] == pytest.approx(0.995 / 4.0, abs=1e-12)
    assert 2 not in v


def test_value_targets_reject_cycles() -> None:
    s = BipartiteState.from_dict({"x": [[0.0] * 8], "c": [], "edges": [], "e": [], "mask": [0]})
    traj = Trajectory(instance="loop", root_bound=0.0, records=[_record(0, 0.5, 1, 2, s), _record(1, 1.0, 0, 3, s)])
    with pytest.raises(CyclicTree):
        value_targets_from_tree(traj, 0.99)



def _random_tree(rng: np.random.Generator, size: int, state: BipartiteState) -> Trajectory:
    """Random binary tree over ids 0..2*size with nonnegative rewards on the expanded nodes."""

    leaves = [0]
    next_id = 1
    records = []
    for _ in range(size):
        node = leaves.pop(int(rng.integers(len(leaves))))
        left, right = next_id, next_id + 1
        next_id += 2
        leaves += [left, right]
        records.append(_record(node, float(rng.choice([0.0, rng.exponential()])), left, right, state))
    rng.shuffle(records)
    return Trajectory(instance="random", root_bound=float(rng.normal()), records=records)


def test_value_targets_are_nonnegative_on_random_trees() -> None:
    s = BipartiteState.from_dict({"x": [[0.0] * 8], "c": [], "edges": [], "e": [], "mask": [0]})
    rng = np.random.default_rng(0)
    for _ in range(200):
        traj = _random_tree(rng, int(rng.integers(1, 30)), s)
        gamma = float(rng.uniform(0.0, 1.0))
        v = value_targets_from_tree(traj, gamma)
        assert set(v) == {r.node for r in traj.records}
        assert all(t >= 0.0 for t in v.values())
        assert all(v[r.node] >= r.reward for r in traj.records)
        assert all(t >= 0.0 for t in normalized_targets(traj, gamma).values())

# strong-branching dataset


def test_sb_samples_follow_the_fsb_argmax(sb_samples: list[SbSample]) -> None:
    for s in sb_samples:
        assert s.action in s.state.candidates
        best = max(s.sb_scores.values())
        assert s.sb_scores[s.action] == best
        assert s.action == min(j for j, v in s.sb_scores.items() if v == best)
        assert s.value_target is not None and math.isfinite(s.value_target)
        if s.children_refs is not None:
            for ref in s.children_refs:
                if ref is not None:
                    assert sb_samples[ref].instance == s.instance


def test_root_integral_instance_emits_no_samples(knap: MilpInstance) -> None:
    easy = MilpInstance.from_dict({**knap.to_dict(), "I": []})
    assert collect_sb_data([easy], per_instance_node_cap=5) == []


def test_dataset_file_round_trip(tmp_path: Path, sb_samples: list[SbSample]) -> None:
    path = write_dataset(tmp_path / "sb.jsonl", sb_samples, {"split": "train"})
    back = read_dataset(path)
    assert len(back) == len(sb_samples)
    assert [s.action for s in back] == [s.action for s in sb_samples]
    assert [s.children_refs for s in back] == [s.children_refs for s in sb_samples]
    with pytest.raises(MissingArtifact):
        read_dataset(tmp_path / "missing.jsonl")


def test_concat_samples_shifts_child_references(sb_samples: list[SbSample]) -> None:
    merged = concat_samples([sb_samples, sb_samples])
    n = len(sb_samples)
    assert len(merged) == 2 * n
    for a, b in zip(sb_samples, merged[n:]):
        if a.children_refs is None:
            continue
        assert b.children_refs == tuple(None if r is None else r + n for r in a.children_refs)


# imitation


def test_imitation_fits_a_single_sample(sb_samples: list[SbSample]) -> None:
    sample = next(s for s in sb_samples if len(s.state.candidates) >= 2 and not s.excluded)
    params, curve = imitation_pretrain([sample], init_params(np.random.default_rng(0), h=8), epochs=400, lr=1e-2)
    pi, v, _ = gcnn_forward(sample.state, params)
    assert pi[sample.action] > 0.99
    assert -math.log(pi[sample.action]) < 0.011
    assert v == pytest.approx(sample.value_target, abs=1e-2)
    assert curve[-1] < curve[0]
    assert top1_agreement([sample], params) == 1.0


def test_imitation_needs_usable_samples(sb_samples: list[SbSample]) -> None:
    excluded = [dataclasses.replace(s, excluded=True) for s in sb_samples[:3]]
    with pytest.raises(EmptyDataset):
        imitation_pretrain(excluded, zero_params(4), epochs=1)
    with pytest.raises(EmptyDataset):
        uniform_agreement([])


def test_uniform_agreement_is_mean_inverse_candidate_count(sb_samples: list[SbSample]) -> None:
    expected = np.mean([1.0 / len(s.state.candidates) for s in sb_samples])
    assert uniform_agreement(sb_samples) == pytest.approx(expected, abs=1e-12)
    # zero params are uniform and break ties toward the smallest candidate
    hits = np.mean([s.action == min(s.state.candidates) for s in sb_samples])
    assert top1_agreement(sb_samples, zero_params(4)) == pytest.approx(hits, abs=1e-12)


# ppo


def test_rollouts_record_behaviour_probabilities(tiny_corpus: list[MilpInstance]) -> None:
    params = init_params(np.random.default_rng(1), h=8)
    trajs = collect_rollouts(tiny_corpus, params, seed=3, node_cap=8)
    assert len(trajs) == len(tiny_corpus)
    records = [r for t in trajs for r in t.records]
    assert records
    assert all(r.pi_old is not None and 0.0 < r.pi_old <= 1.0 for r in records)
    assert all(len(t.records) <= 8 for t in trajs)
    again = collect_rollouts(tiny_corpus, params, seed=3, node_cap=8)
    assert [r.action for t in again for r in t.records] == [r.action for r in records]


def test_rollout_file_keeps_behaviour_probabilities(tiny_corpus: list[MilpInstance], tmp_path: Path) -> None:
    trajs = collect_rollouts(tiny_corpus[:3], init_params(np.random.default_rng(1), h=8), seed=0, node_cap=6)
    path = write_trajectories(tmp_path / "rollouts.jsonl", trajs, {"round": 0})
    back = read_trajectories(path)
    assert [t.instance for t in back] == [t.instance for t in trajs]
    assert [r.pi_old for t in back for r in t.records] == [r.pi_old for t in trajs for r in t.records]
    with pytest.raises(MissingArtifact):
        read_trajectories(tmp_path / "absent.jsonl")


def test_ppo_surrogate_equals_advantage_at_the_snapshot(tiny_corpus: list[MilpInstance]) -> None:
    params = init_params(np.random.default_rng(2), h=8)
    trajs = collect_rollouts(tiny_corpus, params, seed=0, node_cap=8)
    surr, adv = mean_surrogate(trajs, params, eps=0.1, gamma=0.99)
    assert surr == pytest.approx(adv, abs=1e-12)

    new, curve = ppo_update(trajs, params, epochs=3, lr=1e-3)
    assert len(curve) == 3 and all(math.isfinite(c) for c in curve)
    assert not new.allclose(params)
    assert len(ppo_items(trajs, 0.99)) == sum(1 for t in trajs for r in t.records if not r.excluded)


def test_ppo_without_records_is_an_empty_dataset() -> None:
    with pytest.raises(EmptyDataset):
        ppo_update([Trajectory(instance="none", root_bound=0.0)], zero_params(4))


# mcts refinement


def test_refine_without_qualifying_states(tiny_corpus: list[MilpInstance]) -> None:
    params = init_params(np.random.default_rng(3), h=4)
    stats = collect_mcts_stats(tiny_corpus[:2], params, MctsConfig(k=3, n_sims=4), roots_per_instance=2)
    with pytest.raises(NoQualifyingStates):
        mcts_refine(params, stats, visit_threshold=1000)


def test_refine_with_zero_learning_rate_is_a_no_op(tiny_corpus: list[MilpInstance]) -> None:
    params = init_params(np.random.default_rng(4), h=4)
    stats = collect_mcts_stats(tiny_corpus, params, MctsConfig(k=3, n_sims=20), roots_per_instance=2)
    assert stats
    same, curve = mcts_refine(params, stats, visit_threshold=5, epochs=2, lr=0.0)
    assert np.array_equal(same.flat(), params.flat())
    assert len(curve) == 2


def test_refine_fits_a_single_search_target(tiny_corpus: list[MilpInstance]) -> None:
    params = init_params(np.random.default_rng(5), h=8)
    stats = collect_mcts_stats(tiny_corpus, params, MctsConfig(k=3, n_sims=30), roots_per_instance=1)
    assert stats
    root = stats[0].root
    new, _ = mcts_refine(params, stats[:1], visit_threshold=30, epochs=300, lr=1e-2)
    pi, _, _ = gcnn_forward(root.state, new)
    assert int(np.argmax(pi)) == root.best_action()
    pair = DistillPair(state=root.state, action=root.best_action())
    assert distill_cross_entropy([pair], new) < distill_cross_entropy([pair], params)


def test_refine_loss_does_not_increase_with_a_small_step(tiny_corpus: list[MilpInstance]) -> None:
    params = init_params(np.random.default_rng(5), h=8)
    stats = collect_mcts_stats(tiny_corpus, params, MctsConfig(k=3, n_sims=30), roots_per_instance=1)
    assert stats
    root = stats[0].root
    pair = DistillPair(state=root.state, action=root.best_action())
    new, curve = mcts_refine(params, stats[:1], visit_threshold=30, epochs=10, lr=1e-4)
    # one qualifying state: each epoch is a single step and records the loss before it
    assert curve[0] == pytest.approx(distill_cross_entropy([pair], params), abs=1e-12)
    assert all(b <= a + 1e-12 for a, b in zip(curve, curve[1:]))
    assert curve[-1] < curve[0]
    assert distill_cross_entropy([pair], new) <= curve[-1] + 1e-12
