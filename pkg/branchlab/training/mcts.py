from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal, Protocol, Sequence

import numpy as np

from branchlab.errors import ActionNotMasked, EmptyMask
from branchlab.gnn.network import gcnn_forward
from branchlab.gnn.params import GcnnParams
from branchlab.gnn.state import X_AT_LB, X_AT_UB, X_FRAC, X_VALUE, BipartiteState

Side = Literal["left", "right"]


class Evaluator(Protocol):
    def __call__(self, state: BipartiteState) -> tuple[np.ndarray, float]:
        """Policy over all variables and the state value."""
        ...


class GcnnEvaluator:
    def __init__(self, params: GcnnParams) -> None:
        self.params = params

    def __call__(self, state: BipartiteState) -> tuple[np.ndarray, float]:
        pi, v, _ = gcnn_forward(state, self.params)
        return pi, v


@dataclass(frozen=True)
class MctsConfig:
    k: int = 10
    max_depth: int = 3
    n_sims: int = 1000
    c_explore: float = 2.0
    gamma: float = 0.99

    def to_dict(self) -> dict[str, float | int]:
        return {
            "k": self.k,
            "max_depth": self.max_depth,
            "n_sims": self.n_sims,
            "c_explore": self.c_explore,
            "gamma": self.gamma,
        }


@dataclass(eq=False)
class MctsNode:
    state: BipartiteState
    depth: int
    value: float
    actions: tuple[int, ...] = ()
    prior: dict[int, float] = field(default_factory=dict)
    q: dict[int, float] = field(default_factory=dict)
    n: dict[int, int] = field(default_factory=dict)
    children: dict[tuple[int, Side], "MctsNode"] = field(default_factory=dict)

    @property
    def visits(self) -> int:
        """Visits beyond the one counted at initialization of each action."""
        return sum(self.n.values()) - len(self.actions)

    def best_action(self) -> int:
        if not self.actions:
            raise EmptyMask("node has no actions")
        return max(self.actions, key=lambda a: (self.q[a], -a))


@dataclass(eq=False)
class MctsStats:
    root: MctsNode
    config: MctsConfig
    nodes: list[MctsNode] = field(default_factory=list)
    simulations: int = 0

    def qualifying(self, visit_threshold: int) -> list[MctsNode]:
        return [nd for nd in self.nodes if nd.actions and nd.visits >= visit_threshold]


def draw_side(rng: np.random.Generator) -> Side:
    return "left" if rng.random() < 0.5 else "right"


def simulate_transition(state: BipartiteState, action: int, side: Side) -> BipartiteState:
    """Feature-space stand-in for a branching step; no LP is solved.

    The acted variable becomes integral at floor (left) or ceil (right) of its LP value and leaves
    the candidate set. Every other row is untouched.
    """

    if not (0 <= action < state.n) or not state.mask[action]:
        raise ActionNotMasked(f"variable {action} is not a candidate")
    x = state.x.copy()
    v = x[action, X_VALUE]
    x[action, X_VALUE] = math.floor(v) if side == "left" else math.ceil(v)
    x[action, X_FRAC] = 0.0
    x[action, X_AT_LB if side == "left" else X_AT_UB] = 1.0
    mask = state.mask.copy()
    mask[action] = False
    return state.replace(x=x, mask=mask)


def ucb_select(node: MctsNode, c_explore: float) -> int:
    """argmax Q + c * prior * sqrt(log(1 + sum N) / (N + 1)); ties go to the smallest action."""

    total = sum(node.n[a] for a in node.actions)
    best_a = -1
    best = -math.inf
    for a in sorted(node.actions):
        score = node.q[a] + c_explore * node.prior[a] * math.sqrt(math.log(1 + total) / (node.n[a] + 1))
        if score > best:
            best_a, best = a, score
    return best_a


def mcts_backup(path: Sequence[tuple[MctsNode, int]], values: Sequence[float], gamma: float) -> None:
    """Apply Q <- Q + (G - Q) / (N + 1), N <- N + 1 along ``path``.

    ``values[t]`` is the value of the state reached by step t; the return from step tau is
    sum over t >= tau of gamma**(t - tau) * values[t] (rewards are zero inside the search).
    """

    if len(path) != len(values):
        raise ValueError("path and values differ in length")
    g = 0.0
    for (node, a), v in zip(reversed(path), reversed(values)):
        g = float(v) + gamma * g
        node.q[a] = node.q[a] + (g - node.q[a]) / (node.n[a] + 1)
        node.n[a] += 1


class _Search:
    def __init__(self, evaluator: Evaluator, config: MctsConfig, rng: np.random.Generator) -> None:
        self.evaluator = evaluator
        self.config = config
        self.rng = rng
        self.nodes: list[MctsNode] = []

    def value(self, state: BipartiteState) -> float:
        if not state.mask.any():
            return 0.0
        return float(self.evaluator(state)[1])

    def make_node(self, state: BipartiteState, depth: int) -> MctsNode:
        cfg = self.config
        if not state.mask.any():
            node = MctsNode(state=state, depth=depth, value=0.0)
            self.nodes.append(node)
            return node
        pi, v = self.evaluator(state)
        node = MctsNode(state=state, depth=depth, value=float(v))
        self.nodes.append(node)
        # the root is always initialized so that max_depth == 0 still ranks its actions
        if depth > 0 and depth >= cfg.max_depth:
            return node
        cands = np.flatnonzero(state.mask).tolist()
        top = sorted(cands, key=lambda a: (-pi[a], a))[: cfg.k]
        node.actions = tuple(sorted(int(a) for a in top))
        for a in node.actions:
            nxt = simulate_transition(state, a, draw_side(self.rng))
            node.prior[a] = float(pi[a])
            node.q[a] = cfg.gamma * self.value(nxt)
            node.n[a] = 1
        return node

    def simulate(self, root: MctsNode) -> None:
        node = root
        path: list[tuple[MctsNode, int]] = []
        values: list[float] = []
        while node.actions and node.depth < self.config.max_depth:
            a = ucb_select(node, self.config.c_explore)
            side = draw_side(self.rng)
            child = node.children.get((a, side))
            if child is None:
                child = self.make_node(simulate_transition(node.state, a, side), node.depth + 1)
                node.children[(a, side)] = child
            path.append((node, a))
            values.append(child.value)
            node = child
        if path:
            mcts_backup(path, values, self.config.gamma)


def mcts_search(
    root: BipartiteState,
    model: GcnnParams | Evaluator,
    config: MctsConfig | None = None,
    rng: np.random.Generator | None = None,
) -> tuple[MctsStats, int]:
    """Policy-guided tree search over simulated transitions; returns the stats and the best root action."""

    if not root.mask.any():
        raise EmptyMask("root state has no candidates")
    config = config or MctsConfig()
    rng = rng if rng is not None else np.random.default_rng(0)
    evaluator: Evaluator = GcnnEvaluator(model) if isinstance(model, GcnnParams) else model
    search = _Search(evaluator, config, rng)
    root_node = search.make_node(root, 0)
    for _ in range(config.n_sims):
        search.simulate(root_node)
    stats = MctsStats(root=root_node, config=config, nodes=search.nodes, simulations=config.n_sims)
    return stats, root_node.best_action()
