from __future__ import annotations

from typing import Any

import numpy as np

from branchlab.errors import BadParams
from branchlab.generators.base import Family, FamilyBase, param_int
from branchlab.model.types import RawMilp


def barabasi_albert_edges(nodes: int, affinity: int, rng: np.random.Generator) -> list[tuple[int, int]]:
    """Preferential attachment grown from a clique on the first ``affinity`` nodes.

    Every later node attaches to ``affinity`` distinct earlier nodes drawn proportionally to degree,
    so the graph has affinity * (nodes - affinity) + affinity * (affinity - 1) / 2 edges.
    """

    edges: list[tuple[int, int]] = []
    degree = np.zeros(nodes, dtype=np.float64)
    for u in range(affinity):
        for v in range(u + 1, affinity):
            edges.append((u, v))
            degree[u] += 1
            degree[v] += 1
    for new in range(affinity, nodes):
        if new == affinity and degree[:new].sum() == 0:
            targets = np.arange(new)
        else:
            p = degree[:new] / degree[:new].sum()
            targets = np.sort(rng.choice(new, size=affinity, replace=False, p=p))
        for t in targets:
            edges.append((int(t), new))
            degree[t] += 1
            degree[new] += 1
    return edges


class IndependentSetBuilder(FamilyBase):
    """Maximum independent set on a Barabasi-Albert graph, one x_u + x_v <= 1 row per edge."""

    family = Family.MAXIMUM_INDEPENDENT_SET

    def presets(self) -> dict[str, dict[str, Any]]:
        return {
            "desk": {"nodes": 60, "affinity": 4},
            "full": {"nodes": 500, "affinity": 4},
        }

    def build(self, params: dict[str, Any], rng: np.random.Generator) -> RawMilp:
        nodes = param_int(params, "nodes", lo=2)
        affinity = param_int(params, "affinity")
        if affinity >= nodes:
            raise BadParams(f"affinity ({affinity}) must be smaller than nodes ({nodes})")

        edges = barabasi_albert_edges(nodes, affinity, rng)
        entries = [(r, q, 1.0) for r, (u, v) in enumerate(edges) for q in (u, v)]
        return RawMilp(
            name="",
            num_vars=nodes,
            objective=[1.0] * nodes,
            entries=entries,
            senses=["<="] * len(edges),
            rhs=[1.0] * len(edges),
            lower=[0.0] * nodes,
            upper=[1.0] * nodes,
            integer=list(range(nodes)),
            maximize=True,
        )
