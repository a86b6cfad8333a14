from __future__ import annotations

from typing import Callable

import numpy as np
import pytest

from branchlab.milp.normalize import normalize_instance
from branchlab.model.types import MilpInstance, RawMilp


def tiny_milp(
    rng: np.random.Generator, *, n_int: int = 4, n_cont: int = 0, m: int = 3, name: str = "tiny"
) -> MilpInstance:
    """Random small MILP with integer data, integer vars in [0, 3] and continuous vars in [0, 2]."""

    n = n_int + n_cont
    entries = []
    for r in range(m):
        for q in range(n):
            if rng.random() < 0.7:
                v = int(rng.integers(1, 6))
                entries.append((r, q, float(v)))
    rhs = [float(rng.integers(3, 10)) for _ in range(m)]
    raw = RawMilp(
        name=name,
        num_vars=n,
        objective=[float(-rng.integers(1, 10)) for _ in range(n)],
        entries=entries,
        senses=["<="] * m,
        rhs=rhs,
        lower=[0.0] * n,
        upper=[3.0] * n_int + [2.0] * n_cont,
        integer=list(range(n_int)),
    )
    return normalize_instance(raw)


def knapsack() -> MilpInstance:
    """max 5x0 + 4x1 + 3x2 s.t. 2x0 + 3x1 + x2 <= 5, 4x0 + x1 + 2x2 <= 11, 3x0 + 4x1 + 2x2 <= 8; x binary."""

    raw = RawMilp(
        name="knap",
        num_vars=3,
        objective=[5.0, 4.0, 3.0],
        entries=[
            (0, 0, 2.0), (0, 1, 3.0), (0, 2, 1.0),
            (1, 0, 4.0), (1, 1, 1.0), (1, 2, 2.0),
            (2, 0, 3.0), (2, 1, 4.0), (2, 2, 2.0),
        ],
        senses=["<=", "<=", "<="],
        rhs=[5.0, 11.0, 8.0],
        lower=[0.0, 0.0, 0.0],
        upper=[1.0, 1.0, 1.0],
        integer=[0, 1, 2],
        maximize=True,
    )
    return normalize_instance(raw)


@pytest.fixture
def make_tiny() -> Callable[..., MilpInstance]:
    def _make(seed: int, **kw: int) -> MilpInstance:
        return tiny_milp(np.random.default_rng(seed), name=f"tiny-{seed}", **kw)

    return _make


@pytest.fixture
def knap() -> MilpInstance:
    return knapsack()
