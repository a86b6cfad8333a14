from __future__ import annotations

from typing import Any

import numpy as np

from branchlab.generators.base import Family, FamilyBase, param_float, param_int
from branchlab.model.types import RawMilp


class SetCoveringBuilder(FamilyBase):
    """Balas-Ho style set covering: min c.x, every row covered at least once, x binary.

    Each (row, column) pair is a nonzero with probability ``density``. Empty columns get one random
    row; rows with fewer than two covering columns get random extra columns.
    """

    family = Family.SET_COVERING

    def presets(self) -> dict[str, dict[str, Any]]:
        return {
            "desk": {"rows": 100, "cols": 200, "density": 0.05, "max_cost": 100},
            "full": {"rows": 500, "cols": 1000, "density": 0.05, "max_cost": 100},
        }

    def build(self, params: dict[str, Any], rng: np.random.Generator) -> RawMilp:
        rows = param_int(params, "rows")
        cols = param_int(params, "cols", lo=2)
        density = param_float(params, "density", 0.0, 1.0, lo_open=True)
        max_cost = param_int(params, "max_cost")

        cover = rng.random((rows, cols)) < density
        for j in np.flatnonzero(~cover.any(axis=0)):
            cover[rng.integers(rows), j] = True
        for i in range(rows):
            short = 2 - int(cover[i].sum())
            if short > 0:
                free = np.flatnonzero(~cover[i])
                cover[i, rng.choice(free, size=short, replace=False)] = True

        cost = rng.integers(1, max_cost + 1, size=cols)
        r_idx, c_idx = np.nonzero(cover)
        return RawMilp(
            name="",
            num_vars=cols,
            objective=[float(v) for v in cost],
            entries=[(int(r), int(q), 1.0) for r, q in zip(r_idx, c_idx)],
            senses=[">="] * rows,
            rhs=[1.0] * rows,
            lower=[0.0] * cols,
            upper=[1.0] * cols,
            integer=list(range(cols)),
        )
