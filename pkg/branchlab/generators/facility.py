from __future__ import annotations

from typing import Any

import numpy as np

from branchlab.generators.base import Family, FamilyBase, param_float, param_int
from branchlab.model.types import RawMilp


class FacilityLocationBuilder(FamilyBase):
    """Cornuejols-style capacitated facility location.

    Customers and facilities sit uniformly on the unit square; serving customer i from facility j
    costs 10 * distance * demand_i. Demands are U{5..35}, raw capacities U{10..160}, fixed costs
    U(0, 90) + U(100, 110) * sqrt(capacity). Capacities are rescaled so that total capacity is
    ``capacity_ratio`` times total demand.

    Variables: x[i, j] (continuous, [0, 1]) at ``i * facilities + j``, then y[j] (binary).
    Rows: demand, capacity, one total-capacity row, then the x[i, j] <= y[j] links.
    """

    family = Family.CAPACITATED_FACILITY_LOCATION

    def presets(self) -> dict[str, dict[str, Any]]:
        return {
            "desk": {"facilities": 15, "customers": 15, "capacity_ratio": 5.0},
            "full": {"facilities": 100, "customers": 100, "capacity_ratio": 5.0},
        }

    def build(self, params: dict[str, Any], rng: np.random.Generator) -> RawMilp:
        nf = param_int(params, "facilities")
        nc = param_int(params, "customers")
        ratio = param_float(params, "capacity_ratio", 1.0, 1e6)

        f_xy = rng.random((nf, 2))
        c_xy = rng.random((nc, 2))
        demand = rng.integers(5, 36, size=nc).astype(np.float64)
        capacity = rng.integers(10, 161, size=nf).astype(np.float64)
        fixed = rng.uniform(0.0, 90.0, size=nf) + rng.uniform(100.0, 110.0, size=nf) * np.sqrt(capacity)
        capacity = np.ceil(capacity * ratio * demand.sum() / capacity.sum())

        dist = np.linalg.norm(c_xy[:, None, :] - f_xy[None, :, :], axis=2)
        trans = 10.0 * dist * demand[:, None]

        n = nc * nf + nf

        def x(i: int, j: int) -> int:
            return i * nf + j

        def y(j: int) -> int:
            return nc * nf + j

        entries: list[tuple[int, int, float]] = []
        senses: list[str] = []
        rhs: list[float] = []

        def row(coeffs: list[tuple[int, float]], sense: str, b: float) -> None:
            r = len(senses)
            entries.extend((r, q, v) for q, v in coeffs)
            senses.append(sense)
            rhs.append(b)

        for i in range(nc):
            row([(x(i, j), 1.0) for j in range(nf)], ">=", 1.0)
        for j in range(nf):
            row([(x(i, j), float(demand[i])) for i in range(nc)] + [(y(j), -float(capacity[j]))], "<=", 0.0)
        row([(y(j), float(capacity[j])) for j in range(nf)], ">=", float(demand.sum()))
        for i in range(nc):
            for j in range(nf):
                row([(x(i, j), 1.0), (y(j), -1.0)], "<=", 0.0)

        objective = [float(v) for v in trans.reshape(-1)] + [float(v) for v in fixed]
        return RawMilp(
            name="",
            num_vars=n,
            objective=objective,
            entries=entries,
            senses=senses,  # type: ignore[arg-type]
            rhs=rhs,
            lower=[0.0] * n,
            upper=[1.0] * n,
            integer=list(range(nc * nf, n)),
        )
