from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from branchlab.errors import BoxTooLarge
from branchlab.milp.simplex import lp_relax_solve
from branchlab.model.types import BoundDelta, DeltaKind, MilpInstance
from branchlab.util.limits import DEFAULT_BOX_LIMIT, FEAS_TOL


@dataclass(frozen=True, eq=False)
class BruteForceResult:
    feasible: bool
    objective: float = float("inf")
    x: np.ndarray | None = None


def integer_box(inst: MilpInstance) -> list[range]:
    ranges: list[range] = []
    for i in inst.integer:
        lo, up = inst.lower[i], inst.upper[i]
        if not (math.isfinite(lo) and math.isfinite(up)):
            raise BoxTooLarge(box=math.inf, limit=0)  # type: ignore[arg-type]
        ranges.append(range(math.ceil(lo - FEAS_TOL), math.floor(up + FEAS_TOL) + 1))
    return ranges


def brute_force_solve(inst: MilpInstance, box_limit: int = DEFAULT_BOX_LIMIT) -> BruteForceResult:
    """Exact optimum by enumerating every integer assignment (test oracle).

    Pure-integer instances are checked row by row; with continuous variables each assignment
    solves the residual LP. Ties keep the first assignment in lexicographic order.
    """

    ranges = integer_box(inst)
    box = math.prod(len(r) for r in ranges)
    if box > box_limit:
        raise BoxTooLarge(box=box, limit=box_limit)

    integer = list(inst.integer)
    pure = len(integer) == inst.n
    a = inst.dense_a
    best = BruteForceResult(feasible=False)

    for assignment in itertools.product(*ranges):
        if pure:
            x = np.array(assignment, dtype=np.float64)
            if inst.m and np.any(a @ x > inst.b + FEAS_TOL):
                continue
            z = float(inst.c @ x)
        else:
            deltas = []
            for i, v in zip(integer, assignment):
                deltas.append(BoundDelta(i, DeltaKind.UPPER_AT_MOST, float(v)))
                deltas.append(BoundDelta(i, DeltaKind.LOWER_AT_LEAST, float(v)))
            lp = lp_relax_solve(inst, deltas)
            if not lp.optimal:
                continue
            x, z = lp.x, lp.objective
        if not best.feasible or z < best.objective:
            best = BruteForceResult(feasible=True, objective=z, x=x)
    return best
