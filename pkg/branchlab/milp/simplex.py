"""Bounded-variable primal simplex on a dense tableau.

The LP handed in is ``min c.x  s.t.  A x <= b,  l' <= x <= u'`` where ``l'``/``u'`` are the
instance bounds tightened by branching deltas. Internally every variable is rewritten to live in
``[0, U]`` (``U`` possibly infinite): finite lower bounds are shifted out, upper-only variables are
mirrored, free variables are split. Rows get a slack; rows whose shifted right-hand side is
negative are negated and get an artificial for phase 1.

Pricing is Dantzig (largest reduced cost); after ``3 * (n + m)`` consecutive degenerate steps the
solve switches to Bland's rule for the rest of the run, which guarantees termination.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from branchlab.model.types import BoundDelta, LpSolution, LpStatus, MilpInstance
from branchlab.util.limits import DEFAULT_ITER_LIMIT, FEAS_TOL, PIVOT_TOL

log = logging.getLogger(__name__)

DUAL_TOL = 1e-9
_TIE_TOL = 1e-12
_MAX_REFRESH = 3
# consecutive degenerate pivots, per row and column, before pricing falls back to Bland's rule
BLAND_AFTER_FACTOR = 3


@dataclass
class _Columns:
    """Map from internal columns back to original variables: x_j = offset_j + sum(sign * x')."""

    var: np.ndarray
    sign: np.ndarray
    offset: np.ndarray
    upper: np.ndarray
    cost: np.ndarray
    matrix: np.ndarray
    rhs: np.ndarray


def _standardize(a: np.ndarray, b: np.ndarray, c: np.ndarray, lo: np.ndarray, up: np.ndarray) -> _Columns:
    var: list[int] = []
    sign: list[float] = []
    upper: list[float] = []
    cols: list[np.ndarray] = []
    offset = np.zeros(len(c))
    for j in range(len(c)):
        if np.isfinite(lo[j]):
            offset[j] = lo[j]
            var.append(j)
            sign.append(1.0)
            upper.append(up[j] - lo[j] if np.isfinite(up[j]) else np.inf)
        elif np.isfinite(up[j]):
            offset[j] = up[j]
            var.append(j)
            sign.append(-1.0)
            upper.append(np.inf)
        else:
            var.extend((j, j))
            sign.extend((1.0, -1.0))
            upper.extend((np.inf, np.inf))
    v = np.array(var, dtype=np.int64)
    s = np.array(sign)
    for j, sg in zip(v, s):
        cols.append(sg * a[:, j])
    matrix = np.stack(cols, axis=1) if cols else np.zeros((a.shape[0], 0))
    return _Columns(
        var=v,
        sign=s,
        offset=offset,
        upper=np.array(upper, dtype=np.float64),
        cost=s * c[v],
        matrix=matrix,
        rhs=b - a @ offset,
    )


class _Tableau:
    def __init__(self, m_full: np.ndarray, rhs: np.ndarray, upper: np.ndarray, basis: np.ndarray) -> None:
        self.m_full = m_full
        self.rhs = rhs
        self.upper = upper.copy()
        self.T = m_full.copy()
        self.basis = basis.copy()
        n_cols = m_full.shape[1]
        self.is_basic = np.zeros(n_cols, dtype=bool)
        self.is_basic[self.basis] = True
        self.at_upper = np.zeros(n_cols, dtype=bool)
        self.beta = rhs.copy()
        self.d = np.zeros(n_cols)
        self.cost = np.zeros(n_cols)
        self.iterations = 0
        self.degenerate_run = 0
        self.bland = False

    def set_cost(self, cost: np.ndarray) -> None:
        self.cost = cost
        self.d = cost - cost[self.basis] @ self.T

    def nonbasic_values(self) -> np.ndarray:
        xn = np.where(self.at_upper, self.upper, 0.0)
        xn[self.is_basic] = 0.0
        return np.where(np.isfinite(xn), xn, 0.0)

    def refresh(self) -> None:
        """Recompute tableau, basic values and reduced costs from the basis matrix."""
        if len(self.basis) == 0:
            self.d = self.cost.copy()
            return
        bmat = self.m_full[:, self.basis]
        try:
            self.T = np.linalg.solve(bmat, self.m_full)
            xn = self.nonbasic_values()
            self.beta = np.linalg.solve(bmat, self.rhs - self.m_full @ xn)
        except np.linalg.LinAlgError:
            log.debug("basis refresh skipped: singular basis matrix")
            return
        self.T[:, self.basis] = np.eye(len(self.basis))
        self.d = self.cost - self.cost[self.basis] @ self.T
        self.d[self.basis] = 0.0

    def entering(self) -> tuple[int, float] | None:
        nb = ~self.is_basic
        inc = nb & ~self.at_upper & (self.d < -DUAL_TOL) & (self.upper > 0.0)
        dec = nb & self.at_upper & (self.d > DUAL_TOL) & (self.upper > 0.0)
        eligible = inc | dec
        if not eligible.any():
            return None
        idx = np.flatnonzero(eligible)
        if self.bland:
            j = int(idx[0])
        else:
            j = int(idx[np.argmax(np.abs(self.d[idx]))])
        return j, (1.0 if inc[j] else -1.0)

    def step(self, j: int, direction: float) -> str:
        alpha = direction * self.T[:, j]
        ub = self.upper[self.basis]
        dec = alpha > PIVOT_TOL
        inc = (alpha < -PIVOT_TOL) & np.isfinite(ub)
        ratios = np.full(len(self.basis), np.inf)
        ratios[dec] = np.maximum(self.beta[dec], 0.0) / alpha[dec]
        ratios[inc] = np.maximum(ub[inc] - self.beta[inc], 0.0) / (-alpha[inc])
        t_ratio = float(ratios.min()) if len(ratios) else np.inf
        t_flip = float(self.upper[j])
        if not np.isfinite(t_ratio) and not np.isfinite(t_flip):
            return "unbounded"

        self.iterations += 1
        t = min(t_ratio, t_flip)
        self.degenerate_run = self.degenerate_run + 1 if t <= PIVOT_TOL else 0

        if t_flip <= t_ratio:
            # bound flip: entering variable runs to its other bound, basis unchanged
            self.beta -= t * alpha
            self.at_upper[j] = not self.at_upper[j]
            return "ok"

        tied = np.flatnonzero(ratios <= t_ratio + _TIE_TOL)
        if self.bland:
            leave_row = int(tied[np.argmin(self.basis[tied])])
        else:
            # most stable pivot among ties, then smallest variable index
            order = np.lexsort((self.basis[tied], -np.abs(alpha[tied])))
            leave_row = int(tied[order[0]])
        leave_to_upper = bool(inc[leave_row])

        entering_value = (self.upper[j] if self.at_upper[j] else 0.0) + direction * t
        self.beta -= t * alpha
        leaving = int(self.basis[leave_row])
        self.is_basic[leaving] = False
        self.at_upper[leaving] = leave_to_upper and self.upper[leaving] > 0.0
        self.is_basic[j] = True
        self.at_upper[j] = False
        self.basis[leave_row] = j
        self.beta[leave_row] = entering_value

        row = self.T[leave_row] / self.T[leave_row, j]
        self.T[leave_row] = row
        col = self.T[:, j].copy()
        col[leave_row] = 0.0
        self.T -= np.outer(col, row)
        self.T[:, j] = 0.0
        self.T[leave_row, j] = 1.0
        self.d -= self.d[j] * row
        self.d[j] = 0.0
        return "ok"

    def run(self, iter_limit: int, bland_after: int) -> str:
        refreshes = 0
        while True:
            choice = self.entering()
            if choice is None:
                if refreshes >= _MAX_REFRESH:
                    return "optimal"
                refreshes += 1
                self.refresh()
                if self.entering() is None:
                    return "optimal"
                continue
            if self.iterations >= iter_limit:
                return "limit"
            outcome = self.step(*choice)
            if outcome != "ok":
                return outcome
            if not self.bland and self.degenerate_run >= bland_after:
                self.bland = True
                log.debug("switching to Bland's rule after %d degenerate pivots", self.degenerate_run)

    def values(self) -> np.ndarray:
        x = self.nonbasic_values()
        x[self.basis] = self.beta
        return x


def lp_relax_solve(
    inst: MilpInstance,
    deltas: Sequence[BoundDelta] = (),
    iter_limit: int = DEFAULT_ITER_LIMIT,
) -> LpSolution:
    """Solve the LP relaxation of ``inst`` with bounds tightened by ``deltas``."""

    lo, up = inst.local_bounds(deltas)
    if np.any(lo > up):
        return LpSolution(status=LpStatus.INFEASIBLE)

    cols = _standardize(inst.dense_a, inst.b, inst.c, lo, up)
    m = inst.m
    ns = len(cols.var)

    neg = cols.rhs < 0.0
    n_art = int(neg.sum())
    row_sign = np.where(neg, -1.0, 1.0)
    m_full = np.zeros((m, ns + m + n_art))
    m_full[:, :ns] = cols.matrix * row_sign[:, None]
    m_full[:, ns : ns + m] = np.diag(row_sign)
    art_rows = np.flatnonzero(neg)
    for k, i in enumerate(art_rows):
        m_full[i, ns + m + k] = 1.0
    rhs = cols.rhs * row_sign

    basis = np.arange(ns, ns + m, dtype=np.int64)
    basis[art_rows] = ns + m + np.arange(n_art)
    upper = np.concatenate([cols.upper, np.full(m + n_art, np.inf)])

    tab = _Tableau(m_full, rhs, upper, basis)
    bland_after = BLAND_AFTER_FACTOR * (inst.n + inst.m)

    if n_art:
        phase1 = np.zeros(m_full.shape[1])
        phase1[ns + m :] = 1.0
        tab.set_cost(phase1)
        outcome = tab.run(iter_limit, bland_after)
        if outcome == "limit":
            return LpSolution(status=LpStatus.ITERATION_LIMIT, iterations=tab.iterations)
        infeas = float(tab.values()[ns + m :].sum())
        if infeas > FEAS_TOL:
            return LpSolution(status=LpStatus.INFEASIBLE, iterations=tab.iterations)
        # artificials are pinned at zero for phase 2
        tab.upper[ns + m :] = 0.0
        tab.at_upper[ns + m :] = False

    phase2 = np.zeros(m_full.shape[1])
    phase2[:ns] = cols.cost
    tab.set_cost(phase2)
    outcome = tab.run(iter_limit, bland_after)
    if outcome == "limit":
        return LpSolution(status=LpStatus.ITERATION_LIMIT, iterations=tab.iterations)
    if outcome == "unbounded":
        return LpSolution(status=LpStatus.UNBOUNDED, iterations=tab.iterations)

    xi = tab.values()
    x = cols.offset.copy()
    np.add.at(x, cols.var, cols.sign * xi[:ns])
    x = np.clip(x, lo, up)
    duals = -tab.d[ns : ns + m].copy()
    return LpSolution(
        status=LpStatus.OPTIMAL,
        x=x,
        objective=float(inst.c @ x),
        duals=duals,
        iterations=tab.iterations,
    )
