from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import numpy as np

from branchlab.bnb.node import BnbNode
from branchlab.errors import SchemaError
from branchlab.model.types import MilpInstance
from branchlab.util.limits import FEAS_TOL, FEATURE_CLIP

D_X = 8
D_C = 4
D_E = 1

# variable feature columns
X_COST, X_HAS_LB, X_HAS_UB, X_INTEGER, X_VALUE, X_FRAC, X_AT_LB, X_AT_UB = range(D_X)
# constraint feature columns
C_RHS, C_SLACK, C_DUAL, C_COS = range(D_C)


@dataclass(frozen=True, eq=False)
class BipartiteState:
    """Variables and constraints as two node sets, nonzeros of A as edges, plus the candidate mask."""

    x: np.ndarray  # (n, D_X)
    c: np.ndarray  # (m, D_C)
    edge_rows: np.ndarray  # (nnz,)
    edge_cols: np.ndarray  # (nnz,)
    e: np.ndarray  # (nnz, D_E)
    mask: np.ndarray  # (n,) bool

    @property
    def n(self) -> int:
        return int(self.x.shape[0])

    @property
    def m(self) -> int:
        return int(self.c.shape[0])

    @property
    def candidates(self) -> tuple[int, ...]:
        return tuple(int(i) for i in np.flatnonzero(self.mask))

    def replace(self, *, x: np.ndarray | None = None, mask: np.ndarray | None = None) -> "BipartiteState":
        return BipartiteState(
            x=self.x if x is None else x,
            c=self.c,
            edge_rows=self.edge_rows,
            edge_cols=self.edge_cols,
            e=self.e,
            mask=self.mask if mask is None else mask,
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "x": self.x.tolist(),
            "c": self.c.tolist(),
            "edges": [[int(r), int(q)] for r, q in zip(self.edge_rows, self.edge_cols)],
            "e": self.e.tolist(),
            "mask": [int(v) for v in np.flatnonzero(self.mask)],
        }

    @staticmethod
    def from_dict(d: dict[str, Any]) -> "BipartiteState":
        try:
            x = np.asarray(d["x"], dtype=np.float64).reshape(-1, D_X)
            c = np.asarray(d["c"], dtype=np.float64).reshape(-1, D_C)
            edges = np.asarray(d["edges"], dtype=np.int64).reshape(-1, 2)
            e = np.asarray(d["e"], dtype=np.float64).reshape(-1, D_E)
            mask = np.zeros(x.shape[0], dtype=bool)
            mask[np.asarray(d["mask"], dtype=np.int64)] = True
        except (KeyError, ValueError, IndexError, TypeError) as err:
            raise SchemaError(f"bad state record: {err}", field="state") from err
        if len(e) != len(edges):
            raise SchemaError("edge features and edges differ in length", field="state")
        return BipartiteState(x=x, c=c, edge_rows=edges[:, 0].copy(), edge_cols=edges[:, 1].copy(), e=e, mask=mask)


def extract_state(node: BnbNode, inst: MilpInstance) -> BipartiteState:
    """Feature view of an LP-optimal node.

    Variables: scaled cost, finite-bound flags, integrality, clipped LP value, fractionality and
    at-bound flags. Constraints: scaled rhs, scaled slack, clipped dual and cosine with c. Edges: the
    coefficient scaled by its row norm.
    """

    lp = node.lp
    if not lp.optimal or lp.x is None:
        raise ValueError(f"node {node.id} has no optimal LP solution")
    xs = np.asarray(lp.x, dtype=np.float64)
    lo, up = inst.local_bounds(node.deltas)
    n, m = inst.n, inst.m

    cnorm = float(np.linalg.norm(inst.c))
    has_lb = np.isfinite(lo)
    has_ub = np.isfinite(up)

    X = np.zeros((n, D_X), dtype=np.float64)
    X[:, X_COST] = inst.c / (1.0 + cnorm)
    X[:, X_HAS_LB] = has_lb
    X[:, X_HAS_UB] = has_ub
    X[:, X_INTEGER] = inst.is_integer
    X[:, X_VALUE] = np.clip(xs, -FEATURE_CLIP, FEATURE_CLIP)
    X[:, X_FRAC] = np.where(inst.is_integer, np.abs(xs - np.round(xs)), 0.0)
    X[:, X_AT_LB] = has_lb & (np.abs(xs - np.where(has_lb, lo, 0.0)) <= FEAS_TOL)
    X[:, X_AT_UB] = has_ub & (np.abs(xs - np.where(has_ub, up, 0.0)) <= FEAS_TOL)

    a = inst.dense_a
    rnorm = np.linalg.norm(a, axis=1) if m else np.zeros(0)
    C = np.zeros((m, D_C), dtype=np.float64)
    if m:
        C[:, C_RHS] = inst.b / (1.0 + rnorm)
        C[:, C_SLACK] = np.clip((inst.b - a @ xs) / (1.0 + np.abs(inst.b)), -FEATURE_CLIP, FEATURE_CLIP)
        duals = lp.duals if lp.duals is not None else np.zeros(m)
        C[:, C_DUAL] = np.clip(duals, -FEATURE_CLIP, FEATURE_CLIP)
        denom = rnorm * cnorm
        C[:, C_COS] = np.divide(a @ inst.c, denom, out=np.zeros(m), where=denom > 0)

    rows = np.asarray(inst.a_rows, dtype=np.int64)
    cols = np.asarray(inst.a_cols, dtype=np.int64)
    E = (inst.a_vals / (1.0 + rnorm[rows]) if len(rows) else np.zeros(0)).reshape(-1, D_E)

    mask = np.zeros(n, dtype=bool)
    mask[list(node.candidates)] = True
    return BipartiteState(x=X, c=C, edge_rows=rows.copy(), edge_cols=cols.copy(), e=E, mask=mask)
