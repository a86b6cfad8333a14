from __future__ import annotations

from typing import Sequence

import numpy as np

from branchlab.util.limits import INT_TOL


def fractional_candidates(x: np.ndarray, integer: Sequence[int], int_tol: float = INT_TOL) -> tuple[int, ...]:
    """Integer variables whose LP value is further than ``int_tol`` from the nearest integer."""

    if not integer:
        return ()
    idx = np.asarray(integer, dtype=np.int64)
    vals = np.asarray(x, dtype=np.float64)[idx]
    frac = np.abs(vals - np.round(vals))
    return tuple(int(i) for i in np.sort(idx[frac > int_tol]))


def is_integral(x: np.ndarray, integer: Sequence[int], int_tol: float = INT_TOL) -> bool:
    return not fractional_candidates(x, integer, int_tol)
