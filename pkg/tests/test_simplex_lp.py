from __future__ import annotations

import itertools
import logging
from typing import Callable

import numpy as np
import pytest

from branchlab.milp import simplex
from branchlab.milp.simplex import lp_relax_solve
from branchlab.model.types import BoundDelta, DeltaKind, LpSolution, LpStatus, MilpInstance


def _dense_instance(a: np.ndarray, b: np.ndarray, c: np.ndarray, lo: np.ndarray, up: np.ndarray) -> MilpInstance:
    rows, cols = np.nonzero(a)
    return MilpInstance(
        name="lp",
        n=a.shape[1],
        m=a.shape[0],
        c=c,
        a_rows=rows,
        a_cols=cols,
        a_vals=a[rows, cols],
        b=b,
        lower=lo,
        upper=up,
        integer=(),
    )


def _vertex_oracle(a: np.ndarray, b: np.ndarray, c: np.ndarray, lo: np.ndarray, up: np.ndarray) -> float | None:
    """Best objective over every basic feasible point of {A x <= b, lo <= x <= up}."""

    n = a.shape[1]
    g = np.vstack([a, np.eye(n), -np.eye(n)])
    h = np.concatenate([b, up, -lo])
    combos = np.array(list(itertools.combinations(range(len(g)), n)))
    mats = g[combos]
    rhs = h[combos]
    ok = np.abs(np.linalg.det(mats)) > 1e-9
    xs = np.linalg.solve(mats[ok], rhs[ok][..., None])[..., 0]
    feasible = np.all(xs @ g.T <= h + 1e-7, axis=1)
    if not feasible.any():
        return None
    return float((xs[feasible] @ c).min())


def test_simplex_matches_vertex_enumeration_on_random_lps() -> None:
    rng = np.random.default_rng(7)
    for _ in range(50):
        a = rng.integers(-3, 6, size=(4, 6)).astype(float)
        b = rng.integers(0, 12, size=4).astype(float)
        c = rng.integers(-5, 6, size=6).astype(float)
        lo = np.zeros(6)
        up = rng.integers(1, 5, size=6).astype(float)
        inst = _dense_instance(a, b, c, lo, up)

        lp = lp_relax_solve(inst)
        expected = _vertex_oracle(a, b, c, lo, up)
        if expected is None:
            assert lp.status is LpStatus.INFEASIBLE
            continue
        assert lp.status is LpStatus.OPTIMAL
        assert abs(lp.objective - expected) <= 1e-6
        assert np.all(a @ lp.x <= b + 1e-6)
        assert np.all(lp.x >= lo - 1e-9) and np.all(lp.x <= up + 1e-9)


def test_negative_rhs_needs_phase_one() -> None:
    # x0 + x1 >= 2 written as -x0 - x1 <= -2
    a = np.array([[-1.0, -1.0]])
    inst = _dense_instance(a, np.array([-2.0]), np.array([1.0, 2.0]), np.zeros(2), np.array([3.0, 3.0]))
    lp = lp_relax_solve(inst)
    assert lp.status is LpStatus.OPTIMAL
    assert abs(lp.objective - 2.0) <= 1e-9
    assert np.allclose(lp.x, [2.0, 0.0])


def test_infeasible_rows_and_crossed_bounds() -> None:
    a = np.array([[1.0, 1.0]])
    inst = _dense_instance(a, np.array([-1.0]), np.array([1.0, 1.0]), np.zeros(2), np.ones(2))
    assert lp_relax_solve(inst).status is LpStatus.INFEASIBLE

    ok = _dense_instance(a, np.array([2.0]), np.array([1.0, 1.0]), np.zeros(2), np.ones(2))
    crossed = (BoundDelta(0, DeltaKind.LOWER_AT_LEAST, 1.0), BoundDelta(0, DeltaKind.UPPER_AT_MOST, 0.0))
    assert lp_relax_solve(ok, crossed).status is LpStatus.INFEASIBLE


def test_unbounded_direction_is_reported() -> None:
    a = np.array([[1.0, -1.0]])
    inst = _dense_instance(a, np.array([1.0]), np.array([-1.0, 0.0]), np.zeros(2), np.array([np.inf, np.inf]))
    assert lp_relax_solve(inst).status is LpStatus.UNBOUNDED


def test_iteration_limit_is_a_status_not_an_error() -> None:
    rng = np.random.default_rng(3)
    a = rng.integers(1, 6, size=(4, 6)).astype(float)
    inst = _dense_instance(a, np.full(4, 10.0), -np.ones(6), np.zeros(6), np.full(6, 5.0))
    assert lp_relax_solve(inst, iter_limit=0).status is LpStatus.ITERATION_LIMIT


def test_bound_deltas_tighten_the_relaxation(knap: MilpInstance) -> None:
    root = lp_relax_solve(knap)
    down = lp_relax_solve(knap, (BoundDelta(0, DeltaKind.UPPER_AT_MOST, 0.0),))
    assert root.status is LpStatus.OPTIMAL and down.status is LpStatus.OPTIMAL
    assert down.objective >= root.objective - 1e-9
    assert down.x[0] <= 1e-9


def _beale() -> MilpInstance:
    """Classic cycling example: Dantzig pricing with a naive leaving rule revisits the start basis."""
    a = np.array(
        [
            [0.25, -60.0, -0.04, 9.0],
            [0.5, -90.0, -0.02, 3.0],
            [0.0, 0.0, 1.0, 0.0],
        ]
    )
    c = np.array([-0.75, 150.0, -0.02, 6.0])
    return _dense_instance(a, np.array([0.0, 0.0, 1.0]), c, np.zeros(4), np.full(4, np.inf))


def _assert_kkt(inst: MilpInstance, lp: LpSolution, lo: np.ndarray, up: np.ndarray, tol: float = 1e-7) -> None:
    """Row duals are nonpositive and complementary; reduced costs c - A'y agree with the bound each x sits at."""
    a = np.asarray(inst.dense_a)
    y = lp.duals
    assert lp.x is not None and y is not None
    assert np.all(y <= tol)
    assert np.all(np.abs(y * (inst.b - a @ lp.x)) <= tol)
    r = inst.c - a.T @ y
    at_lo = np.abs(lp.x - lo) <= 1e-9
    at_up = np.abs(lp.x - up) <= 1e-9
    assert np.all(r[at_lo & ~at_up] >= -tol)
    assert np.all(r[at_up & ~at_lo] <= tol)
    assert np.all(np.abs(r[~at_lo & ~at_up]) <= tol)


def test_degenerate_cycling_lp_terminates_at_the_optimum() -> None:
    lp = lp_relax_solve(_beale(), iter_limit=200)
    assert lp.status is LpStatus.OPTIMAL
    assert lp.objective == pytest.approx(-0.05, abs=1e-12)
    assert np.allclose(lp.x, [0.04, 0.0, 1.0, 0.0], atol=1e-12)


def test_bland_pricing_reaches_the_same_optimum(
    monkeypatch: pytest.MonkeyPatch, caplog: pytest.LogCaptureFixture
) -> None:
    rng = np.random.default_rng(21)
    cases = [_beale()]
    for _ in range(30):
        a = rng.integers(-3, 6, size=(4, 6)).astype(float)
        cases.append(
            _dense_instance(
                a,
                rng.integers(0, 4, size=4).astype(float),
                rng.integers(-5, 6, size=6).astype(float),
                np.zeros(6),
                rng.integers(1, 5, size=6).astype(float),
            )
        )
    dantzig = [lp_relax_solve(inst, iter_limit=500) for inst in cases]

    monkeypatch.setattr(simplex, "BLAND_AFTER_FACTOR", 0)
    with caplog.at_level(logging.DEBUG, logger="branchlab.milp.simplex"):
        bland = [lp_relax_solve(inst, iter_limit=500) for inst in cases]
    assert "Bland" in caplog.text

    for d, b in zip(dantzig, bland):
        assert d.status is b.status
        if d.status is LpStatus.OPTIMAL:
            assert b.objective == pytest.approx(d.objective, abs=1e-9)


def test_optimal_basis_satisfies_dual_sign_and_reduced_cost_conditions() -> None:
    rng = np.random.default_rng(5)
    checked = 0
    for _ in range(60):
        a = rng.integers(-3, 6, size=(4, 6)).astype(float)
        b = rng.integers(-2, 12, size=4).astype(float)
        c = rng.integers(-5, 6, size=6).astype(float)
        lo = rng.integers(-2, 1, size=6).astype(float)
        up = lo + rng.integers(1, 5, size=6)
        inst = _dense_instance(a, b, c, lo, up)
        lp = lp_relax_solve(inst)
        if lp.status is not LpStatus.OPTIMAL:
            continue
        _assert_kkt(inst, lp, lo, up)
        checked += 1
    beale = _beale()
    _assert_kkt(beale, lp_relax_solve(beale), np.zeros(4), np.full(4, np.inf))
    assert checked >= 20


def test_tightening_never_improves_the_bound(make_tiny: Callable[..., MilpInstance]) -> None:
    rng = np.random.default_rng(11)
    for seed in range(60):
        inst = make_tiny(seed, n_int=5, n_cont=int(seed % 2), m=3)
        deltas: tuple[BoundDelta, ...] = ()
        prev = lp_relax_solve(inst)
        for _ in range(3):
            if prev.status is not LpStatus.OPTIMAL:
                break
            j = int(rng.integers(0, inst.n))
            lo, up = inst.local_bounds(deltas)
            v = float(rng.integers(int(lo[j]), int(up[j]) + 1))
            kind = DeltaKind.UPPER_AT_MOST if rng.random() < 0.5 else DeltaKind.LOWER_AT_LEAST
            deltas = deltas + (BoundDelta(j, kind, v),)
            cur = lp_relax_solve(inst, deltas)
            if cur.status is LpStatus.OPTIMAL:
                assert cur.objective >= prev.objective - 1e-9, (seed, deltas)
            else:
                assert cur.status is LpStatus.INFEASIBLE, (seed, deltas)
            prev = cur
