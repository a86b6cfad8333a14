from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Any, Iterable, Literal, Sequence

import numpy as np

from branchlab.errors import MalformedInstance

Sense = Literal["<=", ">=", "="]


def encode_bound(v: float) -> float | str:
    if v == np.inf:
        return "inf"
    if v == -np.inf:
        return "-inf"
    return float(v)


def decode_bound(v: float | str) -> float:
    if isinstance(v, str):
        s = v.strip().lower()
        if s in {"inf", "+inf"}:
            return float("inf")
        if s == "-inf":
            return float("-inf")
        raise ValueError(f"not a bound: {v!r}")
    return float(v)


def _frozen_array(values: Iterable[float] | np.ndarray, dtype: Any = np.float64) -> np.ndarray:
    arr = np.array(values, dtype=dtype).reshape(-1)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class RawMilp:
    """A general-form MILP as produced by the family builders.

    Rows may have any sense, the objective may maximize, bounds may be infinite. Nothing is
    validated here; ``normalize_instance`` does that.
    """

    name: str
    num_vars: int
    objective: Sequence[float]
    entries: Sequence[tuple[int, int, float]]
    senses: Sequence[Sense]
    rhs: Sequence[float]
    lower: Sequence[float]
    upper: Sequence[float]
    integer: Sequence[int]
    maximize: bool = False

    family: str = ""
    seed: int = 0
    rng: str = ""

    @property
    def num_rows(self) -> int:
        return len(self.senses)


@dataclass(frozen=True, eq=False)
class MilpInstance:
    """Canonical minimisation MILP: min c.x  s.t.  A x <= b,  l <= x <= u,  x_i integral for i in I.

    A is stored sparse and row-major as three parallel arrays. ``sense_flipped`` records that the
    source objective maximised, so reported objectives can be turned back with ``original_objective``.
    """

    name: str
    n: int
    m: int
    c: np.ndarray
    a_rows: np.ndarray
    a_cols: np.ndarray
    a_vals: np.ndarray
    b: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    integer: tuple[int, ...]
    sense_flipped: bool = False
    family: str = ""
    seed: int = 0
    rng: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "c", _frozen_array(self.c))
        object.__setattr__(self, "a_rows", _frozen_array(self.a_rows, np.int64))
        object.__setattr__(self, "a_cols", _frozen_array(self.a_cols, np.int64))
        object.__setattr__(self, "a_vals", _frozen_array(self.a_vals))
        object.__setattr__(self, "b", _frozen_array(self.b))
        object.__setattr__(self, "lower", _frozen_array(self.lower))
        object.__setattr__(self, "upper", _frozen_array(self.upper))
        object.__setattr__(self, "integer", tuple(int(i) for i in self.integer))
        self._check()

    def _check(self) -> None:
        n, m = int(self.n), int(self.m)
        if n <= 0:
            raise MalformedInstance("instance has no variables")
        if m < 0:
            raise MalformedInstance("negative row count")
        for name, arr, size in (
            ("c", self.c, n),
            ("b", self.b, m),
            ("l", self.lower, n),
            ("u", self.upper, n),
        ):
            if arr.shape[0] != size:
                raise MalformedInstance(f"{name} has length {arr.shape[0]}, expected {size}")
        if not (len(self.a_rows) == len(self.a_cols) == len(self.a_vals)):
            raise MalformedInstance("sparse arrays differ in length")
        if len(self.a_rows):
            if self.a_rows.min() < 0 or self.a_rows.max() >= m:
                raise MalformedInstance("sparse entry row out of range")
            if self.a_cols.min() < 0 or self.a_cols.max() >= n:
                raise MalformedInstance("sparse entry col out of range")
            keys = self.a_rows * n + self.a_cols
            if len(np.unique(keys)) != len(keys):
                raise MalformedInstance("duplicate (row, col) entries")
        if not np.all(np.isfinite(self.c)) or not np.all(np.isfinite(self.b)):
            raise MalformedInstance("objective and rhs must be finite")
        if not np.all(np.isfinite(self.a_vals)):
            raise MalformedInstance("coefficients must be finite")
        if np.any(self.lower == np.inf) or np.any(self.upper == -np.inf):
            raise MalformedInstance("lower bound +inf or upper bound -inf")
        both = np.isfinite(self.lower) & np.isfinite(self.upper)
        if np.any(self.lower[both] > self.upper[both]):
            raise MalformedInstance("lower bound exceeds upper bound")
        prev = -1
        for i in self.integer:
            if i <= prev or i >= n:
                raise MalformedInstance("integer set must be strictly increasing and < n")
            prev = i

    # -- derived views --------------------------------------------------------------------------

    @cached_property
    def dense_a(self) -> np.ndarray:
        a = np.zeros((self.m, self.n), dtype=np.float64)
        a[self.a_rows, self.a_cols] = self.a_vals
        a.flags.writeable = False
        return a

    @cached_property
    def is_integer(self) -> np.ndarray:
        mask = np.zeros(self.n, dtype=bool)
        mask[list(self.integer)] = True
        mask.flags.writeable = False
        return mask

    @property
    def entries(self) -> list[tuple[int, int, float]]:
        return [(int(r), int(q), float(v)) for r, q, v in zip(self.a_rows, self.a_cols, self.a_vals)]

    def original_objective(self, z: float) -> float:
        return -z if self.sense_flipped else z

    def local_bounds(self, deltas: Sequence["BoundDelta"]) -> tuple[np.ndarray, np.ndarray]:
        lo = self.lower.copy()
        up = self.upper.copy()
        for d in deltas:
            if d.kind is DeltaKind.UPPER_AT_MOST:
                up[d.var] = min(up[d.var], d.value)
            else:
                lo[d.var] = max(lo[d.var], d.value)
        return lo, up

    # -- equality / persistence -----------------------------------------------------------------

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MilpInstance):
            return NotImplemented
        return (
            self.name == other.name
            and self.n == other.n
            and self.m == other.m
            and self.integer == other.integer
            and self.sense_flipped == other.sense_flipped
            and self.family == other.family
            and self.seed == other.seed
            and self.rng == other.rng
            and all(
                np.array_equal(getattr(self, k), getattr(other, k))
                for k in ("c", "a_rows", "a_cols", "a_vals", "b", "lower", "upper")
            )
        )

    __hash__ = None  # type: ignore[assignment]

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "n": int(self.n),
            "m": int(self.m),
            "c": [float(v) for v in self.c],
            "A": [[int(r), int(q), float(v)] for r, q, v in zip(self.a_rows, self.a_cols, self.a_vals)],
            "b": [float(v) for v in self.b],
            "l": [encode_bound(v) for v in self.lower],
            "u": [encode_bound(v) for v in self.upper],
            "I": list(self.integer),
            "sense_flipped": bool(self.sense_flipped),
            "family": self.family,
            "seed": int(self.seed),
            "rng": self.rng,
        }

    @staticmethod
    def from_dict(d: dict[str, Any]) -> "MilpInstance":
        entries = list(d.get("A") or [])
        return MilpInstance(
            name=str(d["name"]),
            n=int(d["n"]),
            m=int(d["m"]),
            c=[float(v) for v in d["c"]],
            a_rows=[int(e[0]) for e in entries],
            a_cols=[int(e[1]) for e in entries],
            a_vals=[float(e[2]) for e in entries],
            b=[float(v) for v in d["b"]],
            lower=[decode_bound(v) for v in d["l"]],
            upper=[decode_bound(v) for v in d["u"]],
            integer=[int(i) for i in d["I"]],
            sense_flipped=bool(d.get("sense_flipped", False)),
            family=str(d.get("family", "")),
            seed=int(d.get("seed", 0)),
            rng=str(d.get("rng", "")),
        )


class LpStatus(str, Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"
    ITERATION_LIMIT = "IterationLimit"


@dataclass(frozen=True, eq=False)
class LpSolution:
    status: LpStatus
    x: np.ndarray | None = None
    objective: float = float("nan")
    duals: np.ndarray | None = None
    iterations: int = 0

    @property
    def optimal(self) -> bool:
        return self.status is LpStatus.OPTIMAL


class DeltaKind(str, Enum):
    UPPER_AT_MOST = "UpperAtMost"
    LOWER_AT_LEAST = "LowerAtLeast"


@dataclass(frozen=True)
class BoundDelta:
    var: int
    kind: DeltaKind
    value: float

    def to_dict(self) -> dict[str, Any]:
        return {"var": self.var, "kind": self.kind.value, "value": self.value}

    @staticmethod
    def from_dict(d: dict[str, Any]) -> "BoundDelta":
        return BoundDelta(var=int(d["var"]), kind=DeltaKind(d["kind"]), value=float(d["value"]))


@dataclass(frozen=True)
class BranchDecision:
    """A branching choice; ``aux`` carries per-candidate scores when the rule computes them."""

    var: int
    aux: dict[int, float] | None = field(default=None, compare=False)
