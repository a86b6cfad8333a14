from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterator

import numpy as np

from branchlab.errors import ShapeMismatch
from branchlab.gnn.state import D_C, D_E, D_X

DEFAULT_HIDDEN = 32


def layer_shapes(h: int, d_x: int = D_X, d_c: int = D_C, d_e: int = D_E) -> dict[str, tuple[int, int]]:
    return {
        "emb_x": (d_x, h),
        "emb_c": (d_c, h),
        "emb_e": (d_e, h),
        "g1": (3 * h, h),
        "g2": (h, h),
        "fc1": (2 * h, h),
        "fc2": (h, h),
        "fx1": (2 * h, h),
        "fx2": (h, h),
        "p1": (h, h),
        "p2": (h, 1),
        "v1": (h, h),
        "v2": (h, 1),
    }


def tensor_shapes(h: int, d_x: int = D_X, d_c: int = D_C, d_e: int = D_E) -> dict[str, tuple[int, ...]]:
    out: dict[str, tuple[int, ...]] = {}
    for name, (fi, fo) in layer_shapes(h, d_x, d_c, d_e).items():
        out[f"{name}.w"] = (fi, fo)
        out[f"{name}.b"] = (fo,)
    return out


@dataclass(frozen=True, eq=False)
class GcnnParams:
    """Immutable weight snapshot; every update returns a new instance."""

    h: int
    tensors: dict[str, np.ndarray]
    d_x: int = D_X
    d_c: int = D_C
    d_e: int = D_E

    def __post_init__(self) -> None:
        shapes = tensor_shapes(self.h, self.d_x, self.d_c, self.d_e)
        if set(shapes) != set(self.tensors):
            raise ShapeMismatch(f"parameter names differ: {sorted(set(shapes) ^ set(self.tensors))}")
        frozen: dict[str, np.ndarray] = {}
        for k in shapes:
            arr = np.array(self.tensors[k], dtype=np.float64)
            if arr.shape != shapes[k]:
                raise ShapeMismatch(f"{k}: shape {arr.shape}, expected {shapes[k]}")
            arr.flags.writeable = False
            frozen[k] = arr
        object.__setattr__(self, "tensors", frozen)

    def __getitem__(self, key: str) -> np.ndarray:
        return self.tensors[key]

    def __iter__(self) -> Iterator[str]:
        return iter(tensor_shapes(self.h, self.d_x, self.d_c, self.d_e))

    @property
    def param_count(self) -> int:
        return int(sum(a.size for a in self.tensors.values()))

    def map(self, fn: Callable[[str, np.ndarray], np.ndarray]) -> "GcnnParams":
        return GcnnParams(self.h, {k: fn(k, self.tensors[k]) for k in self}, self.d_x, self.d_c, self.d_e)

    def flat(self) -> np.ndarray:
        return np.concatenate([self.tensors[k].reshape(-1) for k in self])

    def with_flat(self, flat: np.ndarray) -> "GcnnParams":
        flat = np.asarray(flat, dtype=np.float64)
        if flat.size != self.param_count:
            raise ShapeMismatch(f"flat vector has {flat.size} entries, expected {self.param_count}")
        out: dict[str, np.ndarray] = {}
        pos = 0
        for k in self:
            a = self.tensors[k]
            out[k] = flat[pos : pos + a.size].reshape(a.shape)
            pos += a.size
        return GcnnParams(self.h, out, self.d_x, self.d_c, self.d_e)

    def allclose(self, other: "GcnnParams", atol: float = 0.0) -> bool:
        return self.h == other.h and all(np.allclose(self[k], other[k], rtol=0.0, atol=atol) for k in self)


def zero_params(h: int = DEFAULT_HIDDEN) -> GcnnParams:
    return GcnnParams(h, {k: np.zeros(s) for k, s in tensor_shapes(h).items()})


def init_params(rng: np.random.Generator, h: int = DEFAULT_HIDDEN) -> GcnnParams:
    """He-normal weights, zero biases."""
    tensors: dict[str, np.ndarray] = {}
    for k, s in tensor_shapes(h).items():
        if k.endswith(".b"):
            tensors[k] = np.zeros(s)
        else:
            tensors[k] = rng.normal(0.0, np.sqrt(2.0 / s[0]), size=s)
    return GcnnParams(h, tensors)


def zero_grads(params: GcnnParams) -> dict[str, np.ndarray]:
    return {k: np.zeros_like(params[k]) for k in params}
