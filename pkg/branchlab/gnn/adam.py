from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from branchlab.errors import ShapeMismatch
from branchlab.gnn.params import GcnnParams


@dataclass
class AdamState:
    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)
    t: int = 0

    @staticmethod
    def for_params(params: GcnnParams) -> "AdamState":
        return AdamState(
            m={k: np.zeros_like(params[k]) for k in params},
            v={k: np.zeros_like(params[k]) for k in params},
        )


def adam_step(
    params: GcnnParams,
    grads: dict[str, np.ndarray],
    state: AdamState,
    lr: float = 1e-3,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> tuple[GcnnParams, AdamState]:
    """One bias-corrected Adam step descending ``grads``."""

    if set(grads) != set(params.tensors):
        raise ShapeMismatch("gradient names do not match the parameters")
    if not state.m:
        state = AdamState.for_params(params)
    t = state.t + 1
    new_m: dict[str, np.ndarray] = {}
    new_v: dict[str, np.ndarray] = {}
    updated: dict[str, np.ndarray] = {}
    for k in params:
        g = np.asarray(grads[k], dtype=np.float64)
        if g.shape != params[k].shape:
            raise ShapeMismatch(f"{k}: gradient shape {g.shape}, expected {params[k].shape}")
        m = beta1 * state.m[k] + (1.0 - beta1) * g
        v = beta2 * state.v[k] + (1.0 - beta2) * g * g
        m_hat = m / (1.0 - beta1**t)
        v_hat = v / (1.0 - beta2**t)
        updated[k] = params[k] - lr * m_hat / (np.sqrt(v_hat) + eps)
        new_m[k] = m
        new_v[k] = v
    return GcnnParams(params.h, updated, params.d_x, params.d_c, params.d_e), AdamState(new_m, new_v, t)
