from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from branchlab.errors import EmptyMask, ShapeMismatch
from branchlab.gnn.params import GcnnParams
from branchlab.gnn.state import BipartiteState


def _relu(z: np.ndarray) -> np.ndarray:
    return np.maximum(z, 0.0)


def _affine(p: GcnnParams, name: str, inp: np.ndarray) -> np.ndarray:
    return inp @ p[f"{name}.w"] + p[f"{name}.b"]


@dataclass(frozen=True, eq=False)
class _MlpCache:
    inp: np.ndarray
    hidden: np.ndarray
    out: np.ndarray


def _mlp(p: GcnnParams, first: str, second: str, inp: np.ndarray, *, relu_out: bool) -> _MlpCache:
    hidden = _relu(_affine(p, first, inp))
    out = _affine(p, second, hidden)
    return _MlpCache(inp=inp, hidden=hidden, out=_relu(out) if relu_out else out)


@dataclass(frozen=True, eq=False)
class ForwardTrace:
    """Activations of one forward pass, kept for the backward pass."""

    params: GcnnParams
    state: BipartiteState
    hx: np.ndarray
    hc: np.ndarray
    he: np.ndarray
    g_pass1: _MlpCache
    c_update: _MlpCache
    g_pass2: _MlpCache
    x_update: _MlpCache
    policy: _MlpCache
    value: _MlpCache
    logits: np.ndarray
    pi: np.ndarray
    v: float


def masked_softmax(logits: np.ndarray, mask: np.ndarray) -> np.ndarray:
    if not mask.any():
        raise EmptyMask("no branching candidates")
    z = np.where(mask, logits, -np.inf)
    z = z - z[mask].max()
    ex = np.where(mask, np.exp(z), 0.0)
    return ex / ex.sum()


def gcnn_forward(state: BipartiteState, params: GcnnParams) -> tuple[np.ndarray, float, ForwardTrace]:
    """Two-pass bipartite convolution followed by a masked policy softmax and a masked value sum.

    Pass 1 updates constraints from (variable, edge, constraint) messages; pass 2 updates variables
    from messages that use the updated constraints.
    """

    if not state.mask.any():
        raise EmptyMask("no branching candidates")
    h = params.h
    if state.x.shape[1] != params.d_x or state.c.shape[1] != params.d_c or state.e.shape[1] != params.d_e:
        raise ShapeMismatch("state feature widths do not match the parameters")
    rows, cols = state.edge_rows, state.edge_cols

    hx = _relu(_affine(params, "emb_x", state.x))
    hc = _relu(_affine(params, "emb_c", state.c))
    he = _affine(params, "emb_e", state.e)

    g1 = _mlp(params, "g1", "g2", np.concatenate([hx[cols], he, hc[rows]], axis=1), relu_out=True)
    agg_c = np.zeros((state.m, h))
    np.add.at(agg_c, rows, g1.out)
    cu = _mlp(params, "fc1", "fc2", np.concatenate([hc, agg_c], axis=1), relu_out=True)

    g2 = _mlp(params, "g1", "g2", np.concatenate([hx[cols], he, cu.out[rows]], axis=1), relu_out=True)
    agg_x = np.zeros((state.n, h))
    np.add.at(agg_x, cols, g2.out)
    xu = _mlp(params, "fx1", "fx2", np.concatenate([hx, agg_x], axis=1), relu_out=True)

    pol = _mlp(params, "p1", "p2", xu.out, relu_out=False)
    val = _mlp(params, "v1", "v2", xu.out, relu_out=False)
    logits = pol.out[:, 0]
    pi = masked_softmax(logits, state.mask)
    v = float(val.out[state.mask, 0].sum())

    trace = ForwardTrace(
        params=params,
        state=state,
        hx=hx,
        hc=hc,
        he=he,
        g_pass1=g1,
        c_update=cu,
        g_pass2=g2,
        x_update=xu,
        policy=pol,
        value=val,
        logits=logits,
        pi=pi,
        v=v,
    )
    return pi, v, trace


def _affine_back(
    p: GcnnParams, name: str, inp: np.ndarray, dout: np.ndarray, grads: dict[str, np.ndarray]
) -> np.ndarray:
    grads[f"{name}.w"] += inp.T @ dout
    grads[f"{name}.b"] += dout.sum(axis=0)
    return dout @ p[f"{name}.w"].T


def _mlp_back(
    p: GcnnParams,
    first: str,
    second: str,
    cache: _MlpCache,
    dout: np.ndarray,
    grads: dict[str, np.ndarray],
    *,
    relu_out: bool,
) -> np.ndarray:
    if relu_out:
        dout = dout * (cache.out > 0)
    dhidden = _affine_back(p, second, cache.hidden, dout, grads) * (cache.hidden > 0)
    return _affine_back(p, first, cache.inp, dhidden, grads)


def gcnn_backward(trace: ForwardTrace, dpi: np.ndarray, dv: float) -> dict[str, np.ndarray]:
    """Gradients of L = dpi . pi + dv * V with respect to every parameter tensor."""

    p = trace.params
    s = trace.state
    h = p.h
    dpi = np.asarray(dpi, dtype=np.float64)
    if dpi.shape != trace.pi.shape:
        raise ShapeMismatch(f"dpi has shape {dpi.shape}, expected {trace.pi.shape}")
    rows, cols = s.edge_rows, s.edge_cols
    grads = {k: np.zeros_like(p[k]) for k in p}

    pi = trace.pi
    dlogits = np.where(s.mask, pi * (dpi - float(pi @ dpi)), 0.0)
    dvals = np.where(s.mask, float(dv), 0.0)

    dxu = _mlp_back(p, "p1", "p2", trace.policy, dlogits[:, None], grads, relu_out=False)
    dxu = dxu + _mlp_back(p, "v1", "v2", trace.value, dvals[:, None], grads, relu_out=False)

    dzx = _mlp_back(p, "fx1", "fx2", trace.x_update, dxu, grads, relu_out=True)
    dhx = dzx[:, :h].copy()
    dg2 = dzx[:, h:][cols]

    dz2 = _mlp_back(p, "g1", "g2", trace.g_pass2, dg2, grads, relu_out=True)
    np.add.at(dhx, cols, dz2[:, :h])
    dhe = dz2[:, h : 2 * h].copy()
    dcu = np.zeros((s.m, h))
    np.add.at(dcu, rows, dz2[:, 2 * h :])

    dzc = _mlp_back(p, "fc1", "fc2", trace.c_update, dcu, grads, relu_out=True)
    dhc = dzc[:, :h].copy()
    dg1 = dzc[:, h:][rows]

    dz1 = _mlp_back(p, "g1", "g2", trace.g_pass1, dg1, grads, relu_out=True)
    np.add.at(dhx, cols, dz1[:, :h])
    dhe += dz1[:, h : 2 * h]
    np.add.at(dhc, rows, dz1[:, 2 * h :])

    _affine_back(p, "emb_e", s.e, dhe, grads)
    _affine_back(p, "emb_c", s.c, dhc * (trace.hc > 0), grads)
    _affine_back(p, "emb_x", s.x, dhx * (trace.hx > 0), grads)
    return grads
