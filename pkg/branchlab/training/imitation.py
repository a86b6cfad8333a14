from __future__ import annotations

import logging
from typing import Callable, Iterator, Sequence, TypeVar

import numpy as np

from branchlab.branching.policy import greedy_action
from branchlab.errors import EmptyDataset, NumericalDivergence
from branchlab.gnn.adam import AdamState, adam_step
from branchlab.gnn.network import gcnn_backward, gcnn_forward
from branchlab.gnn.params import GcnnParams, zero_grads
from branchlab.training.dataset import SbSample
from branchlab.training.losses import imitation_loss
from branchlab.util.rng import make_rng

log = logging.getLogger(__name__)

T = TypeVar("T")

# (params, item) -> (loss, grads)
SampleGrad = Callable[[GcnnParams, T], tuple[float, dict[str, np.ndarray]]]


def minibatches(n: int, batch_size: int, rng: np.random.Generator) -> Iterator[np.ndarray]:
    order = rng.permutation(n)
    step = max(1, int(batch_size))
    for i in range(0, n, step):
        yield order[i : i + step]


def fit_epochs(
    items: Sequence[T],
    params: GcnnParams,
    sample_grad: SampleGrad[T],
    *,
    epochs: int,
    lr: float,
    batch_size: int,
    rng: np.random.Generator,
    label: str,
) -> tuple[GcnnParams, list[float]]:
    """Adam over shuffled minibatches; gradients are averaged within a batch.

    Returns the parameters after the last epoch and the mean loss of every epoch. A non-finite loss
    or gradient raises ``NumericalDivergence`` and leaves the caller's parameters untouched.
    """

    state = AdamState.for_params(params)
    curve: list[float] = []
    for epoch in range(epochs):
        total = 0.0
        for batch in minibatches(len(items), batch_size, rng):
            grads = zero_grads(params)
            for i in batch:
                loss, g = sample_grad(params, items[int(i)])
                if not np.isfinite(loss):
                    raise NumericalDivergence(f"{label}: non-finite loss in epoch {epoch}")
                total += loss
                for k in grads:
                    grads[k] += g[k]
            scale = 1.0 / len(batch)
            for k in grads:
                grads[k] *= scale
                if not np.all(np.isfinite(grads[k])):
                    raise NumericalDivergence(f"{label}: non-finite gradient for {k} in epoch {epoch}")
            params, state = adam_step(params, grads, state, lr)
        curve.append(total / len(items))
        log.debug("%s epoch %d loss %.6f", label, epoch, curve[-1])
    if curve:
        log.info("%s: %d epochs, final loss %.6f", label, epochs, curve[-1])
    return params, curve


def _imitation_grad(params: GcnnParams, sample: SbSample) -> tuple[float, dict[str, np.ndarray]]:
    pi, v, trace = gcnn_forward(sample.state, params)
    if sample.value_target is None:
        # no target: policy term only
        loss, dpi, _ = imitation_loss(pi, v, sample.action, v)
        return loss, gcnn_backward(trace, dpi, 0.0)
    loss, dpi, dv = imitation_loss(pi, v, sample.action, sample.value_target)
    return loss, gcnn_backward(trace, dpi, dv)


def imitation_pretrain(
    samples: Sequence[SbSample],
    params: GcnnParams,
    epochs: int = 30,
    lr: float = 1e-3,
    batch_size: int = 16,
    seed: int = 0,
) -> tuple[GcnnParams, list[float]]:
    """Fit -log pi(a_FSB | s) + (V(s) - target)^2; samples flagged ``excluded`` are left out."""

    usable = [s for s in samples if not s.excluded]
    if not usable:
        raise EmptyDataset("no usable samples after excluding both-children-infeasible records")
    return fit_epochs(
        usable,
        params,
        _imitation_grad,
        epochs=epochs,
        lr=lr,
        batch_size=batch_size,
        rng=make_rng(seed, "imitation"),
        label="imitation",
    )


def top1_agreement(samples: Sequence[SbSample], params: GcnnParams) -> float:
    """Fraction of samples where the greedy policy picks the strong-branching action."""
    if not samples:
        raise EmptyDataset("no samples to score")
    hits = 0
    for s in samples:
        pi, _, _ = gcnn_forward(s.state, params)
        hits += int(greedy_action(pi, s.state.mask) == s.action)
    return hits / len(samples)


def uniform_agreement(samples: Sequence[SbSample]) -> float:
    """Expected agreement of a uniform pick among the candidates: mean 1/|J|."""
    if not samples:
        raise EmptyDataset("no samples to score")
    return float(np.mean([1.0 / len(s.state.candidates) for s in samples]))
