"""Bipartite state features and the GCNN policy/value network."""

from .adam import AdamState, adam_step
from .checkpoint import load_checkpoint, save_checkpoint
from .network import ForwardTrace, gcnn_backward, gcnn_forward, masked_softmax
from .params import GcnnParams, init_params, zero_params
from .state import BipartiteState, extract_state

__all__ = [
    "AdamState",
    "BipartiteState",
    "ForwardTrace",
    "GcnnParams",
    "adam_step",
    "extract_state",
    "gcnn_backward",
    "gcnn_forward",
    "init_params",
    "load_checkpoint",
    "masked_softmax",
    "save_checkpoint",
    "zero_params",
]
