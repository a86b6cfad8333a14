from __future__ import annotations

import hashlib

import numpy as np

# recorded in every instance file next to the seed
RNG_NAME = "numpy.PCG64"


def _key(part: int | str) -> int:
    if isinstance(part, str):
        return int.from_bytes(hashlib.sha256(part.encode("utf-8")).digest()[:4], "little")
    return int(part) & 0xFFFFFFFF


def make_rng(seed: int, *keys: int | str) -> np.random.Generator:
    """A PCG64 generator for ``seed``, split by ``keys`` (family name, instance index, ...)."""

    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(_key(k) for k in keys))
    return np.random.Generator(np.random.PCG64(ss))


def derive_seed(seed: int, *keys: int | str) -> int:
    """A 64-bit child seed; stable across numpy versions because SeedSequence hashing is specified."""

    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(_key(k) for k in keys))
    lo, hi = (int(v) for v in ss.generate_state(2, dtype=np.uint32))
    return (hi << 32) | lo
