from __future__ import annotations

from typing import Any

import numpy as np

from branchlab.generators.base import Family, FamilyBase, param_float, param_int
from branchlab.model.types import RawMilp

MIN_VALUE = 1.0
MAX_VALUE = 100.0
MAX_DEVIATION = 0.5
ADDITIVITY = 0.2


def _next_item(chosen: np.ndarray, compat: np.ndarray, interests: np.ndarray, rng: np.random.Generator) -> int:
    p = (~chosen) * compat[chosen, :].mean(axis=0) * interests
    total = p.sum()
    if total <= 0:
        p = (~chosen).astype(np.float64)
        total = p.sum()
    return int(rng.choice(len(interests), p=p / total))


class CombinatorialAuctionBuilder(FamilyBase):
    """Winner determination: max sum of accepted bid prices, each item sold at most once.

    Bundles grow by an item-affinity walk: a first item drawn by bidder interest, then more items
    with probability ``add_prob`` each, weighted by compatibility with the bundle so far. The price is
    the bidder's private value of the bundle (common value plus a bidder-specific deviation) with a
    small complementarity premium. Items that no bid requests get no row.
    """

    family = Family.COMBINATORIAL_AUCTION

    def presets(self) -> dict[str, dict[str, Any]]:
        return {
            "desk": {"items": 30, "bids": 60, "add_prob": 0.65},
            "full": {"items": 100, "bids": 500, "add_prob": 0.65},
        }

    def build(self, params: dict[str, Any], rng: np.random.Generator) -> RawMilp:
        items = param_int(params, "items")
        bids = param_int(params, "bids")
        add_prob = param_float(params, "add_prob", 0.0, 1.0)

        values = MIN_VALUE + (MAX_VALUE - MIN_VALUE) * rng.random(items)
        compat = np.triu(rng.random((items, items)), k=1)
        compat = compat + compat.T
        sums = compat.sum(axis=1, keepdims=True)
        compat = np.divide(compat, sums, out=np.zeros_like(compat), where=sums > 0)

        bundles: list[np.ndarray] = []
        prices: list[float] = []
        while len(bundles) < bids:
            interests = rng.random(items)
            private = values + MAX_VALUE * MAX_DEVIATION * (2.0 * interests - 1.0)
            chosen = np.zeros(items, dtype=bool)
            chosen[rng.choice(items, p=interests / interests.sum())] = True
            while not chosen.all() and rng.random() < add_prob:
                chosen[_next_item(chosen, compat, interests, rng)] = True
            bundle = np.flatnonzero(chosen)
            price = float(private[bundle].sum() + len(bundle) ** (1.0 + ADDITIVITY))
            if price <= 0:
                continue
            bundles.append(bundle)
            prices.append(price)

        used = sorted({int(i) for b in bundles for i in b})
        row_of = {item: r for r, item in enumerate(used)}
        entries = [(row_of[int(i)], k, 1.0) for k, b in enumerate(bundles) for i in b]
        entries.sort()
        return RawMilp(
            name="",
            num_vars=bids,
            objective=prices,
            entries=entries,
            senses=["<="] * len(used),
            rhs=[1.0] * len(used),
            lower=[0.0] * bids,
            upper=[1.0] * bids,
            integer=list(range(bids)),
            maximize=True,
        )
