from __future__ import annotations

import dataclasses
import logging
from typing import Any, Dict, List

from branchlab.errors import BadParams
from branchlab.generators.auction import CombinatorialAuctionBuilder
from branchlab.generators.base import Family, FamilyBase, FamilySpec
from branchlab.generators.facility import FacilityLocationBuilder
from branchlab.generators.indset import IndependentSetBuilder
from branchlab.generators.setcover import SetCoveringBuilder
from branchlab.milp.normalize import normalize_instance
from branchlab.model.types import MilpInstance
from branchlab.util.rng import RNG_NAME, make_rng

log = logging.getLogger(__name__)

_BUILDERS: Dict[Family, FamilyBase] = {}

SEED_LIMIT = 1 << 64


def _register(builder: FamilyBase) -> None:
    _BUILDERS[builder.family] = builder


def _init_registry() -> None:
    if _BUILDERS:
        return
    _register(SetCoveringBuilder())
    _register(CombinatorialAuctionBuilder())
    _register(FacilityLocationBuilder())
    _register(IndependentSetBuilder())


def list_families() -> List[FamilyBase]:
    _init_registry()
    return list(_BUILDERS.values())


def get_builder(family: Family | str) -> FamilyBase:
    _init_registry()
    fam = family if isinstance(family, Family) else Family.parse(family)
    return _BUILDERS[fam]


def make_spec(family: Family | str, params: dict[str, Any] | None, seed: int, preset: str = "desk") -> FamilySpec:
    """Complete ``params`` from the named preset so the spec alone determines the instance."""
    builder = get_builder(family)
    return FamilySpec(family=builder.family, params=builder.resolve_params(params, preset), seed=int(seed))


def generate(spec: FamilySpec) -> MilpInstance:
    if not (0 <= int(spec.seed) < SEED_LIMIT):
        raise BadParams(f"seed must be an unsigned 64-bit integer, got {spec.seed}")
    builder = get_builder(spec.family)
    params = builder.resolve_params(spec.params)
    rng = make_rng(int(spec.seed), spec.family.value)
    raw = builder.build(params, rng)
    raw = dataclasses.replace(
        raw,
        name=f"{spec.short_name()}-{int(spec.seed)}",
        family=spec.family.value,
        seed=int(spec.seed),
        rng=RNG_NAME,
    )
    inst = normalize_instance(raw)
    log.debug("generated %s: n=%d m=%d nnz=%d", inst.name, inst.n, inst.m, len(inst.a_vals))
    return inst
