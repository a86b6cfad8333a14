from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any

import numpy as np

from branchlab.errors import BadParams
from branchlab.model.types import RawMilp


class Family(str, Enum):
    SET_COVERING = "SetCovering"
    COMBINATORIAL_AUCTION = "CombinatorialAuction"
    CAPACITATED_FACILITY_LOCATION = "CapacitatedFacilityLocation"
    MAXIMUM_INDEPENDENT_SET = "MaximumIndependentSet"

    @staticmethod
    def parse(name: str) -> "Family":
        key = str(name).strip()
        alias = _ALIASES.get(key.lower())
        if alias is not None:
            return alias
        try:
            return Family(key)
        except ValueError:
            raise BadParams(f"unknown family: {name!r}") from None


_ALIASES = {
    "setcover": Family.SET_COVERING,
    "cauction": Family.COMBINATORIAL_AUCTION,
    "facility": Family.CAPACITATED_FACILITY_LOCATION,
    "indset": Family.MAXIMUM_INDEPENDENT_SET,
}


@dataclass(frozen=True)
class FamilySpec:
    family: Family
    params: dict[str, Any] = field(default_factory=dict, hash=False)
    seed: int = 0

    def short_name(self) -> str:
        return next(k for k, v in _ALIASES.items() if v is self.family)


def param_int(params: dict[str, Any], key: str, lo: int = 1) -> int:
    raw = params.get(key)
    if isinstance(raw, bool) or not isinstance(raw, (int, float)) or int(raw) != raw:
        raise BadParams(f"{key} must be an integer, got {raw!r}")
    v = int(raw)
    if v < lo:
        raise BadParams(f"{key} must be >= {lo}, got {v}")
    return v


def param_float(params: dict[str, Any], key: str, lo: float, hi: float, *, lo_open: bool = False) -> float:
    raw = params.get(key)
    if isinstance(raw, bool) or not isinstance(raw, (int, float)):
        raise BadParams(f"{key} must be a number, got {raw!r}")
    v = float(raw)
    if not (lo < v if lo_open else lo <= v) or not v <= hi:
        bracket = "(" if lo_open else "["
        raise BadParams(f"{key} must lie in {bracket}{lo}, {hi}], got {v}")
    return v


class FamilyBase:
    family: Family

    def presets(self) -> dict[str, dict[str, Any]]:
        return {}

    def resolve_params(self, overrides: dict[str, Any] | None, preset: str = "desk") -> dict[str, Any]:
        presets = self.presets()
        if presets and preset not in presets:
            raise BadParams(f"{self.family.value}: unknown preset {preset!r}")
        base = dict(presets.get(preset, {}))
        known = set(base)
        for k, v in (overrides or {}).items():
            if known and k not in known:
                raise BadParams(f"{self.family.value}: unknown parameter {k!r}")
            base[str(k)] = v
        return base

    def build(self, params: dict[str, Any], rng: np.random.Generator) -> RawMilp:
        raise NotImplementedError
