from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from branchlab.errors import EmptyTrace


@dataclass
class DualBoundTrace:
    """Global dual bound over solve time, as (t, z) steps; z only ever increases."""

    events: list[tuple[float, float]] = field(default_factory=list)

    def record(self, t: float, z: float) -> bool:
        if self.events and z <= self.events[-1][1]:
            return False
        t = max(float(t), self.events[-1][0]) if self.events else float(t)
        self.events.append((t, float(z)))
        return True

    @property
    def last(self) -> float:
        if not self.events:
            raise EmptyTrace("trace has no events")
        return self.events[-1][1]

    def to_dict(self) -> dict[str, Any]:
        return {"events": [[t, z] for t, z in self.events]}

    @staticmethod
    def from_dict(d: dict[str, Any]) -> "DualBoundTrace":
        return DualBoundTrace(events=[(float(t), float(z)) for t, z in d.get("events", [])])


def dual_bound_integral(trace: DualBoundTrace, T: float) -> float:
    """Exact integral of the right-continuous step function over [0, T], last value held to T."""

    if not trace.events:
        raise EmptyTrace("trace has no events")
    total = 0.0
    events = trace.events
    for k, (t, z) in enumerate(events):
        if t >= T:
            break
        end = events[k + 1][0] if k + 1 < len(events) else T
        end = min(end, T)
        if end > t:
            total += z * (end - t)
    return total


def dual_integral_score(trace: DualBoundTrace, T: float, opt_objective: float) -> float:
    """-T * opt + integral of z over [0, T]; 0 for a bound that is optimal from the start."""

    return -float(T) * float(opt_objective) + dual_bound_integral(trace, float(T))
