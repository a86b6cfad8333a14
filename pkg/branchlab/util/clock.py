from __future__ import annotations

import time
from typing import Protocol


class Clock(Protocol):
    label: str

    def now(self) -> float: ...

    def tick_lp(self) -> None:
        """Called once per LP solve."""


class MonotonicClock:
    label = "monotonic"

    def __init__(self) -> None:
        self._t0 = time.perf_counter()

    def now(self) -> float:
        return time.perf_counter() - self._t0

    def tick_lp(self) -> None:
        pass


class FakeClock:
    """Deterministic clock: time only moves when an LP is solved."""

    label = "fake-1ms-per-lp"

    def __init__(self, per_lp: float = 1e-3) -> None:
        self.per_lp = float(per_lp)
        self._ticks = 0

    def now(self) -> float:
        return self._ticks * self.per_lp

    def tick_lp(self) -> None:
        self._ticks += 1


def make_clock(kind: str) -> Clock:
    if kind in ("fake", FakeClock.label):
        return FakeClock()
    if kind in ("monotonic", "real"):
        return MonotonicClock()
    raise ValueError(f"unknown clock: {kind!r}")
