from __future__ import annotations

import math

from branchlab.errors import MalformedInstance
from branchlab.model.types import MilpInstance, RawMilp


def normalize_instance(raw: RawMilp) -> MilpInstance:
    """Rewrite a general-form MILP as min c.x s.t. A x <= b.

    Maximisation negates c (and sets ``sense_flipped``), ``>=`` rows are negated, ``=`` rows split
    into a ``<=`` pair. Rows keep their relative order; an equality row yields its ``<=`` copy
    immediately followed by the negated copy.
    """

    n = int(raw.num_vars)
    m_raw = raw.num_rows
    if n <= 0:
        raise MalformedInstance("instance has no variables")
    if len(raw.rhs) != m_raw:
        raise MalformedInstance(f"rhs has length {len(raw.rhs)}, expected {m_raw}")
    for name, seq in (("objective", raw.objective), ("lower", raw.lower), ("upper", raw.upper)):
        if len(seq) != n:
            raise MalformedInstance(f"{name} has length {len(seq)}, expected {n}")

    by_row: dict[int, dict[int, float]] = {}
    for r, q, v in raw.entries:
        r, q = int(r), int(q)
        if not (0 <= r < m_raw) or not (0 <= q < n):
            raise MalformedInstance(f"entry ({r}, {q}) out of range")
        row = by_row.setdefault(r, {})
        if q in row:
            raise MalformedInstance(f"duplicate entry ({r}, {q})")
        if not math.isfinite(float(v)):
            raise MalformedInstance(f"non-finite coefficient at ({r}, {q})")
        row[q] = float(v)

    rows: list[tuple[dict[int, float], float]] = []
    for r in range(m_raw):
        coeffs = by_row.get(r, {})
        rhs = float(raw.rhs[r])
        sense = raw.senses[r]
        if sense == "<=":
            rows.append((coeffs, rhs))
        elif sense == ">=":
            rows.append(({q: -v for q, v in coeffs.items()}, -rhs))
        elif sense == "=":
            rows.append((coeffs, rhs))
            rows.append(({q: -v for q, v in coeffs.items()}, -rhs))
        else:
            raise MalformedInstance(f"row {r}: unknown sense {sense!r}")

    a_rows: list[int] = []
    a_cols: list[int] = []
    a_vals: list[float] = []
    for i, (coeffs, _) in enumerate(rows):
        for q in sorted(coeffs):
            if coeffs[q] == 0.0:
                continue
            a_rows.append(i)
            a_cols.append(q)
            a_vals.append(coeffs[q])

    sign = -1.0 if raw.maximize else 1.0
    # +0.0 avoids -0.0 leaking into files
    c = [sign * float(v) + 0.0 for v in raw.objective]

    integer = sorted({int(i) for i in raw.integer})
    if len(integer) != len(list(raw.integer)):
        raise MalformedInstance("duplicate integer indices")

    return MilpInstance(
        name=raw.name,
        n=n,
        m=len(rows),
        c=c,
        a_rows=a_rows,
        a_cols=a_cols,
        a_vals=[v + 0.0 for v in a_vals],
        b=[rhs + 0.0 for _, rhs in rows],
        lower=[float(v) for v in raw.lower],
        upper=[float(v) for v in raw.upper],
        integer=integer,
        sense_flipped=bool(raw.maximize),
        family=raw.family,
        seed=int(raw.seed),
        rng=raw.rng,
    )
