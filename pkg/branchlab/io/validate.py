from __future__ import annotations

import math
from typing import Any

from branchlab.errors import MalformedInstance, SchemaError
from branchlab.model.types import MilpInstance, decode_bound

REQUIRED_FIELDS = ("name", "n", "m", "c", "A", "b", "l", "u", "I")


def _line_of(text: str | None, field: str) -> int | None:
    if not text:
        return None
    pos = text.find(f'"{field}"')
    if pos < 0:
        return None
    return text.count("\n", 0, pos) + 1


def migrate_instance_dict(d: dict[str, Any]) -> dict[str, Any]:
    """Fill optional metadata that older or hand-written files omit."""

    d.setdefault("sense_flipped", False)
    d.setdefault("family", "")
    d.setdefault("seed", 0)
    d.setdefault("rng", "")
    return d


def _fail(msg: str, field: str, text: str | None) -> SchemaError:
    return SchemaError(msg, field=field, line=_line_of(text, field))


def _float_list(d: dict[str, Any], field: str, size: int, text: str | None, *, bounds: bool = False) -> None:
    vals = d[field]
    if not isinstance(vals, list):
        raise _fail("expected a list", field, text)
    if len(vals) != size:
        raise _fail(f"expected {size} entries, got {len(vals)}", field, text)
    for k, v in enumerate(vals):
        if isinstance(v, bool):
            raise _fail(f"entry {k} is a boolean", field, text)
        if bounds and isinstance(v, str):
            try:
                decode_bound(v)
            except ValueError:
                raise _fail(f"entry {k}: bad bound sentinel {v!r}", field, text) from None
            continue
        if not isinstance(v, (int, float)) or not math.isfinite(float(v)):
            raise _fail(f"entry {k} is not a finite number", field, text)


def parse_instance_dict(d: Any, *, text: str | None = None) -> MilpInstance:
    """Validate a decoded instance document and build the instance.

    ``text`` is the raw file content, used only to attach line numbers to diagnostics.
    """

    if not isinstance(d, dict):
        raise SchemaError("instance document must be a JSON object", line=1)
    for field in REQUIRED_FIELDS:
        if field not in d:
            raise SchemaError("missing required field", field=field)
    d = migrate_instance_dict(dict(d))

    for field in ("n", "m", "seed"):
        if isinstance(d[field], bool) or not isinstance(d[field], int):
            raise _fail("expected an integer", field, text)
    n, m = int(d["n"]), int(d["m"])
    if n <= 0 or m < 0:
        raise _fail("sizes must be n > 0 and m >= 0", "n" if n <= 0 else "m", text)

    _float_list(d, "c", n, text)
    _float_list(d, "b", m, text)
    _float_list(d, "l", n, text, bounds=True)
    _float_list(d, "u", n, text, bounds=True)

    if not isinstance(d["A"], list):
        raise _fail("expected a list of [row, col, value] triples", "A", text)
    for k, e in enumerate(d["A"]):
        if not (isinstance(e, list) and len(e) == 3):
            raise _fail(f"entry {k} is not a [row, col, value] triple", "A", text)
        if not (isinstance(e[0], int) and isinstance(e[1], int)) or isinstance(e[2], bool):
            raise _fail(f"entry {k} has non-integer indices or a boolean value", "A", text)
    if not isinstance(d["I"], list) or not all(isinstance(i, int) and not isinstance(i, bool) for i in d["I"]):
        raise _fail("expected a list of integer indices", "I", text)
    if not isinstance(d["sense_flipped"], bool):
        raise _fail("expected a boolean", "sense_flipped", text)

    try:
        return MilpInstance.from_dict(d)
    except MalformedInstance as e:
        raise SchemaError(f"invalid instance: {e}") from e
