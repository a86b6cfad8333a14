from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Iterable, Iterator

from branchlab.errors import SchemaError


def dumps_record(record: dict[str, Any]) -> str:
    return json.dumps(record, sort_keys=True, allow_nan=False)


def log_event(path: str | Path, event: dict[str, Any]) -> None:
    """Append a single JSON line."""
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    with p.open("a", encoding="utf-8") as f:
        f.write(dumps_record(event) + "\n")


def write_jsonl(path: str | Path, header: dict[str, Any], records: Iterable[dict[str, Any]]) -> str:
    """Write a header line followed by one record per line, replacing any previous file."""
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    tmp = p.with_name(p.name + ".tmp")
    with tmp.open("w", encoding="utf-8") as f:
        f.write(dumps_record(header) + "\n")
        for rec in records:
            f.write(dumps_record(rec) + "\n")
    tmp.replace(p)
    return str(p)


def read_jsonl(path: str | Path, *, schema: str | None = None) -> tuple[dict[str, Any], Iterator[dict[str, Any]]]:
    p = Path(path)
    lines = p.read_text(encoding="utf-8").splitlines()
    if not lines:
        raise SchemaError(f"{p}: empty file", line=1)
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as e:
        raise SchemaError(f"{p}: bad header: {e.msg}", line=1) from e
    if schema is not None and header.get("schema") != schema:
        raise SchemaError(f"{p}: expected schema {schema!r}, got {header.get('schema')!r}", field="schema", line=1)

    def _records() -> Iterator[dict[str, Any]]:
        for k, line in enumerate(lines[1:], start=2):
            if not line.strip():
                continue
            try:
                yield json.loads(line)
            except json.JSONDecodeError as e:
                raise SchemaError(f"{p}: malformed record: {e.msg}", line=k) from e

    return header, _records()
