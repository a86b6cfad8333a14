from __future__ import annotations

import json
import os
from pathlib import Path

from branchlab.errors import InstanceIOError, SchemaError
from branchlab.io.validate import parse_instance_dict
from branchlab.model.types import MilpInstance


def dumps_instance(inst: MilpInstance) -> str:
    return json.dumps(inst.to_dict(), sort_keys=True) + "\n"


def read_instance(path: str | Path) -> MilpInstance:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as e:
        raise InstanceIOError(f"cannot read instance {p}: {e}") from e
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise SchemaError(f"{p}: malformed JSON: {e.msg}", line=e.lineno) from e
    return parse_instance_dict(data, text=text)


def write_instance(inst: MilpInstance, path: str | Path) -> str:
    """Write atomically: a partially written file never replaces a good one."""

    out = Path(path).expanduser()
    tmp = out.with_name(out.name + ".tmp")
    try:
        out.parent.mkdir(parents=True, exist_ok=True)
        tmp.write_text(dumps_instance(inst), encoding="utf-8")
        os.replace(tmp, out)
    except OSError as e:
        raise InstanceIOError(f"cannot write instance {out}: {e}") from e
    return str(out)
