from __future__ import annotations

import json
import os
from pathlib import Path
from typing import Any

import numpy as np

from branchlab.errors import InstanceIOError, MissingArtifact, SchemaError, ShapeMismatch
from branchlab.gnn.params import GcnnParams, tensor_shapes

CHECKPOINT_FORMAT = "branchlab-gcnn"
CHECKPOINT_VERSION = 1


def checkpoint_dict(params: GcnnParams, config: dict[str, Any] | None = None) -> dict[str, Any]:
    shapes = tensor_shapes(params.h, params.d_x, params.d_c, params.d_e)
    return {
        "header": {
            "format": CHECKPOINT_FORMAT,
            "version": CHECKPOINT_VERSION,
            "h": params.h,
            "d_x": params.d_x,
            "d_c": params.d_c,
            "d_e": params.d_e,
            "shapes": {k: list(v) for k, v in shapes.items()},
            "param_count": params.param_count,
        },
        "weights": {k: [float(v) for v in params[k].reshape(-1)] for k in params},
        "config": dict(config or {}),
    }


def save_checkpoint(path: str | Path, params: GcnnParams, config: dict[str, Any] | None = None) -> str:
    out = Path(path)
    tmp = out.with_name(out.name + ".tmp")
    try:
        out.parent.mkdir(parents=True, exist_ok=True)
        tmp.write_text(json.dumps(checkpoint_dict(params, config), sort_keys=True) + "\n", encoding="utf-8")
        os.replace(tmp, out)
    except OSError as e:
        raise InstanceIOError(f"cannot write checkpoint {out}: {e}") from e
    return str(out)


def load_checkpoint(path: str | Path) -> tuple[GcnnParams, dict[str, Any]]:
    p = Path(path)
    if not p.exists():
        raise MissingArtifact(str(p), "checkpoint")
    try:
        data = json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise SchemaError(f"{p}: malformed checkpoint: {e.msg}", line=e.lineno) from e
    except OSError as e:
        raise InstanceIOError(f"cannot read checkpoint {p}: {e}") from e

    header = data.get("header") or {}
    if header.get("format") != CHECKPOINT_FORMAT:
        raise SchemaError(f"{p}: not a {CHECKPOINT_FORMAT} checkpoint", field="header.format")
    if header.get("version") != CHECKPOINT_VERSION:
        raise SchemaError(f"{p}: unsupported version {header.get('version')!r}", field="header.version")
    h = int(header["h"])
    dims = (int(header["d_x"]), int(header["d_c"]), int(header["d_e"]))
    shapes = tensor_shapes(h, *dims)
    if {k: list(v) for k, v in shapes.items()} != header.get("shapes"):
        raise SchemaError(f"{p}: shape header does not match h={h}", field="header.shapes")

    weights = data.get("weights") or {}
    tensors: dict[str, np.ndarray] = {}
    for k, shape in shapes.items():
        if k not in weights:
            raise SchemaError(f"{p}: missing tensor {k}", field="weights")
        tensors[k] = np.asarray(weights[k], dtype=np.float64).reshape(shape)
    try:
        params = GcnnParams(h, tensors, *dims)
    except ShapeMismatch as e:
        raise SchemaError(f"{p}: {e}", field="weights") from e
    if params.param_count != header.get("param_count"):
        raise SchemaError(f"{p}: parameter count checksum mismatch", field="header.param_count")
    return params, dict(data.get("config") or {})
