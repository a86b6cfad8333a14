"""Stage manifests: what a stage read, what it wrote, and under which config.

A stage whose manifest matches the current config hash, seeds and input digests, and whose outputs
still hash to the recorded digests, is up to date and is skipped.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Iterable

from branchlab.errors import SchemaError

MANIFEST_VERSION = 1


def file_digest(path: str | Path) -> str:
    h = hashlib.sha256()
    with Path(path).open("rb") as f:
        for block in iter(lambda: f.read(1 << 16), b""):
            h.update(block)
    return h.hexdigest()


def digests(paths: Iterable[str | Path], root: Path) -> dict[str, str]:
    """Digests keyed by path relative to ``root``, in sorted order."""
    out: dict[str, str] = {}
    for p in sorted(Path(x) for x in paths):
        out[_rel(p, root)] = file_digest(p)
    return out


def _rel(p: Path, root: Path) -> str:
    try:
        return p.resolve().relative_to(root.resolve()).as_posix()
    except ValueError:
        return p.as_posix()


@dataclass
class Manifest:
    stage: str
    config_hash: str
    seeds: list[int]
    inputs: dict[str, str] = field(default_factory=dict)
    outputs: dict[str, str] = field(default_factory=dict)
    extra: dict[str, Any] = field(default_factory=dict)
    version: int = MANIFEST_VERSION

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    @staticmethod
    def from_dict(d: dict[str, Any]) -> "Manifest":
        try:
            return Manifest(
                stage=str(d["stage"]),
                config_hash=str(d["config_hash"]),
                seeds=[int(s) for s in d["seeds"]],
                inputs=dict(d.get("inputs") or {}),
                outputs=dict(d.get("outputs") or {}),
                extra=dict(d.get("extra") or {}),
                version=int(d.get("version", MANIFEST_VERSION)),
            )
        except KeyError as e:
            raise SchemaError("missing field in manifest", field=str(e.args[0])) from e


def manifest_path(stage_dir: Path, stage: str) -> Path:
    return stage_dir / f"manifest-{stage}.json"


def write_manifest(stage_dir: Path, manifest: Manifest) -> Path:
    p = manifest_path(stage_dir, manifest.stage)
    p.parent.mkdir(parents=True, exist_ok=True)
    tmp = p.with_name(p.name + ".tmp")
    tmp.write_text(json.dumps(manifest.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    os.replace(tmp, p)
    return p


def read_manifest(stage_dir: Path, stage: str) -> Manifest | None:
    p = manifest_path(stage_dir, stage)
    if not p.exists():
        return None
    try:
        return Manifest.from_dict(json.loads(p.read_text(encoding="utf-8")))
    except json.JSONDecodeError as e:
        raise SchemaError(f"{p}: malformed manifest: {e.msg}", line=e.lineno) from e


def is_up_to_date(current: Manifest | None, expected: Manifest, root: Path) -> bool:
    """Same config, seeds and inputs, and every recorded output still matches its digest."""

    if current is None:
        return False
    if (current.config_hash, current.seeds, current.inputs) != (expected.config_hash, expected.seeds, expected.inputs):
        return False
    if not current.outputs:
        return False
    for rel, digest in current.outputs.items():
        p = root / rel
        if not p.exists() or file_digest(p) != digest:
            return False
    return True
