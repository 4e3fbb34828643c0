"""Run manifest: one JSON per output directory recording every stage run."""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

TOOL_VERSION = "0.1.0"
MANIFEST_NAME = "manifest.json"


def hash_file(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()[:16]


def hash_config(snapshot: dict[str, str]) -> str:
    blob = json.dumps(snapshot, sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


class RunManifest:
    """Stage ledger stored as manifest.json inside the output directory."""

    def __init__(self, out_dir: str | Path):
        self.path = Path(out_dir) / MANIFEST_NAME
        if self.path.exists():
            self.data = json.loads(self.path.read_text(encoding="utf-8"))
        else:
            self.data = {"tool": "trace-matcher", "version": TOOL_VERSION,
                         "stages": {}}

    def record_stage(self, name: str, config_snapshot: dict[str, str],
                     inputs: dict[str, str | Path], outputs: list[str],
                     wall_seconds: float) -> None:
        self.data["stages"][name] = {
            "config": dict(sorted(config_snapshot.items())),
            "config_hash": hash_config(config_snapshot),
            "inputs": {k: hash_file(v) for k, v in sorted(inputs.items())},
            "outputs": sorted(outputs),
            "wall_seconds": round(wall_seconds, 3),
        }
        self.save()

    def save(self) -> None:
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self.path.write_text(json.dumps(self.data, indent=2, sort_keys=True) + "\n",
                             encoding="utf-8")

    @property
    def stages(self) -> dict:
        return self.data["stages"]
