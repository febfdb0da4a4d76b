"""Run manifests: every CLI command records what it did and what it produced."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with path.open("rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


@dataclass
class RunManifest:
    """Provenance record for one command invocation.

    Timestamps live only here; metric artifacts stay byte-reproducible.
    """

    command: str
    config: dict = field(default_factory=dict)
    inputs: list[str] = field(default_factory=list)
    outputs: list[str] = field(default_factory=list)
    seed: int | None = None
    started_at: str = field(default_factory=_now)
    finished_at: str | None = None
    artifact_hashes: dict[str, str] = field(default_factory=dict)

    def finish(self) -> None:
        self.finished_at = _now()
        for output in self.outputs:
            path = Path(output)
            if path.is_file():
                self.artifact_hashes[output] = _sha256(path)

    def write(self, directory: str | Path, name: str = "run_manifest.json") -> Path:
        if self.finished_at is None:
            self.finish()
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        path = directory / name
        payload = {
            "command": self.command,
            "config": self.config,
            "inputs": self.inputs,
            "outputs": self.outputs,
            "seed": self.seed,
            "started_at": self.started_at,
            "finished_at": self.finished_at,
            "artifact_hashes": self.artifact_hashes,
        }
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        return path
