"""Append-only event log backing the annotation service.

Events are the single source of truth; all derived state is a fold over
the log (see :mod:`tvcp.service.state`). When a path is configured each
event is also written as one JSON line, so a service restart replays the
exact history.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator


@dataclass(frozen=True)
class Event:
    seq: int
    kind: str
    payload: dict
    timestamp: float

    def to_json(self) -> dict:
        return {"seq": self.seq, "kind": self.kind, "payload": self.payload,
                "timestamp": self.timestamp}

    @classmethod
    def from_json(cls, record: dict) -> "Event":
        return cls(
            seq=int(record["seq"]),
            kind=record["kind"],
            payload=record["payload"],
            timestamp=float(record["timestamp"]),
        )


class EventLog:
    """Monotonic event sequence with optional JSONL persistence."""

    def __init__(self, path: str | Path | None = None):
        self.path = Path(path) if path is not None else None
        self.events: list[Event] = []
        if self.path is not None and self.path.exists():
            for line in self.path.read_text(encoding="utf-8").splitlines():
                if line.strip():
                    self.events.append(Event.from_json(json.loads(line)))

    def __len__(self) -> int:
        return len(self.events)

    def __iter__(self) -> Iterator[Event]:
        return iter(self.events)

    def append(self, kind: str, payload: dict) -> Event:
        event = Event(
            seq=len(self.events) + 1, kind=kind, payload=payload, timestamp=time.time()
        )
        self.events.append(event)
        if self.path is not None:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with self.path.open("a", encoding="utf-8") as fh:
                fh.write(json.dumps(event.to_json(), ensure_ascii=False) + "\n")
        return event
