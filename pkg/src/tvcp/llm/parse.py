"""Response parsing: explanation block extraction and class-word recovery."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Literal

from tvcp.schema import TvcpLabel

_BLOCK_RE = re.compile(r"```(.*?)```", re.DOTALL)
_CLASS_RE = re.compile(r"\b(decreased|neutral|increased)\b", re.IGNORECASE)

_WORD_TO_LABEL = {
    "decreased": TvcpLabel.DEC,
    "neutral": TvcpLabel.UNC,
    "increased": TvcpLabel.INC,
}

ParseStatus = Literal["ok", "missing_class", "malformed"]


@dataclass
class ParsedPrediction:
    sample_id: str
    raw: str
    explanation: str | None
    label: TvcpLabel | None
    status: ParseStatus


def parse_response(raw: str, sample_id: str = "") -> ParsedPrediction:
    """Extract the explanation block and the answer class from a response.

    The first triple-backtick block is the explanation. The class is the
    LAST case-insensitive occurrence of Decreased/Neutral/Increased outside
    that block (reasoning inside the block may mention several classes).
    """
    if not raw or not raw.strip():
        return ParsedPrediction(
            sample_id=sample_id, raw=raw, explanation=None, label=None, status="malformed"
        )
    explanation = None
    outside = raw
    match = _BLOCK_RE.search(raw)
    if match:
        explanation = match.group(1).strip() or None
        outside = raw[: match.start()] + raw[match.end() :]
    hits = _CLASS_RE.findall(outside)
    if not hits:
        return ParsedPrediction(
            sample_id=sample_id, raw=raw, explanation=explanation, label=None,
            status="missing_class",
        )
    label = _WORD_TO_LABEL[hits[-1].lower()]
    return ParsedPrediction(
        sample_id=sample_id, raw=raw, explanation=explanation, label=label, status="ok"
    )
