"""Cached, concurrent, retrying evaluation of a chat endpoint on sample pairs.

Responses are cached one file per sample, keyed by (sample id, prompt
hash); cached samples never reach the client again. Responses that fail to
parse are scored incorrect and reported separately rather than dropped.
"""

from __future__ import annotations

import json
import re
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from threading import Lock
from typing import Sequence

from tvcp.dataset import Sample
from tvcp.errors import ContractError
from tvcp.evaluation import EvalReport, evaluate_predictions
from tvcp.llm.client import ChatClient
from tvcp.llm.parse import ParsedPrediction, parse_response
from tvcp.llm.prompts import build_prompt, prompt_hash

_SAFE_RE = re.compile(r"[^A-Za-z0-9._-]")


def _cache_file(cache_dir: Path, sample_id: str) -> Path:
    return cache_dir / f"{_SAFE_RE.sub('_', sample_id)}.json"


@dataclass
class LlmRunStats:
    client_calls: int = 0
    cache_hits: int = 0
    retries: int = 0
    unparsed: int = 0
    failures: list[dict] = field(default_factory=list)


@dataclass
class LlmEvalResult:
    predictions: list[ParsedPrediction]
    report: EvalReport
    stats: LlmRunStats


def run_llm_eval(
    samples: Sequence[Sample],
    client: ChatClient,
    cache_dir: str | Path,
    concurrency: int = 4,
    max_retries: int = 3,
    backoff: float = 0.5,
    scale_hint: bool = False,
) -> LlmEvalResult:
    """Evaluate the endpoint on every sample; returns parses, report, stats.

    ``max_retries`` counts retries after the first attempt; waits grow as
    ``backoff * 2**attempt`` seconds. A sample whose retries are exhausted
    becomes a failure record (scored incorrect) and the run continues.
    """
    if concurrency < 1:
        raise ContractError(f"concurrency must be >= 1, got {concurrency}")
    cache_dir = Path(cache_dir)
    cache_dir.mkdir(parents=True, exist_ok=True)

    stats = LlmRunStats()
    lock = Lock()
    raw_by_id: dict[str, str | None] = {}
    prompts = {s.sample_id: build_prompt(s, scale_hint=scale_hint) for s in samples}
    hashes = {sid: prompt_hash(msgs) for sid, msgs in prompts.items()}

    pending: list[Sample] = []
    for sample in samples:
        path = _cache_file(cache_dir, sample.sample_id)
        if path.exists():
            record = json.loads(path.read_text(encoding="utf-8"))
            if record.get("prompt_hash") == hashes[sample.sample_id]:
                raw_by_id[sample.sample_id] = record["raw_response"]
                stats.cache_hits += 1
                continue
        pending.append(sample)

    def fetch(sample: Sample) -> None:
        sid = sample.sample_id
        last_error: Exception | None = None
        for attempt in range(max_retries + 1):
            try:
                raw = client.complete(prompts[sid])
                break
            except Exception as exc:
                last_error = exc
                if attempt == max_retries:
                    with lock:
                        stats.failures.append({"sample_id": sid, "error": str(exc)})
                        raw_by_id[sid] = None
                    return
                with lock:
                    stats.retries += 1
                time.sleep(backoff * (2**attempt))
        with lock:
            stats.client_calls += 1
            raw_by_id[sid] = raw
        _cache_file(cache_dir, sid).write_text(
            json.dumps(
                {
                    "sample_id": sid,
                    "prompt_hash": hashes[sid],
                    "raw_response": raw,
                    "timestamp": time.time(),
                },
                ensure_ascii=False,
            )
            + "\n",
            encoding="utf-8",
        )
        del last_error

    if pending:
        with ThreadPoolExecutor(max_workers=concurrency) as pool:
            list(pool.map(fetch, pending))

    predictions: list[ParsedPrediction] = []
    label_by_id = {}
    for sample in samples:
        raw = raw_by_id.get(sample.sample_id)
        if raw is None:
            parsed = ParsedPrediction(
                sample_id=sample.sample_id, raw="", explanation=None,
                label=None, status="malformed",
            )
        else:
            parsed = parse_response(raw, sample_id=sample.sample_id)
        if parsed.status != "ok":
            stats.unparsed += 1
        predictions.append(parsed)
        label_by_id[sample.sample_id] = parsed.label

    report = evaluate_predictions(label_by_id, list(samples))
    return LlmEvalResult(predictions=predictions, report=report, stats=stats)
