"""Pre-processing chain for candidate statements.

Stages run in configured order and short-circuit at the first failure, so a
statement rejected at stage i carries no scores from later stages. Scoring
stages (the stationarity ensemble) record their value in the verdict's
``scores`` mapping for later candidate selection.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence

from tvcp.errors import ContractError, FilterConfigError


@dataclass
class FilterVerdict:
    """Per-statement outcome of a filter chain run."""

    statement_id: str
    passed: bool
    failing_stage: str | None = None
    scores: dict[str, float] = field(default_factory=dict)


@dataclass(frozen=True)
class ScorerHandle:
    """Named scoring function mapping statement text to [0, 1].

    Higher scores mean the statement more likely carries temporal
    information (i.e. is less likely stationary).
    """

    name: str
    score: Callable[[str], float]


# -- built-in heuristic scorer -------------------------------------------

_TENSE_AUXILIARIES = {
    "am", "is", "are", "was", "were", "be", "been", "being",
    "will", "gonna", "going", "about", "until", "till",
}
_TIME_NOUNS = {
    "now", "today", "tonight", "tomorrow", "yesterday", "currently", "soon",
    "later", "minute", "minutes", "hour", "hours", "day", "days", "week",
    "weeks", "month", "morning", "afternoon", "evening", "weekend", "moment",
}

_WORD_RE = re.compile(r"[a-z']+")


def temporal_cue_score(text: str) -> float:
    """Count tense auxiliaries, time nouns, and progressive forms; cap at 1.

    Deliberately crude: it stands in for trained stationarity classifiers
    whose weights are external to this package.
    """
    words = _WORD_RE.findall(text.lower())
    hits = 0
    for word in words:
        if word in _TENSE_AUXILIARIES or word in _TIME_NOUNS:
            hits += 1
        elif word.endswith("ing") and len(word) > 4:
            hits += 1
    return min(1.0, hits / 4.0)


DEFAULT_SCORER = ScorerHandle(name="temporal_cues", score=temporal_cue_score)


def stationarity_ensemble_score(text: str, scorers: Sequence[ScorerHandle]) -> float:
    """Arithmetic mean of member scores; each member must stay in [0, 1]."""
    if not scorers:
        raise ContractError("at least one scorer is required")
    total = 0.0
    for scorer in scorers:
        value = float(scorer.score(text))
        if not 0.0 <= value <= 1.0:
            raise ContractError(
                f"scorer {scorer.name!r} returned out-of-range score {value!r}"
            )
        total += value
    return total / len(scorers)


# -- chain stages ----------------------------------------------------------

_REJECT_PATTERNS = [
    re.compile(r"^\s*rt\b", re.IGNORECASE),          # repost marker
    re.compile(r"^\s*@\w"),                           # reply marker
    re.compile(r"https?://", re.IGNORECASE),
    re.compile(r"\bt\.co/", re.IGNORECASE),
    re.compile(r"\bpic\.twitter\.com", re.IGNORECASE),
    re.compile(r"\[(media|photo|video|gif)\]", re.IGNORECASE),
]


class Stage:
    """One chain link: returns True to keep the statement."""

    name: str = "stage"

    def check(self, text: str, verdict: FilterVerdict) -> bool:
        raise NotImplementedError


class SelfContainednessStage(Stage):
    """Reject replies, reposts, media placeholders, and link-bearing statements."""

    name = "self_containedness"

    def check(self, text: str, verdict: FilterVerdict) -> bool:
        return not any(p.search(text) for p in _REJECT_PATTERNS)


class LengthBoundsStage(Stage):
    name = "length_bounds"

    def __init__(self, min_words: int = 4, max_words: int = 50):
        self.min_words = min_words
        self.max_words = max_words

    def check(self, text: str, verdict: FilterVerdict) -> bool:
        n = len(text.split())
        return self.min_words <= n <= self.max_words


class BlockedWordsStage(Stage):
    name = "blocked_words"

    def __init__(self, words: Iterable[str] = (), path: str | None = None):
        terms = {w.strip().lower() for w in words if w.strip()}
        if path:
            for line in Path(path).read_text(encoding="utf-8").splitlines():
                if line.strip():
                    terms.add(line.strip().lower())
        self.words = terms

    def check(self, text: str, verdict: FilterVerdict) -> bool:
        if not self.words:
            return True
        tokens = set(_WORD_RE.findall(text.lower()))
        return not (tokens & self.words)


class StationarityScoreStage(Stage):
    """Record the ensemble score; optionally reject below a threshold."""

    name = "stationarity_score"

    def __init__(self, scorers: Sequence[ScorerHandle] | None = None, min_score: float = 0.0):
        self.scorers = list(scorers) if scorers else [DEFAULT_SCORER]
        self.min_score = min_score

    def check(self, text: str, verdict: FilterVerdict) -> bool:
        value = stationarity_ensemble_score(text, self.scorers)
        verdict.scores[self.name] = value
        return value >= self.min_score


_STAGE_BUILDERS: dict[str, Callable[..., Stage]] = {
    "self_containedness": SelfContainednessStage,
    "length_bounds": LengthBoundsStage,
    "blocked_words": BlockedWordsStage,
    "stationarity_score": StationarityScoreStage,
}


def default_chain() -> list[Stage]:
    return [
        SelfContainednessStage(),
        LengthBoundsStage(),
        BlockedWordsStage(),
        StationarityScoreStage(),
    ]


def build_chain(config: dict) -> list[Stage]:
    """Instantiate stages from a decoded chain config.

    Config shape: ``{"stages": [{"name": ..., <params>}, ...]}``; an absent
    or empty stage list yields the default chain.
    """
    stage_specs = config.get("stages")
    if stage_specs is None:
        return default_chain()
    chain = []
    for spec in stage_specs:
        spec = dict(spec)
        name = spec.pop("name", None)
        builder = _STAGE_BUILDERS.get(name)
        if builder is None:
            raise FilterConfigError(f"unknown filter stage: {name!r}")
        try:
            chain.append(builder(**spec))
        except TypeError as exc:
            raise FilterConfigError(f"bad parameters for stage {name!r}: {exc}") from None
    return chain


def load_chain_config(path: str | Path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))


def apply_filter_chain(
    statements: Sequence[tuple[str, str]], chain: Sequence[Stage] | None = None
) -> list[FilterVerdict]:
    """Run (statement_id, text) pairs through the chain, order-stable."""
    if chain is None:
        chain = default_chain()
    verdicts = []
    for statement_id, text in statements:
        verdict = FilterVerdict(statement_id=statement_id, passed=True)
        for stage in chain:
            if not stage.check(text, verdict):
                verdict.passed = False
                verdict.failing_stage = stage.name
                break
        verdicts.append(verdict)
    return verdicts


def select_candidates(
    verdicts: Sequence[FilterVerdict], k: int, score_key: str = "stationarity_score"
) -> list[str]:
    """Top-k passing statement ids by recorded score, ties by id ascending."""
    if k < 0:
        raise ContractError(f"k must be >= 0, got {k}")
    passing = [v for v in verdicts if v.passed]
    ranked = sorted(passing, key=lambda v: (-v.scores.get(score_key, 0.0), v.statement_id))
    return [v.statement_id for v in ranked[:k]]
