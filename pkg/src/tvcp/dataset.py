"""Dataset tooling: ingestion, vote aggregation, grouped splits, synthesis.

File format: line-delimited JSON, one record per line, UTF-8, with fields
``sample_id``, ``target_id``, ``target_text``, ``followup_text``,
``tvd_original``, ``tvd_updated``, ``label``. Unknown fields are preserved
on round-trip.
"""

from __future__ import annotations

import json
import math
import random
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Literal

from tvcp.errors import (
    ContractError,
    DataValidationError,
    RecordParseError,
    SchemaError,
)
from tvcp.schema import (
    DurationClass,
    StatementStamp,
    TvcpLabel,
    change_delta,
    class_of_token,
    derive_tvcp_label,
    parse_label,
)

#: Vote sentinel for statements without time-sensitive information.
STATIONARY = "stationary"

#: Duration classes that disqualify a target statement when they win the vote.
BOUNDARY_CLASSES = frozenset({DurationClass.LT_1M, DurationClass.GT_1MO})

_REQUIRED_FIELDS = (
    "sample_id",
    "target_id",
    "target_text",
    "followup_text",
    "tvd_original",
    "tvd_updated",
    "label",
)


@dataclass
class TargetStatement:
    """A candidate target statement moving through the annotation workflow.

    Holds 0-3 duration votes; a resolved duration exists exactly when the
    statement is accepted and is never a boundary class.
    """

    target_id: str
    statement: StatementStamp
    votes: list[str] = field(default_factory=list)
    resolved: DurationClass | None = None
    status: Literal["pending", "accepted", "discarded"] = "pending"

    def __post_init__(self) -> None:
        if len(self.votes) > 3:
            raise ContractError(f"{self.target_id}: at most 3 votes, got {len(self.votes)}")
        if (self.resolved is not None) != (self.status == "accepted"):
            raise ContractError(
                f"{self.target_id}: resolved duration must be present exactly "
                f"when accepted (status={self.status!r})"
            )
        if self.resolved is not None and self.resolved in BOUNDARY_CLASSES:
            raise ContractError(
                f"{self.target_id}: accepted duration cannot be the boundary "
                f"class {self.resolved.token}"
            )


@dataclass
class Sample:
    """One classification instance: target/follow-up pair with durations and label."""

    sample_id: str
    target_id: str
    target_text: str
    followup_text: str
    original: DurationClass
    updated: DurationClass
    label: TvcpLabel
    extra: dict = field(default_factory=dict)

    def delta(self) -> int:
        return change_delta(self.original, self.updated)

    def to_record(self) -> dict:
        record = dict(self.extra)
        record.update(
            sample_id=self.sample_id,
            target_id=self.target_id,
            target_text=self.target_text,
            followup_text=self.followup_text,
            tvd_original=self.original.token,
            tvd_updated=self.updated.token,
            label=self.label.value,
        )
        return record


def sample_violations(sample: Sample) -> list[str]:
    """Invariant breaches for a single sample (empty list = valid)."""
    problems = []
    if not sample.target_text.strip():
        problems.append(f"{sample.sample_id}: empty target text")
    if not sample.followup_text.strip():
        problems.append(f"{sample.sample_id}: empty follow-up text")
    if sample.original in BOUNDARY_CLASSES:
        problems.append(
            f"{sample.sample_id}: original duration {sample.original.token} "
            "is outside the accepted target range"
        )
    expected = derive_tvcp_label(sample.original, sample.updated)
    if sample.label is not expected:
        problems.append(
            f"{sample.sample_id}: label inconsistent "
            f"(stated {sample.label.value}, durations imply {expected.value})"
        )
    return problems


@dataclass
class ValidationReport:
    """Outcome of :func:`load_and_validate`."""

    n_records: int
    n_loaded: int
    n_dropped: int
    errors: list[str] = field(default_factory=list)


def parse_record(record: dict) -> Sample:
    """Build a Sample from a decoded record dict, preserving unknown fields."""
    missing = [k for k in _REQUIRED_FIELDS if k not in record]
    if missing:
        raise SchemaError(f"missing fields: {', '.join(missing)}")
    for key in _REQUIRED_FIELDS:
        if not isinstance(record[key], str):
            raise SchemaError(f"field {key!r} must be a string")
    extra = {k: v for k, v in record.items() if k not in _REQUIRED_FIELDS}
    return Sample(
        sample_id=record["sample_id"],
        target_id=record["target_id"],
        target_text=record["target_text"],
        followup_text=record["followup_text"],
        original=class_of_token(record["tvd_original"]),
        updated=class_of_token(record["tvd_updated"]),
        label=parse_label(record["label"]),
        extra=extra,
    )


def group_violations(samples: Iterable[Sample]) -> dict[str, str]:
    """Per-target group problems: wrong size or repeated labels."""
    by_target: dict[str, list[Sample]] = defaultdict(list)
    for s in samples:
        by_target[s.target_id].append(s)
    problems = {}
    for target_id, group in by_target.items():
        if len(group) != 3:
            problems[target_id] = (
                f"target {target_id}: incomplete group ({len(group)} samples, expected 3)"
            )
            continue
        labels = {s.label for s in group}
        if len(labels) != 3:
            problems[target_id] = (
                f"target {target_id}: duplicate labels within group "
                f"({sorted(s.label.value for s in group)})"
            )
    return problems


def load_and_validate(
    path: str | Path, mode: Literal["strict", "lenient"] = "strict"
) -> tuple[list[Sample], ValidationReport]:
    """Load a dataset file and enforce sample/group invariants.

    Strict mode raises on the first class of problem found (parse errors
    first, then record invariants, then group invariants). Lenient mode
    drops offending records (whole groups for group-level problems) and
    reports every issue.
    """
    if mode not in ("strict", "lenient"):
        raise ContractError(f"unknown validation mode: {mode!r}")
    path = Path(path)
    errors: list[str] = []
    samples: list[Sample] = []
    seen_ids: set[str] = set()
    n_records = 0
    with path.open(encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            n_records += 1
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                if mode == "strict":
                    raise RecordParseError(line_no, f"invalid JSON: {exc}") from None
                errors.append(f"line {line_no}: invalid JSON")
                continue
            try:
                sample = parse_record(record)
            except SchemaError as exc:
                if mode == "strict":
                    raise RecordParseError(line_no, str(exc)) from None
                errors.append(f"line {line_no}: {exc}")
                continue
            if sample.sample_id in seen_ids:
                message = f"{sample.sample_id}: duplicate sample id"
                if mode == "strict":
                    raise DataValidationError([message])
                errors.append(message)
                continue
            seen_ids.add(sample.sample_id)
            problems = sample_violations(sample)
            if problems:
                if mode == "strict":
                    raise DataValidationError(problems)
                errors.extend(problems)
                continue
            samples.append(sample)

    group_problems = group_violations(samples)
    if group_problems:
        if mode == "strict":
            raise DataValidationError(sorted(group_problems.values()))
        errors.extend(sorted(group_problems.values()))
        samples = [s for s in samples if s.target_id not in group_problems]

    report = ValidationReport(
        n_records=n_records,
        n_loaded=len(samples),
        n_dropped=n_records - len(samples),
        errors=errors,
    )
    return samples, report


def write_samples(samples: Iterable[Sample], path: str | Path) -> int:
    """Write samples as line-delimited JSON; returns the record count."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    n = 0
    with path.open("w", encoding="utf-8") as fh:
        for sample in samples:
            fh.write(json.dumps(sample.to_record(), ensure_ascii=False) + "\n")
            n += 1
    return n


# -- vote aggregation ----------------------------------------------------

#: Everything a duration vote may carry.
VOTE_VALUES = tuple(c.token for c in DurationClass) + (STATIONARY,)


@dataclass(frozen=True)
class AggregateResult:
    """Outcome of aggregating 2-3 duration votes for one statement."""

    outcome: Literal["accepted", "discarded", "needs_third_vote"]
    duration: DurationClass | None = None
    reason: str | None = None


def aggregate_votes(votes: list[str]) -> AggregateResult:
    """Resolve a statement's duration from its votes.

    Two agreeing votes accept the class; disagreement requests a third
    vote; with three votes the majority wins. A winning boundary class
    (shortest/longest) or the stationary sentinel discards the statement,
    as does a three-way disagreement.
    """
    if not 2 <= len(votes) <= 3:
        raise ContractError(f"expected 2 or 3 votes, got {len(votes)}")
    for vote in votes:
        if vote not in VOTE_VALUES:
            raise ContractError(f"unknown vote value: {vote!r}")

    counts = Counter(votes)
    winner, winner_count = counts.most_common(1)[0]
    if len(votes) == 2:
        if winner_count < 2:
            return AggregateResult("needs_third_vote")
    elif winner_count < 2:
        return AggregateResult("discarded", reason="no_majority")

    if winner == STATIONARY or class_of_token(winner) in BOUNDARY_CLASSES:
        return AggregateResult("discarded", reason="boundary")
    return AggregateResult("accepted", duration=class_of_token(winner))


# -- splits ----------------------------------------------------------------

Subset = Literal["train", "val", "test"]

#: Overall subset proportions targeted by the cross-validation plan.
SPLIT_FRACTIONS = (0.7, 0.1, 0.2)


@dataclass
class SplitPlan:
    """Grouped cross-validation plan.

    ``assignment[fold]`` maps target id -> subset name. Plans produced by
    :func:`split_grouped_kfold` assign every target in every fold; plans
    derived via :func:`subsample_training_fraction` omit dropped train
    targets instead.
    """

    folds: int
    seed: int
    assignment: list[dict[str, Subset]]
    fractions: tuple[float, float, float] = SPLIT_FRACTIONS

    def subset_targets(self, fold: int, subset: Subset) -> list[str]:
        return sorted(t for t, s in self.assignment[fold].items() if s == subset)

    def subset_samples(self, samples: Iterable[Sample], fold: int, subset: Subset) -> list[Sample]:
        fold_map = self.assignment[fold]
        return [s for s in samples if fold_map.get(s.target_id) == subset]

    def to_json(self) -> dict:
        return {
            "folds": self.folds,
            "seed": self.seed,
            "fractions": list(self.fractions),
            "assignment": {
                str(fold): {
                    subset: self.subset_targets(fold, subset)
                    for subset in ("train", "val", "test")
                }
                for fold in range(self.folds)
            },
        }

    @classmethod
    def from_json(cls, payload: dict) -> "SplitPlan":
        folds = int(payload["folds"])
        assignment: list[dict[str, Subset]] = []
        for fold in range(folds):
            fold_map: dict[str, Subset] = {}
            for subset, targets in payload["assignment"][str(fold)].items():
                for target in targets:
                    fold_map[target] = subset  # type: ignore[assignment]
            assignment.append(fold_map)
        return cls(
            folds=folds,
            seed=int(payload["seed"]),
            assignment=assignment,
            fractions=tuple(payload["fractions"]),  # type: ignore[arg-type]
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=2) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "SplitPlan":
        return cls.from_json(json.loads(Path(path).read_text(encoding="utf-8")))


def _chunk_evenly(items: list[str], parts: int) -> list[list[str]]:
    """Split into ``parts`` contiguous chunks with sizes differing by at most 1."""
    n = len(items)
    base, remainder = divmod(n, parts)
    chunks = []
    start = 0
    for i in range(parts):
        size = base + (1 if i < remainder else 0)
        chunks.append(items[start : start + size])
        start += size
    return chunks


def split_grouped_kfold(samples: list[Sample], folds: int = 5, seed: int = 0) -> SplitPlan:
    """Partition targets into ``folds`` test groups; remainder splits 7:1 train:val.

    All samples of a target share one subset in every fold, and across folds
    the test groups partition the target ids.
    """
    if folds < 2:
        raise ContractError(f"folds must be >= 2, got {folds}")
    targets = sorted({s.target_id for s in samples})
    if len(targets) < folds:
        raise ContractError(f"{len(targets)} targets cannot fill {folds} folds")
    rng = random.Random(seed)
    shuffled = targets[:]
    rng.shuffle(shuffled)
    test_groups = _chunk_evenly(shuffled, folds)

    assignment: list[dict[str, Subset]] = []
    for fold in range(folds):
        test_ids = set(test_groups[fold])
        rest = [t for t in shuffled if t not in test_ids]
        # 7:1 train:val over the non-test targets (0.1 / 0.8 of the whole).
        n_val = round(len(rest) / 8)
        if len(rest) >= 2:
            n_val = max(1, n_val)
        fold_map: dict[str, Subset] = {t: "test" for t in test_ids}
        for t in rest[: len(rest) - n_val]:
            fold_map[t] = "train"
        for t in rest[len(rest) - n_val :]:
            fold_map[t] = "val"
        assignment.append(fold_map)
    return SplitPlan(folds=folds, seed=seed, assignment=assignment)


def holdout_split(
    samples: list[Sample], fractions: tuple[float, float, float] = (0.8, 0.1, 0.1), seed: int = 0
) -> SplitPlan:
    """Single predefined grouped split (used by hyperparameter sweeps)."""
    if not math.isclose(sum(fractions), 1.0, abs_tol=1e-9):
        raise ContractError(f"fractions must sum to 1, got {fractions}")
    targets = sorted({s.target_id for s in samples})
    if len(targets) < 3:
        raise ContractError("need at least 3 targets for a holdout split")
    rng = random.Random(seed)
    shuffled = targets[:]
    rng.shuffle(shuffled)
    n = len(shuffled)
    n_train = round(n * fractions[0])
    n_val = max(1, round(n * fractions[1]))
    n_train = min(n_train, n - n_val - 1)
    fold_map: dict[str, Subset] = {}
    for t in shuffled[:n_train]:
        fold_map[t] = "train"
    for t in shuffled[n_train : n_train + n_val]:
        fold_map[t] = "val"
    for t in shuffled[n_train + n_val :]:
        fold_map[t] = "test"
    return SplitPlan(folds=1, seed=seed, assignment=[fold_map], fractions=fractions)


def subsample_training_fraction(plan: SplitPlan, fraction: float, seed: int = 0) -> SplitPlan:
    """Keep ``ceil(fraction * n_train)`` whole train groups per fold.

    Retained sets are nested across fractions for a fixed seed: the ranking
    of train targets depends only on (seed, fold), so smaller fractions are
    prefixes of larger ones. Validation and test subsets are untouched.
    """
    if not 0.0 < fraction <= 1.0:
        raise ContractError(f"fraction must be in (0, 1], got {fraction}")
    assignment: list[dict[str, Subset]] = []
    for fold in range(plan.folds):
        fold_map = dict(plan.assignment[fold])
        train_ids = sorted(t for t, subset in fold_map.items() if subset == "train")
        rng = random.Random(f"{seed}:{fold}")
        order = train_ids[:]
        rng.shuffle(order)
        keep = set(order[: math.ceil(fraction * len(train_ids))])
        for t in train_ids:
            if t not in keep:
                del fold_map[t]
        assignment.append(fold_map)
    return SplitPlan(
        folds=plan.folds, seed=plan.seed, assignment=assignment, fractions=plan.fractions
    )


# -- descriptive statistics -------------------------------------------------


def delta_distribution(samples: Iterable[Sample]) -> dict[int, int]:
    """Histogram of signed change deltas."""
    return dict(Counter(s.delta() for s in samples))


# -- synthetic data -----------------------------------------------------------

_ACTIVITIES: list[tuple[str, DurationClass]] = [
    ("I am brewing a fresh pot of coffee", DurationClass.M1_5M),
    ("Reheating yesterday's soup on the stove", DurationClass.M5_15M),
    ("I am walking the dog around the block", DurationClass.M15_45M),
    ("Sitting in the waiting room at the dentist", DurationClass.M15_45M),
    ("I am driving home from work", DurationClass.M45_2H),
    ("Baking sourdough bread this afternoon", DurationClass.M45_2H),
    ("We are watching the new heist movie", DurationClass.H2_6H),
    ("Painting the fence in the backyard", DurationClass.H2_6H),
    ("Road tripping to the coast with friends", DurationClass.GT_6H),
    ("I am fasting before tomorrow's blood test", DurationClass.GT_6H),
    ("Our kitchen renovation starts today", DurationClass.D1_3D),
    ("Hosting my cousins over the long weekend", DurationClass.D1_3D),
    ("I am on jury duty this week", DurationClass.D3_7D),
    ("The garden seedlings are sprouting", DurationClass.D3_7D),
    ("Training for the half marathon next month", DurationClass.W1_4W),
    ("My cast stays on until the follow-up scan", DurationClass.W1_4W),
    ("Getting the car inspected at the garage", DurationClass.M45_2H),
    ("I am queuing for concert tickets", DurationClass.M15_45M),
    ("Deep cleaning the apartment today", DurationClass.H2_6H),
    ("We are moving boxes into the new place", DurationClass.D1_3D),
]

_DEC_CUES = [
    "it just got cancelled",
    "we are almost done already",
    "turns out it wraps up early",
    "they called it off",
    "finished way sooner than planned",
    "the rest was scrapped",
    "we cut it short",
    "only a tiny bit left now",
    "someone else took over the last part",
    "it ended ahead of schedule",
]

_UNC_CUES = [
    "the weather is lovely today",
    "my playlist is full of classics",
    "coffee refills are free here",
    "saw a cute corgi on the way",
    "my phone case is new",
    "the neighbors repainted their door",
    "thinking about dinner options",
    "this song is stuck in my head",
    "the sky looks amazing tonight",
    "found a coin on the sidewalk",
]

_INC_CUES = [
    "it got postponed again",
    "this will take much longer than expected",
    "they added a whole extra stage",
    "we are stuck in a massive delay",
    "the schedule just doubled",
    "now there is a second round to do",
    "we have to redo a big chunk",
    "supplies ran out so everything is on hold",
    "the queue barely moved for ages",
    "they extended it by a lot",
]

_SUFFIXES = ["", " honestly", " by the way", " ugh", " believe it or not", " for real"]

_CUES = {TvcpLabel.DEC: _DEC_CUES, TvcpLabel.UNC: _UNC_CUES, TvcpLabel.INC: _INC_CUES}


def synth_generate(n_targets: int, seed: int = 0) -> list[Sample]:
    """Generate a desk-scale synthetic dataset: 3 samples per target, one per label.

    Follow-up texts carry label-specific cue phrases, so the task is
    learnable from text alone; durations shift 1-3 classes in the direction
    of the label, clamped to the scale ends.
    """
    if n_targets < 1:
        raise ContractError(f"n_targets must be >= 1, got {n_targets}")
    rng = random.Random(seed)
    samples: list[Sample] = []
    for i in range(n_targets):
        target_id = f"t{i:05d}"
        text, base = _ACTIVITIES[rng.randrange(len(_ACTIVITIES))]
        for label in (TvcpLabel.DEC, TvcpLabel.UNC, TvcpLabel.INC):
            cue = _CUES[label][rng.randrange(len(_CUES[label]))]
            followup = cue + _SUFFIXES[rng.randrange(len(_SUFFIXES))]
            shift = rng.randint(1, 3)
            if label is TvcpLabel.DEC:
                updated = DurationClass(max(0, int(base) - shift))
            elif label is TvcpLabel.INC:
                updated = DurationClass(min(10, int(base) + shift))
            else:
                updated = base
            samples.append(
                Sample(
                    sample_id=f"{target_id}-{label.value.lower()}",
                    target_id=target_id,
                    target_text=text,
                    followup_text=followup,
                    original=base,
                    updated=updated,
                    label=label,
                )
            )
    return samples
