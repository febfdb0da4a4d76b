"""Metrics, per-delta breakdowns, bootstrap significance, data-fraction curves.

Exact match (EM) is computed per target group: a target counts only when
every one of its samples is classified correctly. Bootstrap resampling
therefore also operates at the target level.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, NamedTuple, Sequence

import numpy as np

from tvcp import _kernels
from tvcp.dataset import Sample
from tvcp.errors import ContractError
from tvcp.schema import TvcpLabel


class DeltaBucket(NamedTuple):
    count: int
    accuracy: float


@dataclass
class EvalReport:
    """Headline metrics for one prediction set."""

    accuracy: float
    exact_match: float
    n_samples: int
    n_targets: int
    per_delta: dict[int, DeltaBucket] | None = None

    def to_json(self) -> dict:
        payload = {
            "accuracy": self.accuracy,
            "exact_match": self.exact_match,
            "n_samples": self.n_samples,
            "n_targets": self.n_targets,
        }
        if self.per_delta is not None:
            payload["per_delta"] = {
                str(delta): {"count": b.count, "accuracy": b.accuracy}
                for delta, b in sorted(self.per_delta.items())
            }
        return payload


Predictions = Mapping[str, TvcpLabel | None]


def compute_metrics(
    predictions: Predictions,
    golds: Mapping[str, TvcpLabel],
    grouping: Mapping[str, str],
) -> EvalReport:
    """Accuracy over samples plus exact match over target groups.

    ``predictions`` may map a sample to None (unparseable model output);
    such samples count as incorrect.
    """
    if set(predictions) != set(golds):
        raise ContractError("prediction and gold sample ids do not match")
    missing = [sid for sid in golds if sid not in grouping]
    if missing:
        raise ContractError(f"samples missing from grouping: {missing[:5]}")

    n_samples = len(golds)
    correct = {sid: predictions[sid] is golds[sid] for sid in golds}
    n_correct = sum(correct.values())

    targets: dict[str, bool] = {}
    for sid in golds:
        tid = grouping[sid]
        targets[tid] = targets.get(tid, True) and correct[sid]
    n_targets = len(targets)

    return EvalReport(
        accuracy=n_correct / n_samples if n_samples else 0.0,
        exact_match=sum(targets.values()) / n_targets if n_targets else 0.0,
        n_samples=n_samples,
        n_targets=n_targets,
    )


def per_delta_accuracy(
    predictions: Predictions, samples: Sequence[Sample]
) -> dict[int, DeltaBucket]:
    """Bucket samples by signed duration delta; per-bucket accuracy.

    Empty buckets are absent. Delta 0 holds exactly the gold-UNC samples.
    """
    counts: dict[int, int] = {}
    hits: dict[int, int] = {}
    for sample in samples:
        delta = sample.delta()
        counts[delta] = counts.get(delta, 0) + 1
        if predictions.get(sample.sample_id) is sample.label:
            hits[delta] = hits.get(delta, 0) + 1
    return {
        delta: DeltaBucket(count=n, accuracy=hits.get(delta, 0) / n)
        for delta, n in counts.items()
    }


def evaluate_predictions(predictions: Predictions, samples: Sequence[Sample]) -> EvalReport:
    """Full report (metrics + per-delta breakdown) against gold samples."""
    golds = {s.sample_id: s.label for s in samples}
    grouping = {s.sample_id: s.target_id for s in samples}
    report = compute_metrics(predictions, golds, grouping)
    report.per_delta = per_delta_accuracy(predictions, samples)
    return report


# -- paired bootstrap ---------------------------------------------------------

#: Per-target correctness: (number of correct samples, number of samples).
TargetCorrectness = Mapping[str, tuple[int, int]]


@dataclass
class BootstrapResult:
    p_value: float
    ci_low: float
    ci_high: float
    resamples: int
    metric: str
    observed_diff: float

    def to_json(self) -> dict:
        return {
            "p_value": self.p_value,
            "ci_low": self.ci_low,
            "ci_high": self.ci_high,
            "resamples": self.resamples,
            "metric": self.metric,
            "observed_diff": self.observed_diff,
        }


def per_target_correctness(
    predictions: Predictions,
    golds: Mapping[str, TvcpLabel],
    grouping: Mapping[str, str],
) -> dict[str, tuple[int, int]]:
    """Fold sample-level correctness into per-target (correct, total) counts."""
    out: dict[str, list[int]] = {}
    for sid, gold in golds.items():
        tid = grouping[sid]
        entry = out.setdefault(tid, [0, 0])
        entry[0] += int(predictions.get(sid) is gold)
        entry[1] += 1
    return {tid: (c, t) for tid, (c, t) in out.items()}


_CHUNK = 1000  # resamples per index block, bounds peak memory


def paired_bootstrap(
    a: TargetCorrectness,
    b: TargetCorrectness,
    metric: str = "em",
    resamples: int = 10_000,
    seed: int = 0,
    smoothing: bool = False,
) -> BootstrapResult:
    """Resample target groups with replacement and compare two systems.

    For each resample the metric difference metric(B) - metric(A) is
    computed; the p value is the fraction of resamples in which B does not
    outperform A (difference <= 0), and the interval is the 2.5/97.5
    percentile band of the differences. Groups are canonically ordered by
    their correctness values, making the result invariant to target id
    relabeling. ``smoothing`` applies add-one smoothing to the p value.
    """
    if resamples < 1:
        raise ContractError(f"resamples must be >= 1, got {resamples}")
    if metric not in ("em", "accuracy"):
        raise ContractError(f"unknown metric: {metric!r}")
    if set(a) != set(b):
        raise ContractError("A and B must cover identical target id sets")
    for tid in a:
        if a[tid][1] != b[tid][1]:
            raise ContractError(f"target {tid}: sample counts differ between A and B")

    pairs = sorted((a[tid][1], a[tid][0], b[tid][0]) for tid in a)
    den = np.array([p[0] for p in pairs], dtype=np.int64)
    num_a = np.array([p[1] for p in pairs], dtype=np.int64)
    num_b = np.array([p[2] for p in pairs], dtype=np.int64)
    if metric == "em":
        num_a = (num_a == den).astype(np.int64)
        num_b = (num_b == den).astype(np.int64)
        den = np.ones_like(den)

    n = len(pairs)
    rng = np.random.default_rng(seed)
    diffs = np.empty(resamples, dtype=np.float64)
    done = 0
    while done < resamples:
        take = min(_CHUNK, resamples - done)
        idx = rng.integers(0, n, size=(take, n), dtype=np.int64)
        diffs[done : done + take] = _kernels.bootstrap_diffs(num_a, num_b, den, idx)
        done += take

    n_not_better = int(np.count_nonzero(diffs <= 0.0))
    if smoothing:
        p = (n_not_better + 1) / (resamples + 1)
    else:
        p = n_not_better / resamples
    ci_low, ci_high = np.percentile(diffs, [2.5, 97.5])
    observed = float(num_b.sum() / den.sum() - num_a.sum() / den.sum())
    return BootstrapResult(
        p_value=float(p),
        ci_low=float(ci_low),
        ci_high=float(ci_high),
        resamples=resamples,
        metric=metric,
        observed_diff=observed,
    )


# -- data-fraction curve --------------------------------------------------


def data_fraction_curve(
    fractions: Sequence[float],
    samples: Sequence[Sample],
    plan,
    train_config,
    fold: int = 0,
) -> list[tuple[float, float, float]]:
    """Train once per fraction on nested train subsamples; fixed test subset.

    Returns (fraction, test accuracy, test EM) rows in input order.
    """
    from tvcp import training  # deferred: training depends on this module
    from tvcp.dataset import subsample_training_fraction

    if any(not 0.0 < f <= 1.0 for f in fractions):
        raise ContractError(f"fractions must lie in (0, 1]: {list(fractions)}")
    rows = []
    test_samples = plan.subset_samples(samples, fold, "test")
    for fraction in fractions:
        sub = subsample_training_fraction(plan, fraction, seed=train_config.seed)
        train_samples = sub.subset_samples(samples, fold, "train")
        val_samples = sub.subset_samples(samples, fold, "val")
        result = training.train(train_config, train_samples, val_samples)
        predictions = training.evaluate_split(result.checkpoint, test_samples)
        report = evaluate_predictions(
            {sid: p.label for sid, p in predictions.items()}, test_samples
        )
        rows.append((fraction, report.accuracy, report.exact_match))
    return rows


# -- report files -------------------------------------------------------------


def write_per_delta_csv(per_delta: Mapping[int, DeltaBucket], path: str | Path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["delta", "count", "accuracy"])
        for delta in sorted(per_delta):
            bucket = per_delta[delta]
            writer.writerow([delta, bucket.count, repr(bucket.accuracy)])


def write_fraction_curve_csv(
    rows: Iterable[tuple[float, float, float]], path: str | Path
) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["fraction", "accuracy", "em"])
        for fraction, accuracy, em in rows:
            writer.writerow([repr(fraction), repr(accuracy), repr(em)])
