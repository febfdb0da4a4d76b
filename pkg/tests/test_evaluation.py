"""Metrics against brute-force recounts; bootstrap calibration basics."""

import random

import numpy as np
import pytest

from tvcp import _kernels
from tvcp.dataset import Sample, synth_generate
from tvcp.errors import ContractError
from tvcp.evaluation import (
    BootstrapResult,
    compute_metrics,
    evaluate_predictions,
    paired_bootstrap,
    per_delta_accuracy,
    per_target_correctness,
)
from tvcp.schema import LABELS, DurationClass, TvcpLabel


def brute_force_metrics(predictions, golds, grouping):
    """Independent recount: accuracy by samples, EM by fully-correct targets."""
    n_correct = sum(1 for sid in golds if predictions[sid] is golds[sid])
    targets = sorted(set(grouping.values()))
    n_exact = 0
    for tid in targets:
        members = [sid for sid in golds if grouping[sid] == tid]
        if all(predictions[sid] is golds[sid] for sid in members):
            n_exact += 1
    return n_correct / len(golds), n_exact / len(targets)


def test_metrics_counting_example():
    golds = {f"t{i}-{k}": TvcpLabel.UNC for i in range(2) for k in range(3)}
    grouping = {sid: sid.split("-")[0] for sid in golds}
    predictions = dict(golds)
    predictions["t0-1"] = TvcpLabel.INC  # one miss inside target t0
    report = compute_metrics(predictions, golds, grouping)
    assert report.accuracy == pytest.approx(5 / 6)
    assert report.exact_match == pytest.approx(1 / 2)
    assert report.n_samples == 6 and report.n_targets == 2


def test_metrics_all_correct():
    samples = synth_generate(4, seed=0)
    predictions = {s.sample_id: s.label for s in samples}
    report = evaluate_predictions(predictions, samples)
    assert report.accuracy == 1.0 and report.exact_match == 1.0


def test_metrics_match_bruteforce_on_random_configurations():
    rng = random.Random(1234)
    for trial in range(60):
        n_targets = rng.randint(1, 30)
        golds, grouping, predictions = {}, {}, {}
        for t in range(n_targets):
            for k in range(rng.randint(1, 4)):  # ragged groups too
                sid = f"t{t}-{k}"
                golds[sid] = rng.choice(LABELS)
                grouping[sid] = f"t{t}"
                predictions[sid] = rng.choice(LABELS + (None,))
        report = compute_metrics(predictions, golds, grouping)
        acc, em = brute_force_metrics(predictions, golds, grouping)
        assert report.accuracy == pytest.approx(acc)
        assert report.exact_match == pytest.approx(em)


def test_em_bounded_by_accuracy_for_complete_groups():
    rng = random.Random(99)
    for trial in range(40):
        samples = synth_generate(rng.randint(2, 25), seed=trial)
        predictions = {s.sample_id: rng.choice(LABELS) for s in samples}
        report = evaluate_predictions(predictions, samples)
        assert report.exact_match <= report.accuracy + 1e-12


def test_metrics_contract_mismatches():
    golds = {"a": TvcpLabel.DEC}
    with pytest.raises(ContractError):
        compute_metrics({}, golds, {"a": "t"})
    with pytest.raises(ContractError):
        compute_metrics({"a": TvcpLabel.DEC}, golds, {})


# -- per-delta ---------------------------------------------------------------


def _sample(sid, tid, original, updated, label):
    return Sample(sid, tid, "some target text here", "some follow up", original, updated, label)


def test_per_delta_buckets():
    samples = [
        _sample("a-unc", "a", DurationClass.H2_6H, DurationClass.H2_6H, TvcpLabel.UNC),
        _sample("b-unc", "b", DurationClass.D1_3D, DurationClass.D1_3D, TvcpLabel.UNC),
        _sample("a-inc", "a", DurationClass.H2_6H, DurationClass.D3_7D, TvcpLabel.INC),
    ]
    predictions = {"a-unc": TvcpLabel.UNC, "b-unc": TvcpLabel.UNC, "a-inc": TvcpLabel.DEC}
    buckets = per_delta_accuracy(predictions, samples)
    assert set(buckets) == {0, 3}  # empty buckets absent
    assert buckets[0].count == 2 and buckets[0].accuracy == 1.0
    assert buckets[3].count == 1 and buckets[3].accuracy == 0.0


def test_per_delta_weighted_mean_equals_overall_accuracy():
    rng = random.Random(5)
    samples = synth_generate(30, seed=77)
    predictions = {s.sample_id: rng.choice(LABELS) for s in samples}
    report = evaluate_predictions(predictions, samples)
    buckets = report.per_delta
    weighted = sum(b.count * b.accuracy for b in buckets.values()) / sum(
        b.count for b in buckets.values()
    )
    assert weighted == pytest.approx(report.accuracy)
    # bucket 0 holds exactly the gold-UNC samples
    n_unc = sum(1 for s in samples if s.label is TvcpLabel.UNC)
    assert buckets[0].count == n_unc


# -- paired bootstrap -------------------------------------------------------


def test_bootstrap_identical_inputs_p_one():
    a = {f"t{i}": (3, 3) if i % 2 else (1, 3) for i in range(40)}
    result = paired_bootstrap(a, dict(a), metric="em", resamples=500, seed=0)
    assert result.p_value == 1.0
    assert result.ci_low == 0.0 and result.ci_high == 0.0


def test_bootstrap_strict_domination_p_zero():
    a = {f"t{i}": (0, 3) for i in range(25)}
    b = {f"t{i}": (3, 3) for i in range(25)}
    for metric in ("em", "accuracy"):
        result = paired_bootstrap(a, b, metric=metric, resamples=400, seed=1)
        assert result.p_value == 0.0
        assert result.ci_low == 1.0 and result.ci_high == 1.0


def test_bootstrap_deterministic_per_seed():
    rng = random.Random(0)
    a = {f"t{i}": (rng.randint(0, 3), 3) for i in range(50)}
    b = {f"t{i}": (rng.randint(0, 3), 3) for i in range(50)}
    r1 = paired_bootstrap(a, b, metric="accuracy", resamples=2000, seed=42)
    r2 = paired_bootstrap(a, b, metric="accuracy", resamples=2000, seed=42)
    assert r1 == r2
    r3 = paired_bootstrap(a, b, metric="accuracy", resamples=2000, seed=43)
    assert r3 != r1


def test_bootstrap_invariant_under_target_relabeling():
    rng = random.Random(7)
    a = {f"t{i}": (rng.randint(0, 3), 3) for i in range(60)}
    b = {f"t{i}": (rng.randint(0, 3), 3) for i in range(60)}
    # shuffle the id space
    ids = list(a)
    renamed = {tid: f"x{j:04d}" for j, tid in enumerate(reversed(ids))}
    a2 = {renamed[tid]: a[tid] for tid in ids}
    b2 = {renamed[tid]: b[tid] for tid in ids}
    for metric in ("em", "accuracy"):
        r1 = paired_bootstrap(a, b, metric=metric, resamples=1500, seed=3)
        r2 = paired_bootstrap(a2, b2, metric=metric, resamples=1500, seed=3)
        assert r1 == r2


def test_bootstrap_contracts():
    a = {"t1": (1, 3)}
    with pytest.raises(ContractError):
        paired_bootstrap(a, {"t2": (1, 3)})
    with pytest.raises(ContractError):
        paired_bootstrap(a, {"t1": (1, 2)})
    with pytest.raises(ContractError):
        paired_bootstrap(a, dict(a), resamples=0)
    with pytest.raises(ContractError):
        paired_bootstrap(a, dict(a), metric="f1")


def test_bootstrap_smoothing_option():
    a = {f"t{i}": (3, 3) for i in range(10)}
    result = paired_bootstrap(a, dict(a), metric="em", resamples=99, seed=0, smoothing=True)
    assert result.p_value == pytest.approx(1.0)
    b = {f"t{i}": (0, 3) for i in range(10)}
    result = paired_bootstrap(b, a, metric="em", resamples=99, seed=0, smoothing=True)
    assert result.p_value == pytest.approx(1 / 100)


def test_per_target_correctness_folding():
    samples = synth_generate(5, seed=3)
    predictions = {s.sample_id: s.label for s in samples}
    predictions[samples[0].sample_id] = None  # one miss
    table = per_target_correctness(
        predictions,
        {s.sample_id: s.label for s in samples},
        {s.sample_id: s.target_id for s in samples},
    )
    assert table[samples[0].target_id] == (2, 3)
    assert all(v == (3, 3) for tid, v in table.items() if tid != samples[0].target_id)


def test_fraction_curve_identity_at_full_fraction():
    from tvcp.dataset import split_grouped_kfold
    from tvcp.evaluation import data_fraction_curve
    from tvcp.models.encoder import EncoderConfig
    from tvcp.training import TrainConfig, evaluate_split, train

    samples = synth_generate(16, seed=44)
    plan = split_grouped_kfold(samples, folds=4, seed=44)
    config = TrainConfig(
        archetype="transformer", learning_rate=2e-3, dropout=0.0,
        patience=3, max_epochs=2, batch_size=16, seed=9,
        encoder=EncoderConfig(hidden_size=16, max_length=48,
                              backend="tiny:vocab=256,layers=1,heads=2"),
    )
    rows = data_fraction_curve([1.0], samples, plan, config, fold=0)
    assert len(rows) == 1

    # identical to a plain train + eval on the untouched plan
    result = train(
        config,
        plan.subset_samples(samples, 0, "train"),
        plan.subset_samples(samples, 0, "val"),
    )
    test_samples = plan.subset_samples(samples, 0, "test")
    predictions = evaluate_split(result.checkpoint, test_samples)
    report = evaluate_predictions(
        {sid: p.label for sid, p in predictions.items()}, test_samples
    )
    assert rows[0] == (1.0, report.accuracy, report.exact_match)


def test_kernel_paths_agree_bitwise():
    rng = np.random.default_rng(0)
    n = 37
    num_a = rng.integers(0, 4, size=n).astype(np.int64)
    num_b = rng.integers(0, 4, size=n).astype(np.int64)
    den = np.full(n, 3, dtype=np.int64)
    idx = rng.integers(0, n, size=(500, n)).astype(np.int64)
    compiled = _kernels.bootstrap_diffs(num_a, num_b, den, idx)
    fallback = _kernels._py_bootstrap_diffs(num_a, num_b, den, idx)
    assert np.array_equal(compiled, fallback)


def test_bootstrap_result_serialization():
    a = {"t1": (3, 3), "t2": (0, 3)}
    result = paired_bootstrap(a, dict(a), metric="em", resamples=10, seed=0)
    payload = result.to_json()
    assert isinstance(result, BootstrapResult)
    assert payload["metric"] == "em" and payload["resamples"] == 10
