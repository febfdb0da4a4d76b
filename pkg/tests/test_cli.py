"""End-to-end command-line flows over small synthetic data."""

import json

import pytest

from tvcp.cli import main

FAST_TRAIN = [
    "--hidden-size", "16", "--max-length", "48",
    "--encoder-backend", "tiny:vocab=256,layers=1,heads=2",
    "--max-epochs", "2", "--batch-size", "16", "--lr", "2e-3", "--dropout", "0.0",
]


def run(argv):
    return main(argv)


def test_usage_error_exit_code_two():
    with pytest.raises(SystemExit) as exc:
        run(["not-a-command"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        run(["synth"])  # missing required flags
    assert exc.value.code == 2


def test_synth_writes_dataset_and_manifest(tmp_path, capsys):
    out = tmp_path / "data.jsonl"
    assert run(["synth", "--targets", "100", "--seed", "7", "--out", str(out)]) == 0
    lines = [l for l in out.read_text().splitlines() if l.strip()]
    assert len(lines) == 300
    manifest = json.loads((tmp_path / "run_manifest.json").read_text())
    assert manifest["command"] == "synth" and manifest["seed"] == 7
    assert str(out) in manifest["artifact_hashes"]


def test_validation_error_exit_code_one(tmp_path):
    bad = tmp_path / "bad.jsonl"
    bad.write_text('{"sample_id": "x"}\n', encoding="utf-8")
    assert run(["split", "--data", str(bad), "--out", str(tmp_path / "s.json")]) == 1
    assert run(["split", "--data", str(tmp_path / "missing.jsonl"),
                "--out", str(tmp_path / "s.json")]) == 1


def test_split_train_eval_bootstrap_roundtrip(tmp_path, capsys):
    data = tmp_path / "data.jsonl"
    splits = tmp_path / "splits.json"
    assert run(["synth", "--targets", "24", "--seed", "3", "--out", str(data)]) == 0
    assert run(["split", "--data", str(data), "--folds", "4", "--seed", "1",
                "--out", str(splits)]) == 0
    assert splits.exists()

    run_dir = tmp_path / "run0"
    assert run(["train", "--data", str(data), "--splits", str(splits), "--fold", "0",
                "--out", str(run_dir), "--seed", "0", *FAST_TRAIN]) == 0
    checkpoint = run_dir / "checkpoints" / "best.pt"
    assert checkpoint.exists()
    assert (run_dir / "run_manifest.json").exists()

    eval_dir = tmp_path / "eval0"
    assert run(["eval", "--checkpoint", str(checkpoint), "--data", str(data),
                "--splits", str(splits), "--fold", "0", "--subset", "test",
                "--out", str(eval_dir)]) == 0
    metrics = json.loads((eval_dir / "metrics.json").read_text())
    assert 0.0 <= metrics["accuracy"] <= 1.0
    assert (eval_dir / "per_delta.csv").read_text().startswith("delta,count,accuracy")
    predictions = eval_dir / "predictions.jsonl"
    assert predictions.exists()

    boot_dir = tmp_path / "boot"
    assert run(["bootstrap", "--a", str(predictions), "--b", str(predictions),
                "--metric", "em", "--resamples", "200", "--seed", "1",
                "--out", str(boot_dir)]) == 0
    result = json.loads((boot_dir / "bootstrap.json").read_text())
    assert result["p_value"] == 1.0  # identical prediction files

    out = capsys.readouterr().out
    assert "p=1.0000" in out


def test_eval_metrics_manifest_byte_identical_across_runs(tmp_path):
    data = tmp_path / "data.jsonl"
    splits = tmp_path / "splits.json"
    run(["synth", "--targets", "16", "--seed", "5", "--out", str(data)])
    run(["split", "--data", str(data), "--folds", "4", "--seed", "2", "--out", str(splits)])
    run_dir = tmp_path / "run"
    run(["train", "--data", str(data), "--splits", str(splits),
         "--out", str(run_dir), "--seed", "1", *FAST_TRAIN])
    checkpoint = run_dir / "checkpoints" / "best.pt"
    e1, e2 = tmp_path / "e1", tmp_path / "e2"
    for out_dir in (e1, e2):
        run(["eval", "--checkpoint", str(checkpoint), "--data", str(data),
             "--splits", str(splits), "--subset", "test", "--out", str(out_dir)])
    assert (e1 / "metrics.json").read_bytes() == (e2 / "metrics.json").read_bytes()
    assert (e1 / "per_delta.csv").read_bytes() == (e2 / "per_delta.csv").read_bytes()


def test_prepare_filters_candidates(tmp_path):
    statements = tmp_path / "statements.jsonl"
    with statements.open("w") as fh:
        fh.write(json.dumps({"statement_id": "keep", "text": "I am driving home from work"}) + "\n")
        fh.write(json.dumps({"statement_id": "drop", "text": "RT @x: spam spam spam spam"}) + "\n")
    out_dir = tmp_path / "prepared"
    assert run(["prepare", "--input", str(statements), "--k", "5",
                "--out", str(out_dir)]) == 0
    selected = (out_dir / "selected.txt").read_text().split()
    assert selected == ["keep"]
    verdicts = [json.loads(l) for l in (out_dir / "verdicts.jsonl").read_text().splitlines()]
    assert {v["statement_id"]: v["passed"] for v in verdicts} == {"keep": True, "drop": False}


def test_fraction_curve_csv(tmp_path):
    data = tmp_path / "data.jsonl"
    splits = tmp_path / "splits.json"
    run(["synth", "--targets", "20", "--seed", "2", "--out", str(data)])
    run(["split", "--data", str(data), "--folds", "4", "--seed", "0", "--out", str(splits)])
    out_dir = tmp_path / "curve"
    assert run(["fraction-curve", "--data", str(data), "--splits", str(splits),
                "--fractions", "0.5,1.0", "--out", str(out_dir),
                "--seed", "0", *FAST_TRAIN]) == 0
    lines = (out_dir / "fraction_curve.csv").read_text().splitlines()
    assert lines[0] == "fraction,accuracy,em"
    assert len(lines) == 3


def test_export_from_event_log(tmp_path):
    from tvcp.service import AnnotationService

    state_dir = tmp_path / "state"
    state_dir.mkdir()
    service = AnnotationService(log_path=state_dir / "events.jsonl")
    service.add_statements(
        [{"statement_id": "s1", "text": "I am cooking dinner for the family"}]
    )
    hit_id = sorted(service.state.hits)[0]
    service.submit_votes(hit_id, "a", {"s1": "45m_2h"})
    service.submit_votes(hit_id, "b", {"s1": "45m_2h"})
    followup = [h for h in service.state.hits.values() if h.kind == "followup"][0]
    service.submit_followups(followup.hit_id, "w", [
        {"label": "DEC", "text": "dinner is nearly ready", "updated": "5m_15m"},
        {"label": "UNC", "text": "the radio is on", "updated": "45m_2h"},
        {"label": "INC", "text": "guests are running late", "updated": "2h_6h"},
    ])
    ack = service.review_queue()[0]
    service.review_submission("rev", ack["submission_id"], "approve")

    out = tmp_path / "export.jsonl"
    assert run(["export", "--state-dir", str(state_dir), "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert len(lines) == 3
    manifest = json.loads(out.with_suffix(".manifest.json").read_text())
    assert manifest["samples_exported"] == 3
    # exported file passes strict validation via the split command
    assert run(["split", "--data", str(out), "--folds", "2",
                "--out", str(tmp_path / "unused.json")]) == 1  # 1 target < 2 folds
    from tvcp.dataset import load_and_validate

    loaded, report = load_and_validate(out, mode="strict")
    assert len(loaded) == 3 and not report.errors
