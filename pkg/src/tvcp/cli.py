"""Command-line entry point tying the workflows together.

Exit codes: 0 success, 1 validation/data error, 2 usage error.
Every command writes a ``run_manifest.json`` into its output directory.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from tvcp import dataset, evaluation, filters, training
from tvcp.errors import TvcpError
from tvcp.manifest import RunManifest
from tvcp.models.encoder import EncoderConfig
from tvcp.schema import parse_label


def _read_jsonl(path: Path) -> list[dict]:
    records = []
    with path.open(encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                records.append(json.loads(line))
    return records


def _write_json(payload: dict, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _add_train_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--archetype", default="transformer",
                        choices=("transformer", "siamese", "selfexplain"))
    parser.add_argument("--multitask", action="store_true")
    parser.add_argument("--preset", choices=sorted(training.PRESETS),
                        help="published per-model settings; explicit flags win")
    parser.add_argument("--lr", type=float, default=None)
    parser.add_argument("--dropout", type=float, default=None)
    parser.add_argument("--freeze-embeddings", action="store_true", default=None)
    parser.add_argument("--patience", type=int, default=5)
    parser.add_argument("--max-epochs", type=int, default=50)
    parser.add_argument("--batch-size", type=int, default=32)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--lambda-reg", type=float, default=1.0)
    parser.add_argument("--lambda-span", type=float, default=1.0)
    parser.add_argument("--max-span-length", type=int, default=5)
    parser.add_argument("--hidden-size", type=int, default=64)
    parser.add_argument("--max-length", type=int, default=64)
    parser.add_argument("--encoder-backend", default="tiny")


def _train_config(args: argparse.Namespace) -> training.TrainConfig:
    settings = dict(training.PRESETS.get(args.preset or "", {}))
    if args.lr is not None:
        settings["learning_rate"] = args.lr
    if args.dropout is not None:
        settings["dropout"] = args.dropout
    if args.freeze_embeddings is not None:
        settings["freeze_embeddings"] = args.freeze_embeddings
    settings.setdefault("learning_rate", 1e-3)
    settings.setdefault("dropout", 0.1)
    settings.setdefault("freeze_embeddings", False)
    encoder = EncoderConfig(
        hidden_size=args.hidden_size,
        max_length=args.max_length,
        backend=args.encoder_backend,
        freeze_embeddings=settings["freeze_embeddings"],
    )
    return training.TrainConfig(
        archetype=args.archetype,
        multitask=args.multitask,
        patience=args.patience,
        max_epochs=args.max_epochs,
        batch_size=args.batch_size,
        seed=args.seed,
        lambda_reg=args.lambda_reg,
        lambda_span=args.lambda_span,
        max_span_length=args.max_span_length,
        encoder=encoder,
        **settings,
    )


def _write_predictions(predictions, samples, path: Path) -> None:
    by_id = {s.sample_id: s for s in samples}
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        for sample_id in sorted(predictions):
            pred = predictions[sample_id]
            sample = by_id[sample_id]
            record = {
                "sample_id": sample_id,
                "target_id": sample.target_id,
                "predicted": pred.label.value,
                "gold": sample.label.value,
                "correct": pred.label is sample.label,
            }
            if pred.original is not None:
                record["pred_original"] = pred.original
                record["pred_updated"] = pred.updated
            fh.write(json.dumps(record) + "\n")


# -- commands -------------------------------------------------------------


def _cmd_prepare(args) -> int:
    out_dir = Path(args.out)
    manifest = RunManifest(command="prepare", inputs=[args.input], seed=None)
    records = _read_jsonl(Path(args.input))
    statements = [(r["statement_id"], r["text"]) for r in records]
    config = filters.load_chain_config(Path(args.chain)) if args.chain else {}
    chain = filters.build_chain(config)
    verdicts = filters.apply_filter_chain(statements, chain)
    # the config file may carry k; an explicit flag wins
    k = args.k if args.k is not None else int(config.get("k", 100))
    selected = filters.select_candidates(verdicts, k)

    out_dir.mkdir(parents=True, exist_ok=True)
    verdicts_path = out_dir / "verdicts.jsonl"
    with verdicts_path.open("w", encoding="utf-8") as fh:
        for v in verdicts:
            fh.write(json.dumps({
                "statement_id": v.statement_id,
                "passed": v.passed,
                "failing_stage": v.failing_stage,
                "scores": v.scores,
            }) + "\n")
    selected_path = out_dir / "selected.txt"
    selected_path.write_text("\n".join(selected) + ("\n" if selected else ""), encoding="utf-8")
    manifest.config = {"k": k, "chain": config}
    manifest.outputs = [str(verdicts_path), str(selected_path)]
    manifest.write(out_dir)
    print(f"{sum(v.passed for v in verdicts)}/{len(verdicts)} passed; "
          f"selected {len(selected)} -> {selected_path}")
    return 0


def _cmd_synth(args) -> int:
    out_path = Path(args.out)
    manifest = RunManifest(command="synth", seed=args.seed,
                           config={"targets": args.targets})
    samples = dataset.synth_generate(args.targets, seed=args.seed)
    dataset.write_samples(samples, out_path)
    manifest.outputs = [str(out_path)]
    manifest.write(out_path.parent if out_path.parent != Path("") else Path("."))
    print(f"wrote {len(samples)} samples ({args.targets} targets) -> {out_path}")
    return 0


def _cmd_split(args) -> int:
    out_path = Path(args.out)
    manifest = RunManifest(command="split", seed=args.seed, inputs=[args.data],
                           config={"folds": args.folds})
    samples, _ = dataset.load_and_validate(args.data, mode=args.mode)
    plan = dataset.split_grouped_kfold(samples, folds=args.folds, seed=args.seed)
    plan.save(out_path)
    manifest.outputs = [str(out_path)]
    manifest.write(out_path.parent if out_path.parent != Path("") else Path("."))
    print(f"split plan: {args.folds} folds over "
          f"{len({s.target_id for s in samples})} targets -> {out_path}")
    return 0


def _cmd_train(args) -> int:
    run_dir = Path(args.out)
    config = _train_config(args)
    manifest = RunManifest(command="train", seed=args.seed, inputs=[args.data, args.splits],
                           config=config.to_json())
    samples, _ = dataset.load_and_validate(args.data, mode=args.mode)
    plan = dataset.SplitPlan.load(args.splits)
    train_samples = plan.subset_samples(samples, args.fold, "train")
    val_samples = plan.subset_samples(samples, args.fold, "val")
    result = training.train(config, train_samples, val_samples, run_dir=run_dir)
    manifest.outputs = [str(run_dir / "metrics.csv"), str(run_dir / "result.json")]
    if result.checkpoint_path:
        manifest.outputs.append(str(result.checkpoint_path))
    manifest.write(run_dir)
    print(f"best epoch {result.best_epoch} (val EM {result.best_val_em:.4f}) "
          f"after {len(result.epochs)} epochs"
          + (" [early stop]" if result.stopped_early else ""))
    return 0


def _cmd_sweep(args) -> int:
    out_dir = Path(args.out)
    config = _train_config(args)
    manifest = RunManifest(command="sweep", seed=args.seed, inputs=[args.data],
                           config=config.to_json())
    samples, _ = dataset.load_and_validate(args.data, mode=args.mode)
    plan = dataset.holdout_split(samples, fractions=(0.8, 0.1, 0.1), seed=args.seed)
    train_samples = plan.subset_samples(samples, 0, "train")
    val_samples = plan.subset_samples(samples, 0, "val")
    rows = training.sweep(config, train_samples, val_samples)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / "sweep.csv"
    training.write_sweep_csv(rows, csv_path)
    _write_json({"rows": [r.to_json() for r in rows]}, out_dir / "sweep.json")
    manifest.outputs = [str(csv_path), str(out_dir / "sweep.json")]
    manifest.write(out_dir)
    for row in rows[:3]:
        print(f"lr={row.learning_rate:g} dropout={row.dropout:g} "
              f"freeze={row.freeze_embeddings} -> EM "
              f"{'-' if row.best_val_em is None else f'{row.best_val_em:.4f}'}")
    print(f"{len(rows)} rows -> {csv_path}")
    return 0


def _cmd_eval(args) -> int:
    out_dir = Path(args.out)
    manifest = RunManifest(command="eval", inputs=[args.checkpoint, args.data], seed=None)
    samples, _ = dataset.load_and_validate(args.data, mode=args.mode)
    if args.splits:
        plan = dataset.SplitPlan.load(args.splits)
        samples = plan.subset_samples(samples, args.fold, args.subset)
    predictions = training.evaluate_split(args.checkpoint, samples)
    report = evaluation.evaluate_predictions(
        {sid: p.label for sid, p in predictions.items()}, samples
    )
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_json(report.to_json(), out_dir / "metrics.json")
    evaluation.write_per_delta_csv(report.per_delta or {}, out_dir / "per_delta.csv")
    _write_predictions(predictions, samples, out_dir / "predictions.jsonl")
    manifest.outputs = [str(out_dir / "metrics.json"), str(out_dir / "per_delta.csv"),
                        str(out_dir / "predictions.jsonl")]
    manifest.write(out_dir)
    print(f"accuracy {report.accuracy:.4f}  EM {report.exact_match:.4f} "
          f"({report.n_samples} samples, {report.n_targets} targets)")
    return 0


def _cmd_llm_eval(args) -> int:
    from tvcp.llm import HttpChatClient, run_llm_eval

    out_dir = Path(args.out)
    manifest = RunManifest(command="llm-eval", inputs=[args.data], seed=None,
                           config={"model": args.model, "endpoint": args.endpoint,
                                   "concurrency": args.concurrency})
    samples, _ = dataset.load_and_validate(args.data, mode=args.mode)
    client = HttpChatClient(base_url=args.endpoint, model=args.model)
    result = run_llm_eval(
        samples,
        client,
        cache_dir=args.cache_dir,
        concurrency=args.concurrency,
        scale_hint=args.scale_hint,
    )
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_json(result.report.to_json(), out_dir / "metrics.json")
    with (out_dir / "responses.jsonl").open("w", encoding="utf-8") as fh:
        for parsed in result.predictions:
            fh.write(json.dumps({
                "sample_id": parsed.sample_id,
                "label": parsed.label.value if parsed.label else None,
                "status": parsed.status,
                "explanation": parsed.explanation,
            }, ensure_ascii=False) + "\n")
    manifest.outputs = [str(out_dir / "metrics.json"), str(out_dir / "responses.jsonl")]
    manifest.config["stats"] = {
        "client_calls": result.stats.client_calls,
        "cache_hits": result.stats.cache_hits,
        "unparsed": result.stats.unparsed,
        "failures": len(result.stats.failures),
    }
    manifest.write(out_dir)
    print(f"accuracy {result.report.accuracy:.4f}  EM {result.report.exact_match:.4f}  "
          f"({result.stats.client_calls} calls, {result.stats.cache_hits} cache hits, "
          f"{result.stats.unparsed} unparsed)")
    return 0


def _per_target_from_file(path: Path) -> dict:
    """Per-target correctness from a predictions file (sample, target, gold, predicted)."""
    records = _read_jsonl(path)
    if not records:
        raise TvcpError(f"predictions file {path} is empty")
    predictions, golds, grouping = {}, {}, {}
    for r in records:
        sid = r["sample_id"]
        predictions[sid] = parse_label(r["predicted"]) if r.get("predicted") else None
        golds[sid] = parse_label(r["gold"])
        grouping[sid] = r["target_id"]
    return evaluation.per_target_correctness(predictions, golds, grouping)


def _cmd_bootstrap(args) -> int:
    out_dir = Path(args.out)
    manifest = RunManifest(command="bootstrap", seed=args.seed,
                           inputs=[args.a, args.b],
                           config={"metric": args.metric, "resamples": args.resamples})
    a = _per_target_from_file(Path(args.a))
    b = _per_target_from_file(Path(args.b))
    result = evaluation.paired_bootstrap(
        a, b, metric=args.metric, resamples=args.resamples, seed=args.seed
    )
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_json(result.to_json(), out_dir / "bootstrap.json")
    manifest.outputs = [str(out_dir / "bootstrap.json")]
    manifest.write(out_dir)
    print(f"metric={result.metric} observed diff {result.observed_diff:+.4f}  "
          f"p={result.p_value:.4f}  95% CI [{result.ci_low:.4f}, {result.ci_high:.4f}]")
    return 0


def _cmd_fraction_curve(args) -> int:
    out_dir = Path(args.out)
    config = _train_config(args)
    fractions = [float(x) for x in args.fractions.split(",") if x]
    manifest = RunManifest(command="fraction-curve", seed=args.seed,
                           inputs=[args.data, args.splits],
                           config={"fractions": fractions, **config.to_json()})
    samples, _ = dataset.load_and_validate(args.data, mode=args.mode)
    plan = dataset.SplitPlan.load(args.splits)
    rows = evaluation.data_fraction_curve(fractions, samples, plan, config, fold=args.fold)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / "fraction_curve.csv"
    evaluation.write_fraction_curve_csv(rows, csv_path)
    manifest.outputs = [str(csv_path)]
    manifest.write(out_dir)
    for fraction, accuracy, em in rows:
        print(f"fraction {fraction:g}: accuracy {accuracy:.4f}  EM {em:.4f}")
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from tvcp.service import AnnotationService, create_app

    state_dir = Path(args.state_dir)
    state_dir.mkdir(parents=True, exist_ok=True)
    service = AnnotationService(
        log_path=state_dir / "events.jsonl",
        require_qualification=args.require_qualification,
    )
    if args.statements and len(service.log) == 0:
        records = _read_jsonl(Path(args.statements))
        service.add_statements(records)
        print(f"seeded {len(records)} statements")
    manifest = RunManifest(command="serve", seed=None,
                           inputs=[args.statements or ""],
                           config={"host": args.host, "port": args.port})
    manifest.outputs = [str(state_dir / "events.jsonl")]
    manifest.write(state_dir)
    app = create_app(service)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def _cmd_export(args) -> int:
    from tvcp.service import AnnotationService

    out_path = Path(args.out)
    state_dir = Path(args.state_dir)
    manifest = RunManifest(command="export", seed=None,
                           inputs=[str(state_dir / "events.jsonl")])
    service = AnnotationService(log_path=state_dir / "events.jsonl")
    samples, export_manifest = service.export_samples()
    dataset.write_samples(samples, out_path)
    _write_json(export_manifest, out_path.with_suffix(".manifest.json"))
    manifest.outputs = [str(out_path), str(out_path.with_suffix(".manifest.json"))]
    manifest.write(out_path.parent if out_path.parent != Path("") else Path("."))
    print(f"exported {len(samples)} samples "
          f"({export_manifest['targets_exported']} targets) -> {out_path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tvcp",
        description="Dataset tooling, classifier benchmarks, and annotation service "
                    "for temporal validity change prediction.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prepare", help="run the statement filter chain")
    p.add_argument("--input", required=True)
    p.add_argument("--chain", default=None, help="chain config JSON (default chain if omitted)")
    p.add_argument("--k", type=int, default=None,
                   help="top-k candidates; falls back to the chain config, then 100")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_prepare)

    p = sub.add_parser("synth", help="generate a synthetic dataset")
    p.add_argument("--targets", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("split", help="build a grouped k-fold split plan")
    p.add_argument("--data", required=True)
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mode", default="strict", choices=("strict", "lenient"))
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_split)

    p = sub.add_parser("train", help="train one classifier on one fold")
    p.add_argument("--data", required=True)
    p.add_argument("--splits", required=True)
    p.add_argument("--fold", type=int, default=0)
    p.add_argument("--mode", default="strict", choices=("strict", "lenient"))
    p.add_argument("--out", required=True)
    _add_train_flags(p)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("sweep", help="grid-search learning rate/dropout/freeze")
    p.add_argument("--data", required=True)
    p.add_argument("--mode", default="strict", choices=("strict", "lenient"))
    p.add_argument("--out", required=True)
    _add_train_flags(p)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("eval", help="evaluate a checkpoint")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--splits", default=None)
    p.add_argument("--fold", type=int, default=0)
    p.add_argument("--subset", default="test", choices=("train", "val", "test"))
    p.add_argument("--mode", default="strict", choices=("strict", "lenient"))
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("llm-eval", help="evaluate a chat-completion endpoint")
    p.add_argument("--data", required=True)
    p.add_argument("--endpoint", required=True, help="OpenAI-compatible base URL")
    p.add_argument("--model", required=True)
    p.add_argument("--concurrency", type=int, default=4)
    p.add_argument("--cache-dir", required=True)
    p.add_argument("--scale-hint", action="store_true",
                   help="describe the duration scale in the prompt (off by default)")
    p.add_argument("--mode", default="strict", choices=("strict", "lenient"))
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_llm_eval)

    p = sub.add_parser("bootstrap", help="paired bootstrap between two prediction files")
    p.add_argument("--a", required=True, help="baseline predictions.jsonl")
    p.add_argument("--b", required=True, help="candidate predictions.jsonl")
    p.add_argument("--metric", default="em", choices=("em", "accuracy"))
    p.add_argument("--resamples", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_bootstrap)

    p = sub.add_parser("fraction-curve", help="train on nested data fractions")
    p.add_argument("--data", required=True)
    p.add_argument("--splits", required=True)
    p.add_argument("--fold", type=int, default=0)
    p.add_argument("--fractions", default="0.1,0.2,0.4,0.6,0.8,1.0")
    p.add_argument("--mode", default="strict", choices=("strict", "lenient"))
    p.add_argument("--out", required=True)
    _add_train_flags(p)
    p.set_defaults(func=_cmd_fraction_curve)

    p = sub.add_parser("serve", help="start the annotation service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8400)
    p.add_argument("--state-dir", required=True)
    p.add_argument("--statements", default=None, help="seed statements JSONL")
    p.add_argument("--require-qualification", action="store_true")
    p.set_defaults(func=_cmd_serve)

    p = sub.add_parser("export", help="export the annotated dataset")
    p.add_argument("--state-dir", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_export)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (TvcpError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
