"""Training loop with early stopping on validation exact match, plus sweeps.

Run directory layout (when ``run_dir`` is given):

    config.json             exact configuration snapshot
    metrics.csv             epoch, ce, reg, span, total, val_acc, val_em
    checkpoints/best.pt     weights at the best validation EM so far
    result.json             final summary (best epoch, stopping reason)
"""

from __future__ import annotations

import csv
import json
import math
import random
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
import torch

from tvcp import evaluation
from tvcp.dataset import Sample
from tvcp.errors import ContractError, DivergenceError
from tvcp.models.encoder import EncoderConfig
from tvcp.models.heads import ChangeClassifier, build_classifier
from tvcp.models.losses import combined_loss
from tvcp.schema import LABELS, TvcpLabel, normalized_value

ADAMW_EPS = 1e-8
ADAMW_BETAS = (0.9, 0.999)
ADAMW_WEIGHT_DECAY = 0.01


@dataclass
class TrainConfig:
    """One training run's knobs. The optimizer is AdamW throughout."""

    archetype: str = "transformer"
    multitask: bool = False
    learning_rate: float = 1e-3
    dropout: float = 0.1
    freeze_embeddings: bool = False
    patience: int = 5
    max_epochs: int = 50
    batch_size: int = 32
    seed: int = 0
    lambda_reg: float = 1.0
    lambda_span: float = 1.0
    max_span_length: int = 5
    encoder: EncoderConfig = field(default_factory=EncoderConfig)

    def __post_init__(self) -> None:
        if self.patience < 1:
            raise ContractError(f"patience must be >= 1, got {self.patience}")
        if self.learning_rate <= 0:
            raise ContractError(f"learning rate must be > 0, got {self.learning_rate}")
        if self.batch_size < 1:
            raise ContractError(f"batch_size must be >= 1, got {self.batch_size}")
        # Heads and encoder share the freeze flag; keep them consistent.
        if self.encoder.freeze_embeddings != self.freeze_embeddings:
            self.encoder = replace(self.encoder, freeze_embeddings=self.freeze_embeddings)

    def to_json(self) -> dict:
        payload = {
            "archetype": self.archetype,
            "multitask": self.multitask,
            "learning_rate": self.learning_rate,
            "dropout": self.dropout,
            "freeze_embeddings": self.freeze_embeddings,
            "patience": self.patience,
            "max_epochs": self.max_epochs,
            "batch_size": self.batch_size,
            "seed": self.seed,
            "lambda_reg": self.lambda_reg,
            "lambda_span": self.lambda_span,
            "max_span_length": self.max_span_length,
            "encoder": self.encoder.to_json(),
        }
        return payload

    @classmethod
    def from_json(cls, payload: Mapping) -> "TrainConfig":
        payload = dict(payload)
        payload["encoder"] = EncoderConfig(**payload.get("encoder", {}))
        return cls(**payload)


#: Published per-model settings: (dropout, learning rate, freeze embeddings).
PRESETS: dict[str, dict] = {
    "transformer_bert": {"dropout": 0.25, "learning_rate": 1e-4, "freeze_embeddings": False},
    "siamese_bert": {"dropout": 0.25, "learning_rate": 1e-4, "freeze_embeddings": False},
    "transformer_roberta": {"dropout": 0.25, "learning_rate": 1e-3, "freeze_embeddings": True},
    "siamese_roberta": {"dropout": 0.10, "learning_rate": 1e-4, "freeze_embeddings": True},
    "selfexplain": {"dropout": 0.00, "learning_rate": 2e-5, "freeze_embeddings": False},
}


class EarlyStopping:
    """Stop after ``patience`` consecutive epochs without strict improvement."""

    def __init__(self, patience: int):
        if patience < 1:
            raise ContractError(f"patience must be >= 1, got {patience}")
        self.patience = patience
        self.best = -math.inf
        self.best_epoch = 0
        self.stalls = 0

    def update(self, epoch: int, value: float) -> bool:
        """Record an epoch's metric; returns True when training should stop."""
        if value > self.best:
            self.best = value
            self.best_epoch = epoch
            self.stalls = 0
        else:
            self.stalls += 1
        return self.stalls >= self.patience


@dataclass
class EpochLog:
    epoch: int
    ce: float
    reg: float
    span: float
    total: float
    val_accuracy: float
    val_em: float

    def row(self) -> list:
        return [self.epoch, self.ce, self.reg, self.span, self.total,
                self.val_accuracy, self.val_em]


@dataclass
class Checkpoint:
    """A trained model snapshot, in memory or on disk."""

    config: TrainConfig
    state_dict: dict

    def save(self, path: str | Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        torch.save({"config": self.config.to_json(), "state_dict": self.state_dict}, path)
        return path

    @classmethod
    def load(cls, path: str | Path) -> "Checkpoint":
        path = Path(path)
        if not path.exists():
            raise FileNotFoundError(f"checkpoint not found: {path}")
        payload = torch.load(path, map_location="cpu", weights_only=False)
        return cls(config=TrainConfig.from_json(payload["config"]), state_dict=payload["state_dict"])

    def build_model(self) -> ChangeClassifier:
        model = build_classifier(
            self.config.encoder,
            archetype=self.config.archetype,
            dropout=self.config.dropout,
            multitask=self.config.multitask,
            max_span_length=self.config.max_span_length,
            seed=self.config.seed,
        )
        model.load_state_dict(self.state_dict)
        return model


@dataclass
class TrainResult:
    epochs: list[EpochLog]
    best_epoch: int
    best_val_em: float
    checkpoint: Checkpoint
    stopped_early: bool
    checkpoint_path: Path | None = None

    def to_json(self) -> dict:
        return {
            "best_epoch": self.best_epoch,
            "best_val_em": self.best_val_em,
            "stopped_early": self.stopped_early,
            "epochs_run": len(self.epochs),
            "checkpoint": str(self.checkpoint_path) if self.checkpoint_path else None,
        }


def _batch_tensors(model: ChangeClassifier, batch: Sequence[Sample], multitask: bool):
    pairs = [(s.target_text, s.followup_text) for s in batch]
    encoded = model.encode_pairs(pairs)
    labels = torch.tensor([s.label.index for s in batch], dtype=torch.long)
    gold_original = gold_updated = None
    if multitask:
        gold_original = torch.tensor(
            [normalized_value(s.original) for s in batch], dtype=encoded.pooled_st.dtype
        )
        gold_updated = torch.tensor(
            [normalized_value(s.updated) for s in batch], dtype=encoded.pooled_st.dtype
        )
    return encoded, labels, gold_original, gold_updated


def _predict_batched(
    model: ChangeClassifier, samples: Sequence[Sample], batch_size: int = 64
) -> dict[str, "Prediction"]:
    model.eval()
    out: dict[str, Prediction] = {}
    with torch.no_grad():
        for i in range(0, len(samples), batch_size):
            chunk = samples[i : i + batch_size]
            pairs = [(s.target_text, s.followup_text) for s in chunk]
            encoded = model.encode_pairs(pairs)
            result = model(encoded)
            # numpy argmax guarantees the first (lowest-index) max on ties
            picks = np.argmax(result.logits.detach().numpy(), axis=1)
            for j, sample in enumerate(chunk):
                out[sample.sample_id] = Prediction(
                    label=LABELS[int(picks[j])],
                    original=(
                        float(result.pred_original[j])
                        if result.pred_original is not None
                        else None
                    ),
                    updated=(
                        float(result.pred_updated[j])
                        if result.pred_updated is not None
                        else None
                    ),
                )
    return out


@dataclass
class Prediction:
    label: TvcpLabel
    original: float | None = None
    updated: float | None = None


def _val_metrics(model: ChangeClassifier, val_samples: Sequence[Sample]) -> tuple[float, float]:
    predictions = _predict_batched(model, val_samples)
    report = evaluation.compute_metrics(
        {sid: p.label for sid, p in predictions.items()},
        {s.sample_id: s.label for s in val_samples},
        {s.sample_id: s.target_id for s in val_samples},
    )
    return report.accuracy, report.exact_match


def train(
    config: TrainConfig,
    train_samples: Sequence[Sample],
    val_samples: Sequence[Sample],
    run_dir: str | Path | None = None,
) -> TrainResult:
    """Optimize one model; keep the checkpoint with the best validation EM.

    Deterministic for a fixed config and seed: initialization, batch order,
    and dropout all derive from ``config.seed``.
    """
    if not train_samples or not val_samples:
        raise ContractError("train and val subsets must be non-empty")

    model = build_classifier(
        config.encoder,
        archetype=config.archetype,
        dropout=config.dropout,
        multitask=config.multitask,
        max_span_length=config.max_span_length,
        seed=config.seed,
    )
    if config.freeze_embeddings:
        for p in model.encoder.embedding_parameters():
            p.requires_grad_(False)

    torch.manual_seed(config.seed)
    optimizer = torch.optim.AdamW(
        [p for p in model.parameters() if p.requires_grad],
        lr=config.learning_rate,
        betas=ADAMW_BETAS,
        eps=ADAMW_EPS,
        weight_decay=ADAMW_WEIGHT_DECAY,
    )
    rng = random.Random(config.seed)
    stopper = EarlyStopping(config.patience)
    logs: list[EpochLog] = []
    best_checkpoint: Checkpoint | None = None
    checkpoint_path: Path | None = None
    run_path = Path(run_dir) if run_dir is not None else None
    if run_path is not None:
        run_path.mkdir(parents=True, exist_ok=True)
        (run_path / "config.json").write_text(
            json.dumps(config.to_json(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )

    order = list(range(len(train_samples)))
    stopped_early = False
    for epoch in range(1, config.max_epochs + 1):
        model.train()
        rng.shuffle(order)
        sums = {"ce": 0.0, "reg": 0.0, "span": 0.0, "total": 0.0}
        n_batches = 0
        for b, start in enumerate(range(0, len(order), config.batch_size)):
            batch = [train_samples[i] for i in order[start : start + config.batch_size]]
            encoded, labels, gold_o, gold_u = _batch_tensors(model, batch, config.multitask)
            breakdown = combined_loss(
                model(encoded),
                labels,
                gold_o,
                gold_u,
                lambda_reg=config.lambda_reg,
                lambda_span=config.lambda_span,
            )
            total = breakdown.total
            if not torch.isfinite(total):
                raise DivergenceError(epoch, b, float(total.detach()))
            optimizer.zero_grad()
            total.backward()
            optimizer.step()
            for key, value in breakdown.scalars().items():
                sums[key] += value
            n_batches += 1

        val_acc, val_em = _val_metrics(model, val_samples)
        logs.append(
            EpochLog(
                epoch=epoch,
                ce=sums["ce"] / n_batches,
                reg=sums["reg"] / n_batches,
                span=sums["span"] / n_batches,
                total=sums["total"] / n_batches,
                val_accuracy=val_acc,
                val_em=val_em,
            )
        )
        improved = val_em > stopper.best
        should_stop = stopper.update(epoch, val_em)
        if improved:
            state = {k: v.detach().clone() for k, v in model.state_dict().items()}
            best_checkpoint = Checkpoint(config=config, state_dict=state)
            if run_path is not None:
                checkpoint_path = best_checkpoint.save(run_path / "checkpoints" / "best.pt")
        if should_stop:
            stopped_early = True
            break

    assert best_checkpoint is not None  # at least one epoch ran
    result = TrainResult(
        epochs=logs,
        best_epoch=stopper.best_epoch,
        best_val_em=stopper.best,
        checkpoint=best_checkpoint,
        stopped_early=stopped_early,
        checkpoint_path=checkpoint_path,
    )
    if run_path is not None:
        with (run_path / "metrics.csv").open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["epoch", "ce", "reg", "span", "total", "val_acc", "val_em"])
            for entry in logs:
                writer.writerow(entry.row())
        (run_path / "result.json").write_text(
            json.dumps(result.to_json(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
    return result


def evaluate_split(
    checkpoint: Checkpoint | str | Path, samples: Sequence[Sample], batch_size: int = 64
) -> dict[str, Prediction]:
    """Pure prediction pass; argmax ties resolve to the lower class index."""
    if not isinstance(checkpoint, Checkpoint):
        checkpoint = Checkpoint.load(checkpoint)
    model = checkpoint.build_model()
    return _predict_batched(model, list(samples), batch_size=batch_size)


# -- hyperparameter sweep -----------------------------------------------------

SWEEP_LEARNING_RATES = (1e-2, 1e-3, 1e-4)
SWEEP_DROPOUTS = (0.1, 0.25, 0.5)
SWEEP_FREEZE = (False, True)


def default_grid() -> list[dict]:
    """Full grid: 3 learning rates x 3 dropouts x 2 freeze settings."""
    return [
        {"learning_rate": lr, "dropout": do, "freeze_embeddings": fr}
        for lr in SWEEP_LEARNING_RATES
        for do in SWEEP_DROPOUTS
        for fr in SWEEP_FREEZE
    ]


@dataclass
class SweepRow:
    learning_rate: float
    dropout: float
    freeze_embeddings: bool
    best_val_em: float | None
    epochs_run: int
    error: str | None = None

    def to_json(self) -> dict:
        return {
            "learning_rate": self.learning_rate,
            "dropout": self.dropout,
            "freeze_embeddings": self.freeze_embeddings,
            "best_val_em": self.best_val_em,
            "epochs_run": self.epochs_run,
            "error": self.error,
        }


def sweep(
    base_config: TrainConfig,
    train_samples: Sequence[Sample],
    val_samples: Sequence[Sample],
    grid: Sequence[Mapping] | None = None,
) -> list[SweepRow]:
    """Train one cell per grid entry; rows sorted by validation EM descending.

    A diverging cell becomes a row with an error message instead of
    aborting the sweep. Failed rows sort last.
    """
    cells = list(grid) if grid is not None else default_grid()
    if not cells:
        raise ContractError("sweep grid must be non-empty")
    rows: list[SweepRow] = []
    for cell in cells:
        cell_config = replace(base_config, **dict(cell))
        try:
            result = train(cell_config, train_samples, val_samples)
            rows.append(
                SweepRow(
                    learning_rate=cell_config.learning_rate,
                    dropout=cell_config.dropout,
                    freeze_embeddings=cell_config.freeze_embeddings,
                    best_val_em=result.best_val_em,
                    epochs_run=len(result.epochs),
                )
            )
        except DivergenceError as exc:
            rows.append(
                SweepRow(
                    learning_rate=cell_config.learning_rate,
                    dropout=cell_config.dropout,
                    freeze_embeddings=cell_config.freeze_embeddings,
                    best_val_em=None,
                    epochs_run=exc.epoch,
                    error=str(exc),
                )
            )
    rows.sort(key=lambda r: (r.best_val_em is None, -(r.best_val_em or 0.0)))
    return rows


def write_sweep_csv(rows: Sequence[SweepRow], path: str | Path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["learning_rate", "dropout", "freeze_embeddings",
                         "best_val_em", "epochs_run", "error"])
        for row in rows:
            writer.writerow([
                repr(row.learning_rate), repr(row.dropout), row.freeze_embeddings,
                "" if row.best_val_em is None else repr(row.best_val_em),
                row.epochs_run, row.error or "",
            ])
