"""Classifier archetypes over an encoder, plus the optional duration heads.

Three archetypes share one skeleton: build a hidden representation, apply
dropout once, and project to three change logits (DEC, UNC, INC order).

- ``transformer``: pooled vector of the joint pair encoding.
- ``siamese``: [h_t, h_f, h_t - h_f, h_t * h_f] from two separate encodings.
- ``selfexplain``: attention-weighted pooling over contiguous token spans
  of each statement, with a squared-attention sparsity term.

With ``multitask=True`` two single-output regression layers predict the
original and updated normalized durations from the same representation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import torch
from torch import Tensor, nn

from tvcp.errors import ContractError
from tvcp.models.encoder import EncodedBatch, EncodedPair, TextPairEncoder

ARCHETYPES = ("transformer", "siamese", "selfexplain")

#: Parameter-name prefixes whose init draws come from a separate stream, so
#: adding the duration heads never perturbs the shared initialization.
AUX_PARAM_PREFIXES = ("reg_original.", "reg_updated.")


def reset_parameters(module: nn.Module, seed: int) -> None:
    """Deterministic re-initialization, independent of torch's global RNG.

    Weights draw from N(0, 0.02); norm gains are 1, everything else 0.
    Parameters under :data:`AUX_PARAM_PREFIXES` use a separate generator
    keyed off the same seed.
    """
    g_main = torch.Generator().manual_seed(seed)
    g_aux = torch.Generator().manual_seed(seed + 104_729)
    with torch.no_grad():
        for name, p in sorted(module.named_parameters()):
            g = g_aux if name.startswith(AUX_PARAM_PREFIXES) else g_main
            if p.dim() >= 2:
                p.normal_(0.0, 0.02, generator=g)
            elif "norm" in name.lower() and name.endswith("weight"):
                p.fill_(1.0)
            else:
                p.zero_()


def siamese_features(h_st: Tensor, h_sf: Tensor) -> Tensor:
    """[h_t, h_f, h_t - h_f, h_t * h_f] along the last axis (length 4H)."""
    if h_st.shape != h_sf.shape:
        raise ContractError(
            f"vector shapes differ: {tuple(h_st.shape)} vs {tuple(h_sf.shape)}"
        )
    return torch.cat([h_st, h_sf, h_st - h_sf, h_st * h_sf], dim=-1)


@dataclass
class SpanAnalysis:
    """Span decomposition of one encoded pair."""

    spans: list[tuple[int, int, int]]  # (statement index, start, length)
    representations: Tensor  # [n_spans, H]
    attention: Tensor  # [n_spans], sums to 1
    sparsity: Tensor  # scalar, sum of squared attention weights


class SpanPool(nn.Module):
    """Attention over contiguous spans (length <= L) within each statement.

    Span representations are means of their token states; a learned scorer
    produces softmax attention over the union of both statements' spans.
    Spans never cross the statement boundary.
    """

    def __init__(self, hidden_size: int, max_span_length: int = 5):
        super().__init__()
        if max_span_length < 1:
            raise ContractError(f"max_span_length must be >= 1, got {max_span_length}")
        self.max_span_length = max_span_length
        self.scorer = nn.Linear(hidden_size, 1)

    def _segment_spans(
        self, states: Tensor, lengths: Tensor
    ) -> tuple[Tensor, Tensor, list[tuple[int, int]]]:
        """All candidate spans of one zero-padded segment tensor.

        Returns (reps [B, S, H], valid [B, S], candidates [(start, length)]).
        """
        batch, max_len, hidden = states.shape
        prefix = torch.cumsum(
            torch.cat([states.new_zeros(batch, 1, hidden), states], dim=1), dim=1
        )
        starts, lens = [], []
        for length in range(1, min(self.max_span_length, max_len) + 1):
            for start in range(0, max_len - length + 1):
                starts.append(start)
                lens.append(length)
        start_idx = torch.tensor(starts, dtype=torch.long, device=states.device)
        len_idx = torch.tensor(lens, dtype=torch.long, device=states.device)
        reps = (
            prefix.index_select(1, start_idx + len_idx) - prefix.index_select(1, start_idx)
        ) / len_idx.unsqueeze(-1)
        valid = (start_idx + len_idx).unsqueeze(0) <= lengths.unsqueeze(1)
        return reps, valid, list(zip(starts, lens))

    def forward(
        self,
        target_states: Tensor,
        target_lengths: Tensor,
        followup_states: Tensor,
        followup_lengths: Tensor,
    ) -> tuple[Tensor, Tensor, Tensor, Tensor]:
        """Pooled representation, attention, validity mask, sparsity term."""
        reps_t, valid_t, _ = self._segment_spans(target_states, target_lengths)
        reps_f, valid_f, _ = self._segment_spans(followup_states, followup_lengths)
        reps = torch.cat([reps_t, reps_f], dim=1)
        valid = torch.cat([valid_t, valid_f], dim=1)
        scores = self.scorer(reps).squeeze(-1)
        scores = scores.masked_fill(~valid, -math.inf)
        attention = torch.softmax(scores, dim=-1)
        pooled = torch.einsum("bs,bsh->bh", attention, reps)
        sparsity = (attention * attention).sum(dim=-1)
        return pooled, attention, valid, sparsity

    def analyze_pair(self, pair: EncodedPair) -> SpanAnalysis:
        """Span decomposition for a single pair (statement-tagged spans)."""
        segments = [pair.target_states, pair.followup_states]
        spans: list[tuple[int, int, int]] = []
        reps: list[Tensor] = []
        for stmt_idx, states in enumerate(segments):
            if states.shape[0] < 1:
                raise ContractError("each statement needs at least one token state")
            batched = states.unsqueeze(0)
            lengths = torch.tensor([states.shape[0]], device=states.device)
            r, valid, candidates = self._segment_spans(batched, lengths)
            keep = valid[0]
            reps.append(r[0][keep])
            for (start, length), ok in zip(candidates, keep.tolist()):
                if ok:
                    spans.append((stmt_idx, start, length))
        all_reps = torch.cat(reps, dim=0)
        scores = self.scorer(all_reps).squeeze(-1)
        attention = torch.softmax(scores, dim=-1)
        sparsity = (attention * attention).sum()
        return SpanAnalysis(
            spans=spans, representations=all_reps, attention=attention, sparsity=sparsity
        )


def selfexplain_spans(
    pool: SpanPool, pair: EncodedPair
) -> SpanAnalysis:
    """Enumerate spans of both statements and score them with ``pool``."""
    return pool.analyze_pair(pair)


@dataclass
class ModelOutput:
    """Batched head outputs (tensors keep autograd history)."""

    logits: Tensor  # [B, 3]
    pred_original: Tensor | None = None  # [B]
    pred_updated: Tensor | None = None  # [B]
    span_attention: Tensor | None = None  # [B, S]
    span_mask: Tensor | None = None  # [B, S]
    sparsity: Tensor | None = None  # [B]


@dataclass
class ClassifierOutput:
    """Single-sample view with plain Python values."""

    change_logits: tuple[float, float, float]
    predicted_original: float | None = None
    predicted_updated: float | None = None
    span_attention: list[float] | None = None


class ChangeClassifier(nn.Module):
    """One archetype head over an encoder, optionally with duration heads."""

    def __init__(
        self,
        encoder: TextPairEncoder,
        archetype: str = "transformer",
        dropout: float = 0.1,
        multitask: bool = False,
        max_span_length: int = 5,
    ):
        super().__init__()
        if archetype not in ARCHETYPES:
            raise ContractError(f"unknown archetype: {archetype!r}")
        self.encoder = encoder
        self.archetype = archetype
        self.multitask = multitask
        hidden = encoder.hidden_size
        in_dim = 4 * hidden if archetype == "siamese" else hidden
        self.dropout = nn.Dropout(dropout)
        if archetype == "selfexplain":
            self.span_pool = SpanPool(hidden, max_span_length)
        self.classifier = nn.Linear(in_dim, 3)
        if multitask:
            self.reg_original = nn.Linear(in_dim, 1)
            self.reg_updated = nn.Linear(in_dim, 1)

    @property
    def required_mode(self) -> str:
        return "separate" if self.archetype == "siamese" else "concatenated"

    def encode_pairs(self, pairs: list[tuple[str, str]]) -> EncodedBatch:
        return self.encoder.encode_batch(pairs, self.required_mode)

    def forward(self, batch: EncodedBatch) -> ModelOutput:
        if batch.mode != self.required_mode:
            raise ContractError(
                f"archetype {self.archetype!r} needs {self.required_mode!r} "
                f"encodings, got {batch.mode!r}"
            )
        span_attention = span_mask = sparsity = None
        if self.archetype == "transformer":
            hidden = batch.pooled_st
        elif self.archetype == "siamese":
            hidden = siamese_features(batch.pooled_st, batch.pooled_sf)
        else:
            hidden, span_attention, span_mask, sparsity = self.span_pool(
                batch.target_states,
                batch.target_lengths,
                batch.followup_states,
                batch.followup_lengths,
            )
        dropped = self.dropout(hidden)
        logits = self.classifier(dropped)
        pred_original = pred_updated = None
        if self.multitask:
            pred_original = self.reg_original(dropped).squeeze(-1)
            pred_updated = self.reg_updated(dropped).squeeze(-1)
        return ModelOutput(
            logits=logits,
            pred_original=pred_original,
            pred_updated=pred_updated,
            span_attention=span_attention,
            span_mask=span_mask,
            sparsity=sparsity,
        )

    def classify_pair(self, pair: EncodedPair) -> ClassifierOutput:
        """Single-pair forward returning plain values."""
        batch = _pair_as_batch(pair)
        out = self(batch)
        logits = tuple(float(v) for v in out.logits[0].detach())
        attention = None
        if out.span_attention is not None:
            keep = out.span_mask[0]
            attention = [float(v) for v in out.span_attention[0][keep].detach()]
        return ClassifierOutput(
            change_logits=logits,  # type: ignore[arg-type]
            predicted_original=(
                float(out.pred_original[0]) if out.pred_original is not None else None
            ),
            predicted_updated=(
                float(out.pred_updated[0]) if out.pred_updated is not None else None
            ),
            span_attention=attention,
        )


def _pair_as_batch(pair: EncodedPair) -> EncodedBatch:
    return EncodedBatch(
        mode=pair.mode,
        pooled_st=pair.h_st.unsqueeze(0),
        pooled_sf=pair.h_sf.unsqueeze(0),
        target_states=pair.target_states.unsqueeze(0),
        target_lengths=torch.tensor([pair.target_states.shape[0]]),
        followup_states=pair.followup_states.unsqueeze(0),
        followup_lengths=torch.tensor([pair.followup_states.shape[0]]),
        truncated=[pair.truncated],
    )


def build_classifier(
    encoder_config,
    archetype: str = "transformer",
    dropout: float = 0.1,
    multitask: bool = False,
    max_span_length: int = 5,
    seed: int = 0,
) -> ChangeClassifier:
    """Encoder + head with deterministic initialization."""
    from tvcp.models.encoder import build_encoder

    encoder = build_encoder(encoder_config)
    model = ChangeClassifier(
        encoder,
        archetype=archetype,
        dropout=dropout,
        multitask=multitask,
        max_span_length=max_span_length,
    )
    reset_parameters(model, seed)
    return model
