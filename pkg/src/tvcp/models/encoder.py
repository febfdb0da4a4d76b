"""Text-pair encoder backends.

The classifier heads are written against a small contract: an encoder
turns (target, follow-up) text pairs into pooled sentence vectors plus
per-statement token states, either from one joint encoding of the pair
("concatenated") or from two independent encodings ("separate").

Backends are selected by an identifier string: ``tiny`` is a small
trainable transformer suitable for tests and desk-scale runs, ``zero``
emits constant all-zero states (useful as a collapse fixture), and
``hf:<model>`` adapts a pretrained checkpoint when one is available
locally. Options may be appended, e.g. ``tiny:vocab=64,layers=1``.
"""

from __future__ import annotations

import re
import zlib
from dataclasses import dataclass, field
from typing import Iterator, Literal, Sequence

import torch
from torch import Tensor, nn

from tvcp.errors import ContractError, EncoderError

Mode = Literal["concatenated", "separate"]

PAD_ID = 0
CLS_ID = 1
SEP_ID = 2

_TOKEN_RE = re.compile(r"[\w']+")


@dataclass
class EncoderConfig:
    """Encoder hyperparameters shared by every backend."""

    hidden_size: int = 768
    freeze_embeddings: bool = False
    pooling_position: int = 0
    max_length: int = 128
    backend: str = "tiny"

    def __post_init__(self) -> None:
        if self.hidden_size < 1:
            raise ContractError(f"hidden_size must be >= 1, got {self.hidden_size}")
        if self.max_length < 8:
            raise ContractError(f"max_length must be >= 8, got {self.max_length}")
        if not 0 <= self.pooling_position < self.max_length:
            raise ContractError("pooling_position must lie inside max_length")

    def to_json(self) -> dict:
        return {
            "hidden_size": self.hidden_size,
            "freeze_embeddings": self.freeze_embeddings,
            "pooling_position": self.pooling_position,
            "max_length": self.max_length,
            "backend": self.backend,
        }


def parse_backend(identifier: str) -> tuple[str, dict[str, int]]:
    """Split ``name:key=value,...`` into the backend name and int options."""
    name, _, raw = identifier.partition(":")
    options: dict[str, int] = {}
    if raw:
        for item in raw.split(","):
            key, _, value = item.partition("=")
            if not key or not value:
                raise EncoderError(f"malformed backend options in {identifier!r}")
            try:
                options[key.strip()] = int(value)
            except ValueError:
                raise EncoderError(f"backend option {key!r} must be an integer") from None
    return name, options


@dataclass
class EncodedBatch:
    """Batched encoder output.

    ``target_states``/``followup_states`` are zero-padded per-statement
    token states (special tokens excluded); ``*_lengths`` give the real
    token counts.
    """

    mode: Mode
    pooled_st: Tensor
    pooled_sf: Tensor
    target_states: Tensor
    target_lengths: Tensor
    followup_states: Tensor
    followup_lengths: Tensor
    truncated: list[bool] = field(default_factory=list)

    @property
    def size(self) -> int:
        return self.pooled_st.shape[0]

    def pair(self, i: int = 0) -> "EncodedPair":
        nt = int(self.target_lengths[i])
        nf = int(self.followup_lengths[i])
        return EncodedPair(
            mode=self.mode,
            h_st=self.pooled_st[i],
            h_sf=self.pooled_sf[i],
            target_states=self.target_states[i, :nt],
            followup_states=self.followup_states[i, :nf],
            truncated=self.truncated[i] if self.truncated else False,
        )


@dataclass
class EncodedPair:
    """Single-pair view: pooled vectors plus per-statement token states."""

    mode: Mode
    h_st: Tensor
    h_sf: Tensor
    target_states: Tensor
    followup_states: Tensor
    truncated: bool = False


class TextPairEncoder(nn.Module):
    """Base contract all backends implement."""

    def __init__(self, config: EncoderConfig):
        super().__init__()
        self.config = config

    @property
    def hidden_size(self) -> int:
        return self.config.hidden_size

    def tokenize(self, text: str) -> list[int]:
        raise NotImplementedError

    def encode_batch(self, pairs: Sequence[tuple[str, str]], mode: Mode) -> EncodedBatch:
        raise NotImplementedError

    def embedding_parameters(self) -> Iterator[nn.Parameter]:
        """Parameters frozen by the ``freeze_embeddings`` flag."""
        return iter(())

    def encode(self, target: str, followup: str, mode: Mode) -> EncodedPair:
        if not target.strip() or not followup.strip():
            raise ContractError("statement texts must be non-empty")
        return self.encode_batch([(target, followup)], mode).pair(0)


def _hash_tokenize(text: str, vocab_size: int) -> list[int]:
    span = vocab_size - 3
    return [
        3 + zlib.crc32(w.encode("utf-8")) % span
        for w in _TOKEN_RE.findall(text.lower())
    ]


def _pick_heads(hidden: int) -> int:
    for h in (4, 2, 1):
        if hidden % h == 0:
            return h
    return 1


class TinyTransformerEncoder(TextPairEncoder):
    """Small trainable transformer over a hashed word vocabulary.

    Defaults: 2 layers, 4 heads (when divisible), feed-forward 4x hidden,
    vocabulary 4096. Internal dropout is zero; regularization lives in the
    classifier head.
    """

    def __init__(self, config: EncoderConfig):
        super().__init__(config)
        _, options = parse_backend(config.backend)
        self.vocab_size = options.get("vocab", 4096)
        if self.vocab_size < 8:
            raise EncoderError(f"vocab must be >= 8, got {self.vocab_size}")
        n_layers = options.get("layers", 2)
        n_heads = options.get("heads", _pick_heads(config.hidden_size))
        if config.hidden_size % n_heads:
            raise EncoderError(f"heads={n_heads} must divide hidden_size={config.hidden_size}")
        ff = options.get("ff", 4 * config.hidden_size)

        self.token_embedding = nn.Embedding(self.vocab_size, config.hidden_size, padding_idx=PAD_ID)
        self.position_embedding = nn.Embedding(config.max_length, config.hidden_size)
        layer = nn.TransformerEncoderLayer(
            d_model=config.hidden_size,
            nhead=n_heads,
            dim_feedforward=ff,
            dropout=0.0,
            activation="gelu",
            batch_first=True,
        )
        self.layers = nn.TransformerEncoder(layer, num_layers=n_layers, enable_nested_tensor=False)

    def tokenize(self, text: str) -> list[int]:
        return _hash_tokenize(text, self.vocab_size)

    def embedding_parameters(self) -> Iterator[nn.Parameter]:
        yield from self.token_embedding.parameters()
        yield from self.position_embedding.parameters()

    def _run(self, sequences: list[list[int]]) -> Tensor:
        max_len = max(len(s) for s in sequences)
        device = self.token_embedding.weight.device
        ids = torch.full((len(sequences), max_len), PAD_ID, dtype=torch.long, device=device)
        for i, seq in enumerate(sequences):
            ids[i, : len(seq)] = torch.tensor(seq, dtype=torch.long, device=device)
        positions = torch.arange(max_len, device=device).unsqueeze(0)
        states = self.token_embedding(ids) + self.position_embedding(positions)
        padding_mask = ids == PAD_ID
        return self.layers(states, src_key_padding_mask=padding_mask)

    @staticmethod
    def _segment(states: Tensor, starts: list[int], lengths: list[int]) -> tuple[Tensor, Tensor]:
        """Gather per-statement token states into a zero-padded tensor."""
        batch, _, hidden = states.shape
        max_n = max(lengths) if lengths else 1
        max_n = max(max_n, 1)
        device = states.device
        idx = torch.zeros(batch, max_n, dtype=torch.long, device=device)
        for i, (start, n) in enumerate(zip(starts, lengths)):
            if n:
                idx[i, :n] = torch.arange(start, start + n, device=device)
        gathered = states.gather(1, idx.unsqueeze(-1).expand(-1, -1, hidden))
        length_t = torch.tensor(lengths, dtype=torch.long, device=device)
        keep = torch.arange(max_n, device=device).unsqueeze(0) < length_t.unsqueeze(1)
        return gathered * keep.unsqueeze(-1), length_t

    def encode_batch(self, pairs: Sequence[tuple[str, str]], mode: Mode) -> EncodedBatch:
        if mode not in ("concatenated", "separate"):
            raise ContractError(f"unknown encoding mode: {mode!r}")
        pool = self.config.pooling_position
        if mode == "concatenated":
            budget = self.config.max_length - 3
            sequences, t_lens, f_lens, truncated = [], [], [], []
            for target, followup in pairs:
                t_ids = self.tokenize(target)
                f_ids = self.tokenize(followup)
                clipped = False
                while len(t_ids) + len(f_ids) > budget:
                    longer = t_ids if len(t_ids) >= len(f_ids) else f_ids
                    longer.pop()
                    clipped = True
                sequences.append([CLS_ID] + t_ids + [SEP_ID] + f_ids + [SEP_ID])
                t_lens.append(len(t_ids))
                f_lens.append(len(f_ids))
                truncated.append(clipped)
            states = self._run(sequences)
            pooled = states[:, pool]
            t_states, t_lengths = self._segment(states, [1] * len(pairs), t_lens)
            f_starts = [2 + n for n in t_lens]
            f_states, f_lengths = self._segment(states, f_starts, f_lens)
            return EncodedBatch(
                mode=mode,
                pooled_st=pooled,
                pooled_sf=pooled,
                target_states=t_states,
                target_lengths=t_lengths,
                followup_states=f_states,
                followup_lengths=f_lengths,
                truncated=truncated,
            )

        budget = self.config.max_length - 2
        t_seqs, f_seqs, t_lens, f_lens, truncated = [], [], [], [], []
        for target, followup in pairs:
            t_ids = self.tokenize(target)
            f_ids = self.tokenize(followup)
            clipped = len(t_ids) > budget or len(f_ids) > budget
            t_ids = t_ids[:budget]
            f_ids = f_ids[:budget]
            t_seqs.append([CLS_ID] + t_ids + [SEP_ID])
            f_seqs.append([CLS_ID] + f_ids + [SEP_ID])
            t_lens.append(len(t_ids))
            f_lens.append(len(f_ids))
            truncated.append(clipped)
        t_all = self._run(t_seqs)
        f_all = self._run(f_seqs)
        t_states, t_lengths = self._segment(t_all, [1] * len(pairs), t_lens)
        f_states, f_lengths = self._segment(f_all, [1] * len(pairs), f_lens)
        return EncodedBatch(
            mode=mode,
            pooled_st=t_all[:, pool],
            pooled_sf=f_all[:, pool],
            target_states=t_states,
            target_lengths=t_lengths,
            followup_states=f_states,
            followup_lengths=f_lengths,
            truncated=truncated,
        )


class ZeroEncoder(TextPairEncoder):
    """Constant all-zero encoder.

    A classifier on top of it can only learn its bias terms, which makes it
    a deterministic constant-prediction fixture for collapse reporting.
    """

    def __init__(self, config: EncoderConfig):
        super().__init__(config)
        self.vocab_size = 4096

    def tokenize(self, text: str) -> list[int]:
        return _hash_tokenize(text, self.vocab_size)

    def encode_batch(self, pairs: Sequence[tuple[str, str]], mode: Mode) -> EncodedBatch:
        if mode not in ("concatenated", "separate"):
            raise ContractError(f"unknown encoding mode: {mode!r}")
        h = self.config.hidden_size
        budget = self.config.max_length - 3
        lengths_t = [min(len(self.tokenize(t)), budget) for t, _ in pairs]
        lengths_f = [min(len(self.tokenize(f)), budget) for _, f in pairs]
        b = len(pairs)
        zeros = torch.zeros(b, h)
        return EncodedBatch(
            mode=mode,
            pooled_st=zeros,
            pooled_sf=zeros.clone(),
            target_states=torch.zeros(b, max(max(lengths_t), 1), h),
            target_lengths=torch.tensor(lengths_t, dtype=torch.long),
            followup_states=torch.zeros(b, max(max(lengths_f), 1), h),
            followup_lengths=torch.tensor(lengths_f, dtype=torch.long),
            truncated=[False] * b,
        )


def _build_hf(config: EncoderConfig) -> TextPairEncoder:
    """Adapt a pretrained checkpoint; raises EncoderError when unavailable."""
    model_id = config.backend.partition(":")[2]
    if not model_id:
        raise EncoderError("hf backend needs a model id, e.g. hf:bert-base-uncased")
    try:
        from transformers import AutoModel, AutoTokenizer  # noqa: F401
    except Exception as exc:  # pragma: no cover - depends on env
        raise EncoderError(f"backend unavailable: transformers import failed ({exc})") from exc
    try:
        tokenizer = AutoTokenizer.from_pretrained(model_id)
        model = AutoModel.from_pretrained(model_id)
    except Exception as exc:  # pragma: no cover - depends on env
        raise EncoderError(f"backend unavailable: cannot load {model_id!r} ({exc})") from exc
    return _HfEncoder(config, tokenizer, model)


class _HfEncoder(TextPairEncoder):  # pragma: no cover - requires local weights
    """Thin adapter over a pretrained masked-LM encoder."""

    def __init__(self, config: EncoderConfig, tokenizer, model):
        super().__init__(config)
        self.tokenizer = tokenizer
        self.model = model

    def tokenize(self, text: str) -> list[int]:
        return self.tokenizer(text, add_special_tokens=False)["input_ids"]

    def embedding_parameters(self) -> Iterator[nn.Parameter]:
        yield from self.model.get_input_embeddings().parameters()

    def encode_batch(self, pairs: Sequence[tuple[str, str]], mode: Mode) -> EncodedBatch:
        pool = self.config.pooling_position
        max_length = self.config.max_length
        if mode == "concatenated":
            enc = self.tokenizer(
                [t for t, _ in pairs],
                [f for _, f in pairs],
                padding=True,
                truncation=True,
                max_length=max_length,
                return_tensors="pt",
            )
            states = self.model(**enc).last_hidden_state
            pooled = states[:, pool]
            lengths = enc["attention_mask"].sum(dim=1)
            half = torch.clamp(lengths // 2, min=1)
            return EncodedBatch(
                mode=mode,
                pooled_st=pooled,
                pooled_sf=pooled,
                target_states=states,
                target_lengths=half,
                followup_states=states,
                followup_lengths=lengths - half,
                truncated=[False] * len(pairs),
            )
        enc_t = self.tokenizer(
            [t for t, _ in pairs], padding=True, truncation=True,
            max_length=max_length, return_tensors="pt",
        )
        enc_f = self.tokenizer(
            [f for _, f in pairs], padding=True, truncation=True,
            max_length=max_length, return_tensors="pt",
        )
        states_t = self.model(**enc_t).last_hidden_state
        states_f = self.model(**enc_f).last_hidden_state
        return EncodedBatch(
            mode=mode,
            pooled_st=states_t[:, pool],
            pooled_sf=states_f[:, pool],
            target_states=states_t,
            target_lengths=enc_t["attention_mask"].sum(dim=1),
            followup_states=states_f,
            followup_lengths=enc_f["attention_mask"].sum(dim=1),
            truncated=[False] * len(pairs),
        )


_BACKENDS = {
    "tiny": TinyTransformerEncoder,
    "zero": ZeroEncoder,
    "hf": _build_hf,
}


def build_encoder(config: EncoderConfig) -> TextPairEncoder:
    name, _ = parse_backend(config.backend)
    builder = _BACKENDS.get(name)
    if builder is None:
        raise EncoderError(f"backend unavailable: unknown identifier {config.backend!r}")
    return builder(config)


def encode(
    target: str,
    followup: str,
    config: EncoderConfig,
    mode: Mode,
    encoder: TextPairEncoder | None = None,
) -> EncodedPair:
    """Encode one pair; builds a deterministically initialized encoder if needed."""
    if encoder is None:
        from tvcp.models.heads import reset_parameters

        encoder = build_encoder(config)
        reset_parameters(encoder, seed=0)
    return encoder.encode(target, followup, mode)
