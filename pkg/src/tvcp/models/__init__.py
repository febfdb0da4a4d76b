"""Classifier archetypes, encoder backends, and the combined loss."""

from tvcp.models.encoder import (
    EncodedBatch,
    EncodedPair,
    EncoderConfig,
    TextPairEncoder,
    build_encoder,
    encode,
)
from tvcp.models.heads import (
    ARCHETYPES,
    ChangeClassifier,
    ClassifierOutput,
    ModelOutput,
    SpanAnalysis,
    SpanPool,
    build_classifier,
    reset_parameters,
    selfexplain_spans,
    siamese_features,
)
from tvcp.models.losses import LossBreakdown, combined_loss

__all__ = [
    "ARCHETYPES",
    "ChangeClassifier",
    "ClassifierOutput",
    "EncodedBatch",
    "EncodedPair",
    "EncoderConfig",
    "LossBreakdown",
    "ModelOutput",
    "SpanAnalysis",
    "SpanPool",
    "TextPairEncoder",
    "build_classifier",
    "build_encoder",
    "combined_loss",
    "encode",
    "reset_parameters",
    "selfexplain_spans",
    "siamese_features",
]
