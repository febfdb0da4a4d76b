"""Benchmarking toolkit for temporal validity change prediction.

Subpackages cover the label algebra (:mod:`tvcp.schema`), dataset tooling
(:mod:`tvcp.dataset`), statement pre-filters (:mod:`tvcp.filters`), the
classifier archetypes (:mod:`tvcp.models`), training and sweeps
(:mod:`tvcp.training`), metrics and significance (:mod:`tvcp.evaluation`),
the chat-model evaluation harness (:mod:`tvcp.llm`), and the annotation
service (:mod:`tvcp.service`). ``tvcp.cli`` ties the workflows together.
"""

__version__ = "0.1.0"
