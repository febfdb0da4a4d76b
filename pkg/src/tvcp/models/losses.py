"""Combined training objective: cross-entropy + weighted auxiliary terms."""

from __future__ import annotations

from dataclasses import dataclass

import torch
import torch.nn.functional as F
from torch import Tensor

from tvcp.errors import ContractError
from tvcp.models.heads import ModelOutput


@dataclass
class LossBreakdown:
    """Component losses; ``total = ce + lambda_reg * regression + lambda_span * span``.

    All components are 0-dim tensors; ``total`` carries the autograd graph.
    Zero-weighted components are detached, so they report values without
    contributing gradients.
    """

    cross_entropy: Tensor
    regression: Tensor
    span_sparsity: Tensor
    lambda_reg: float
    lambda_span: float
    total: Tensor

    def scalars(self) -> dict[str, float]:
        return {
            "ce": float(self.cross_entropy.detach()),
            "reg": float(self.regression.detach()),
            "span": float(self.span_sparsity.detach()),
            "total": float(self.total.detach()),
        }


def combined_loss(
    output: ModelOutput,
    gold_labels: Tensor,
    gold_original: Tensor | None = None,
    gold_updated: Tensor | None = None,
    lambda_reg: float = 1.0,
    lambda_span: float = 1.0,
) -> LossBreakdown:
    """Mean-reduced loss over a batch.

    ``gold_original``/``gold_updated`` are normalized duration targets in
    [0, 1]; they are required whenever the duration heads are present and
    ``lambda_reg`` is positive.
    """
    if lambda_reg < 0 or lambda_span < 0:
        raise ContractError("loss weights must be non-negative")
    ce = F.cross_entropy(output.logits, gold_labels)

    zero = output.logits.new_zeros(())
    multitask = output.pred_original is not None and output.pred_updated is not None
    if multitask:
        if gold_original is None or gold_updated is None:
            if lambda_reg > 0:
                raise ContractError(
                    "gold durations are required when lambda_reg > 0 "
                    "and duration heads are present"
                )
            regression = zero.clone()
        else:
            regression = F.mse_loss(output.pred_original, gold_original) + F.mse_loss(
                output.pred_updated, gold_updated
            )
            if lambda_reg == 0:
                regression = regression.detach()
    else:
        regression = zero.clone()

    if output.sparsity is not None:
        span = output.sparsity.mean()
        if lambda_span == 0:
            span = span.detach()
    else:
        span = zero.clone()

    total = ce + lambda_reg * regression + lambda_span * span
    return LossBreakdown(
        cross_entropy=ce,
        regression=regression,
        span_sparsity=span,
        lambda_reg=lambda_reg,
        lambda_span=lambda_span,
        total=total,
    )
