"""Training objective: reconstruction error plus the per-feature head losses.

The head term is the sum over the 15 features of categorical
cross-entropy between each softmax head and its class label.  The
reconstruction term is pixelwise binary cross-entropy between the
sigmoid-activated output and the clean target.  The total is their sum;
both terms are batch means so the objective is batch-size invariant.
"""

from __future__ import annotations

from typing import Sequence

import torch
from torch.nn import functional as F


def head_loss(logits: Sequence[torch.Tensor], labels: torch.Tensor) -> torch.Tensor:
    """Sum over features of categorical cross-entropy, batch-averaged."""
    if labels.dim() != 2 or labels.shape[1] != len(logits):
        raise ValueError(
            f"labels must be (batch, {len(logits)}), got {tuple(labels.shape)}"
        )
    total = torch.zeros((), dtype=torch.float32)
    for j, head_logits in enumerate(logits):
        if head_logits.shape[0] != labels.shape[0]:
            raise ValueError(
                f"head {j}: {head_logits.shape[0]} rows vs {labels.shape[0]} labels"
            )
        total = total + F.cross_entropy(head_logits, labels[:, j])
    return total


def recon_loss(recon: torch.Tensor, target: torch.Tensor) -> torch.Tensor:
    """Mean pixelwise binary cross-entropy against the clean target."""
    if recon.shape != target.shape:
        raise ValueError(f"shape mismatch: {tuple(recon.shape)} vs {tuple(target.shape)}")
    return F.binary_cross_entropy(recon, target)


def total_loss(
    recon: torch.Tensor,
    target: torch.Tensor,
    logits: Sequence[torch.Tensor],
    labels: torch.Tensor,
) -> torch.Tensor:
    return recon_loss(recon, target) + head_loss(logits, labels)
