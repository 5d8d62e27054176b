"""Reconstruction-plus-matched-property training objective."""

from __future__ import annotations

from dataclasses import dataclass

import torch
from torch import Tensor

from perception.matching import binary_cross_entropy, hungarian_match


@dataclass(frozen=True)
class LossConfig:
    alpha: float = 0.35  # balance between reconstruction and property terms
    iterations: int = 3
    seed: int = 0

    def __post_init__(self) -> None:
        if self.alpha < 0:
            raise ValueError("alpha must be non-negative")


def matched_property_bce(targets: Tensor, predictions: Tensor) -> Tensor:
    """min over slot permutations of the summed BCE, realized by the matcher.

    Batched: (B, K, P+1) against (B, K, P+1); the permutation is chosen per
    image on the detached costs, the loss is differentiable through the
    selected rows.
    """
    total = targets.new_zeros(())
    for target, prediction in zip(targets, predictions):
        tau = hungarian_match(target, prediction)
        total = total + binary_cross_entropy(target, prediction[tau]).sum()
    return total / targets.shape[0]


def loss(x: Tensor, x_hat: Tensor, y: Tensor, y_hat: Tensor,
         config: LossConfig = LossConfig()) -> Tensor:
    """MSE(x, x_hat) + alpha * matched BCE(y, y_hat)."""
    if x.shape != x_hat.shape or y.shape != y_hat.shape:
        raise ValueError("shape mismatch between targets and predictions")
    mse = ((x - x_hat) ** 2).mean()
    return mse + config.alpha * matched_property_bce(y, y_hat)
