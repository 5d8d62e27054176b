"""Hungarian alignment of predicted slots with ground-truth object rows."""

from __future__ import annotations

import torch
from scipy.optimize import linear_sum_assignment
from torch import Tensor

BCE_EPS = 1e-7


def binary_cross_entropy(target: Tensor, prediction: Tensor) -> Tensor:
    """Elementwise BCE with clamping; sums over the trailing dimension."""
    p = prediction.clamp(BCE_EPS, 1.0 - BCE_EPS)
    return -(target * p.log() + (1.0 - target) * (1.0 - p).log()).sum(dim=-1)


def pairwise_bce_cost(targets: Tensor, predictions: Tensor) -> Tensor:
    """(K, P+1) x (K, P+1) -> (K, K) cost matrix: cost[i, j] = BCE(y_i, yhat_j)."""
    return binary_cross_entropy(
        targets.unsqueeze(1), predictions.unsqueeze(0))


def assign(cost: Tensor) -> list[int]:
    """Minimum-cost assignment on a square cost matrix: tau[i] = chosen column."""
    if not torch.isfinite(cost).all():
        raise ValueError("non-finite assignment costs")
    rows, cols = linear_sum_assignment(cost.detach().cpu().numpy())
    tau = [0] * len(rows)
    for r, c in zip(rows, cols):
        tau[r] = int(c)
    return tau


def hungarian_match(targets: Tensor, predictions: Tensor) -> list[int]:
    """Permutation tau minimizing the total pairwise BCE assignment cost.

    tau[i] is the prediction row assigned to target row i; for K <= 6 the
    result equals the brute-force minimum over all K! permutations.
    """
    return assign(pairwise_bce_cost(targets, predictions))
