from itertools import permutations

import pytest
import torch

from perception.matching import assign, hungarian_match, pairwise_bce_cost


def brute_force_assignment(cost):
    k = cost.shape[0]
    best, best_total = None, float("inf")
    for perm in permutations(range(k)):
        total = sum(cost[i, perm[i]].item() for i in range(k))
        if total < best_total:
            best, best_total = list(perm), total
    return best, best_total


def test_identity_favoring_diagonal():
    cost = torch.full((4, 4), 5.0)
    cost.fill_diagonal_(0.1)
    assert assign(cost) == [0, 1, 2, 3]


def test_two_by_two_swap():
    cost = torch.tensor([[1.0, 0.0], [0.0, 1.0]])
    assert assign(cost) == [1, 0]


@pytest.mark.parametrize("k", [2, 3, 4, 5, 6])
def test_matches_brute_force_total_cost(k):
    generator = torch.Generator().manual_seed(k)
    for _ in range(20):
        cost = torch.rand(k, k, generator=generator)
        tau = assign(cost)
        total = sum(cost[i, tau[i]].item() for i in range(k))
        _, best_total = brute_force_assignment(cost)
        assert total == pytest.approx(best_total, abs=1e-9)


def test_non_finite_costs_rejected():
    cost = torch.tensor([[0.0, float("inf")], [1.0, 0.0]])
    with pytest.raises(ValueError):
        assign(cost)


def test_hungarian_match_recovers_row_permutation():
    generator = torch.Generator().manual_seed(11)
    targets = (torch.rand(5, 9, generator=generator) > 0.5).float()
    perm = [3, 0, 4, 2, 1]
    noisy = targets[perm].clamp(0.02, 0.98)
    tau = hungarian_match(targets, noisy)
    assert [perm[t] for t in tau] == list(range(5)) or tau == [
        perm.index(i) for i in range(5)
    ]
    aligned = noisy[tau]
    assert ((aligned > 0.5).float() == targets).all()


def test_pairwise_cost_shape_and_symmetric_use():
    targets = torch.eye(3)
    predictions = torch.eye(3).clamp(0.1, 0.9)
    cost = pairwise_bce_cost(targets, predictions)
    assert cost.shape == (3, 3)
    assert hungarian_match(targets, predictions) == [0, 1, 2]
