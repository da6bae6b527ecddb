import math
import random

import pytest
import torch

from srtk_trainer.losses import loss_cross_entropy, loss_ntxent


def orthonormal_case():
    q = torch.tensor([1.0, 0.0, 0.0, 0.0], dtype=torch.float64)
    pos = torch.tensor([1.0, 0.0, 0.0, 0.0], dtype=torch.float64)
    negs = torch.tensor(
        [[0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0]], dtype=torch.float64
    )
    return q, pos, negs


def test_cross_entropy_hand_value():
    q, pos, negs = orthonormal_case()  # cosines [1, 0, 0]
    loss = loss_cross_entropy(q, pos, negs, temperature=1.0)
    assert loss.item() == pytest.approx(0.5514, abs=1e-4)


def test_ntxent_coincides_on_hand_value():
    q, pos, negs = orthonormal_case()
    loss = loss_ntxent(q, pos, negs, temperature=1.0)
    assert loss.item() == pytest.approx(0.5514, abs=1e-4)


def test_uniform_cosines_give_log_n_plus_one():
    q = torch.tensor([1.0, 0.0], dtype=torch.float64)
    same = torch.tensor([0.0, 1.0], dtype=torch.float64)
    negs = same.repeat(3, 1)
    loss = loss_cross_entropy(q, same, negs, temperature=1.0)
    assert loss.item() == pytest.approx(math.log(4), abs=1e-9)


def test_large_temperature_limit_is_log_n_plus_one():
    q, pos, negs = orthonormal_case()
    loss = loss_ntxent(q, pos, negs, temperature=1e6)
    assert loss.item() == pytest.approx(math.log(3), abs=1e-4)


def test_loss_invariant_under_negative_permutation():
    rng = random.Random(9)
    torch.manual_seed(9)
    q = torch.randn(8, dtype=torch.float64)
    pos = torch.randn(8, dtype=torch.float64)
    negs = torch.randn(5, 8, dtype=torch.float64)
    for loss_fn in (loss_cross_entropy, loss_ntxent):
        base = loss_fn(q, pos, negs, 0.5).item()
        for _ in range(4):
            perm = list(range(5))
            rng.shuffle(perm)
            assert loss_fn(q, pos, negs[perm], 0.5).item() == pytest.approx(base, abs=1e-12)


def test_decreasing_positive_cosine_increases_loss():
    negs = torch.tensor([[0.0, 1.0, 0.0]], dtype=torch.float64)
    q = torch.tensor([1.0, 0.0, 0.0], dtype=torch.float64)
    previous = None
    for angle in (0.0, 0.4, 0.8, 1.2, 1.6):
        pos = torch.tensor([math.cos(angle), 0.0, math.sin(angle)], dtype=torch.float64)
        loss = loss_ntxent(q, pos, negs, temperature=0.5).item()
        if previous is not None:
            assert loss > previous
        previous = loss


def test_requires_at_least_one_negative():
    q, pos, _ = orthonormal_case()
    with pytest.raises(ValueError):
        loss_cross_entropy(q, pos, torch.zeros(0, 4, dtype=torch.float64))


def test_gradient_matches_central_finite_differences():
    torch.manual_seed(3)
    q = torch.randn(8, dtype=torch.float64, requires_grad=True)
    pos = torch.randn(8, dtype=torch.float64, requires_grad=True)
    negs = torch.randn(2, 8, dtype=torch.float64, requires_grad=True)
    loss = loss_cross_entropy(q, pos, negs, temperature=0.7)
    loss.backward()

    eps = 1e-6

    def numeric(tensor, grad):
        worst = 0.0
        flat = tensor.detach().reshape(-1)
        gflat = grad.reshape(-1)
        for i in range(flat.numel()):
            original = flat[i].item()
            flat[i] = original + eps
            up = loss_cross_entropy(q.detach(), pos.detach(), negs.detach(), 0.7).item()
            flat[i] = original - eps
            down = loss_cross_entropy(q.detach(), pos.detach(), negs.detach(), 0.7).item()
            flat[i] = original
            worst = max(worst, abs((up - down) / (2 * eps) - gflat[i].item()))
        return worst

    assert numeric(q, q.grad) < 1e-4
    assert numeric(pos, pos.grad) < 1e-4
    assert numeric(negs, negs.grad) < 1e-4
