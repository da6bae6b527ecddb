"""Ranking losses over (query, positive, negatives) cosine similarities.

Both losses softmax the cosine of the query against the positive and the
sample's own negatives; negatives from other samples are never mixed in.
"""

from __future__ import annotations

import torch
import torch.nn.functional as F

CE_DEFAULT_TEMPERATURE = 1.0
NTXENT_DEFAULT_TEMPERATURE = 0.07


def _logits(q_vec: torch.Tensor, pos_vec: torch.Tensor, neg_vecs: torch.Tensor,
            temperature: float) -> torch.Tensor:
    if temperature <= 0:
        raise ValueError("temperature must be positive")
    if neg_vecs.ndim != 2 or neg_vecs.shape[0] < 1:
        raise ValueError("need at least one negative vector")
    pos_cos = F.cosine_similarity(q_vec.unsqueeze(0), pos_vec.unsqueeze(0)).squeeze(0)
    neg_cos = F.cosine_similarity(q_vec.unsqueeze(0), neg_vecs)
    return torch.cat([pos_cos.reshape(1), neg_cos]) / temperature


def loss_cross_entropy(
    q_vec: torch.Tensor,
    pos_vec: torch.Tensor,
    neg_vecs: torch.Tensor,
    temperature: float = CE_DEFAULT_TEMPERATURE,
) -> torch.Tensor:
    """Softmax cross-entropy with the positive as the correct class."""
    logits = _logits(q_vec, pos_vec, neg_vecs, temperature)
    return F.cross_entropy(logits.unsqueeze(0), torch.zeros(1, dtype=torch.long,
                                                            device=logits.device))


def loss_ntxent(
    q_vec: torch.Tensor,
    pos_vec: torch.Tensor,
    neg_vecs: torch.Tensor,
    temperature: float = NTXENT_DEFAULT_TEMPERATURE,
) -> torch.Tensor:
    """Normalized temperature-scaled cross entropy: the query and positive form
    the positive pair, the query and each negative the negative pairs."""
    logits = _logits(q_vec, pos_vec, neg_vecs, temperature)
    return -F.log_softmax(logits, dim=0)[0]


LOSSES = {"cross_entropy": loss_cross_entropy, "ntxent": loss_ntxent}
DEFAULT_TEMPERATURES = {
    "cross_entropy": CE_DEFAULT_TEMPERATURE,
    "ntxent": NTXENT_DEFAULT_TEMPERATURE,
}
