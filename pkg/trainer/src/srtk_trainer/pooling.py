"""Sentence-level pooling over encoder hidden states."""

from __future__ import annotations

import torch
import torch.nn.functional as F

POOLING_CLS = "cls"
POOLING_MEAN = "mean"


def select_pooling(tokenizer, override: str | None = None) -> str:
    """CLS pooling for models that expose a classifier token, masked mean otherwise."""
    if override is not None:
        if override not in (POOLING_CLS, POOLING_MEAN):
            raise ValueError(f"unknown pooling {override!r}")
        return override
    return POOLING_CLS if getattr(tokenizer, "cls_token", None) else POOLING_MEAN


def pool_hidden_states(
    hidden_states: torch.Tensor, attention_mask: torch.Tensor, strategy: str
) -> torch.Tensor:
    """Reduce (batch, tokens, dim) final-layer states to unit sentence vectors.

    ``cls`` takes the first token; ``mean`` averages over non-padding tokens
    only, so padding never changes the result.
    """
    if strategy == POOLING_CLS:
        pooled = hidden_states[:, 0]
    elif strategy == POOLING_MEAN:
        mask = attention_mask.unsqueeze(-1).to(hidden_states.dtype)
        summed = (hidden_states * mask).sum(dim=1)
        counts = mask.sum(dim=1).clamp(min=1)
        pooled = summed / counts
    else:
        raise ValueError(f"unknown pooling {strategy!r}")
    return F.normalize(pooled, p=2, dim=-1)


def encoder_module(model):
    """The encoder side of the model; encoder-decoder models contribute only
    their encoder."""
    if getattr(model.config, "is_encoder_decoder", False):
        return model.get_encoder()
    return model
