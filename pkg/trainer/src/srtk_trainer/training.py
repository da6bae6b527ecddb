"""Fine-tuning a pretrained encoder into a relation-path scorer.

Each training sample contributes one ranking loss over the cosine of its query
embedding against its positive and negative relation labels. The fine-tuned
encoder, its tokenizer, and the pooling choice are persisted as a standard
encoder directory that the serving side (and any encoder-compatible tooling)
can load.
"""

from __future__ import annotations

import json
import logging
import random
from dataclasses import dataclass, field
from pathlib import Path

import torch
from transformers import AutoModel, AutoTokenizer

from .losses import DEFAULT_TEMPERATURES, LOSSES
from .pooling import encoder_module, pool_hidden_states, select_pooling
from .samples import TrainSample, read_train_samples

logger = logging.getLogger(__name__)

SCORER_CONFIG_NAME = "scorer_config.json"
TRAIN_LOG_NAME = "train_log.json"
MAX_TOKENS = 128


@dataclass
class TrainerConfig:
    model_name_or_path: str
    output_dir: str
    loss: str = "cross_entropy"
    temperature: float | None = None  # None: per-loss default
    pooling: str | None = None  # None: auto-select from the tokenizer
    epochs: int = 10
    batch_size: int = 16
    lr: float = 1e-4
    seed: int = 42
    device: str = "cpu"
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.loss not in LOSSES:
            raise ValueError(f"loss must be one of {sorted(LOSSES)}")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.temperature is not None and self.temperature <= 0:
            raise ValueError("temperature must be positive")

    @property
    def resolved_temperature(self) -> float:
        return self.temperature if self.temperature is not None else DEFAULT_TEMPERATURES[self.loss]


def encode(model, tokenizer, texts: list[str], pooling: str, device: str) -> torch.Tensor:
    """Embed a batch of texts into unit vectors with the configured pooling."""
    batch = tokenizer(
        texts, return_tensors="pt", padding=True, truncation=True, max_length=MAX_TOKENS
    ).to(device)
    hidden = encoder_module(model)(**batch).last_hidden_state
    return pool_hidden_states(hidden, batch["attention_mask"], pooling)


def _sample_loss(vectors: torch.Tensor, n_negatives: int, loss_fn, temperature: float):
    query, positive = vectors[0], vectors[1]
    negatives = vectors[2 : 2 + n_negatives]
    return loss_fn(query, positive, negatives, temperature)


def train(config: TrainerConfig, train_path: str | Path) -> Path:
    """Fine-tune and persist the scorer; returns the output directory.

    Samples without negatives carry no ranking signal and are skipped with a
    warning. Per-epoch mean losses are logged and saved next to the model.
    """
    samples = read_train_samples(train_path)
    usable: list[TrainSample] = []
    for i, sample in enumerate(samples):
        if sample.negatives:
            usable.append(sample)
        else:
            logger.warning("sample %d has no negatives; skipping", i)
    if not usable:
        raise ValueError("no usable training samples (all lack negatives)")

    torch.manual_seed(config.seed)
    rng = random.Random(config.seed)
    tokenizer = AutoTokenizer.from_pretrained(config.model_name_or_path)
    model = AutoModel.from_pretrained(config.model_name_or_path).to(config.device)
    pooling = select_pooling(tokenizer, config.pooling)
    loss_fn = LOSSES[config.loss]
    temperature = config.resolved_temperature
    optimizer = torch.optim.AdamW(model.parameters(), lr=config.lr)

    model.train()
    epoch_losses: list[float] = []
    order = list(range(len(usable)))
    for epoch in range(config.epochs):
        rng.shuffle(order)
        total = 0.0
        for start in range(0, len(order), config.batch_size):
            batch = [usable[i] for i in order[start : start + config.batch_size]]
            texts: list[str] = []
            spans: list[tuple[int, int]] = []  # (offset, n_negatives)
            for sample in batch:
                spans.append((len(texts), len(sample.negatives)))
                texts.extend([sample.query, sample.positive, *sample.negatives])
            vectors = encode(model, tokenizer, texts, pooling, config.device)
            losses = [
                _sample_loss(vectors[offset:], n_neg, loss_fn, temperature)
                for offset, n_neg in spans
            ]
            loss = torch.stack(losses).mean()
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
            total += loss.item() * len(batch)
        mean_loss = total / len(usable)
        epoch_losses.append(mean_loss)
        logger.info("epoch %d/%d: mean loss %.4f", epoch + 1, config.epochs, mean_loss)

    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    model.eval()
    model.save_pretrained(out)
    tokenizer.save_pretrained(out)
    with open(out / SCORER_CONFIG_NAME, "w", encoding="utf-8") as fh:
        json.dump(
            {
                "pooling": pooling,
                "loss": config.loss,
                "temperature": temperature,
                "base_model": str(config.model_name_or_path),
            },
            fh,
            indent=2,
        )
    with open(out / TRAIN_LOG_NAME, "w", encoding="utf-8") as fh:
        json.dump({"epoch_losses": epoch_losses, "samples": len(usable)}, fh, indent=2)
    return out
