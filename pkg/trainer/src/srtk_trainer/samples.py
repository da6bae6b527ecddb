"""Reading training samples from the pipeline's JSONL files."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path


@dataclass(frozen=True)
class TrainSample:
    query: str
    positive: str
    negatives: tuple[str, ...]


def read_train_samples(path: str | Path) -> list[TrainSample]:
    """Parse one sample per non-blank line; aborts naming the offending line."""
    samples = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                samples.append(
                    TrainSample(
                        query=obj["query"],
                        positive=obj["positive"],
                        negatives=tuple(obj.get("negatives", ())),
                    )
                )
            except (ValueError, KeyError, TypeError) as exc:
                raise ValueError(f"{path}: line {lineno}: unreadable sample ({exc})") from exc
    return samples
