"""Pluggable scoring of candidate relations against a query.

Two backends share one interface: an HTTP client for a sentence-embedding
endpoint (cosine similarity of unit vectors) and a deterministic lexical
scorer (token-set Jaccard) for tests and offline runs. Similarities are turned
into a probability distribution with a temperature softmax downstream.
"""

from __future__ import annotations

import math
import re
import threading
from dataclasses import dataclass
from typing import Protocol, Sequence

import requests

from .errors import ProtocolError, TransportError

DEFAULT_BATCH_SIZE = 128
_TOKEN_RE = re.compile(r"[^0-9a-z]+")


@dataclass(frozen=True)
class ScoreRequest:
    query: str
    candidates: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "candidates", tuple(self.candidates))
        if not self.candidates:
            raise ValueError("candidates must be non-empty")
        if len(set(self.candidates)) != len(self.candidates):
            raise ValueError("candidates must not contain duplicates")


@dataclass(frozen=True)
class ScoredCandidates:
    scores: tuple[float, ...]
    provenance: str  # "embedding" or "lexical"

    def __post_init__(self):
        object.__setattr__(self, "scores", tuple(float(s) for s in self.scores))
        if any(not math.isfinite(s) for s in self.scores):
            raise ValueError("scores must be finite")


class Scorer(Protocol):
    def score(self, request: ScoreRequest) -> ScoredCandidates: ...


def tokenize(text: str) -> frozenset[str]:
    return frozenset(t for t in _TOKEN_RE.split(text.lower()) if t)


class LexicalScorer:
    """Pure token-overlap scorer: Jaccard of lowercased alphanumeric token sets."""

    provenance = "lexical"

    def score(self, request: ScoreRequest) -> ScoredCandidates:
        query_tokens = tokenize(request.query)
        scores = []
        for candidate in request.candidates:
            cand_tokens = tokenize(candidate)
            union = query_tokens | cand_tokens
            scores.append(len(query_tokens & cand_tokens) / len(union) if union else 0.0)
        return ScoredCandidates(scores=tuple(scores), provenance=self.provenance)


class EmbeddingScorer:
    """Client for an embedding endpoint speaking POST /embed.

    Request: ``{"texts": [...]}``; response: ``{"vectors": [[...], ...], "dim": d}``.
    Embeddings are cached per text (thread-safe) and requests are split at
    ``batch_size``. Returned vectors are re-normalized to unit length so cosine
    reduces to a dot product.
    """

    provenance = "embedding"

    def __init__(
        self,
        endpoint: str,
        batch_size: int = DEFAULT_BATCH_SIZE,
        timeout: float = 60.0,
        session: requests.Session | None = None,
    ):
        if batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        self.endpoint = endpoint.rstrip("/")
        self.batch_size = batch_size
        self.timeout = timeout
        self._session = session or requests.Session()
        self._cache: dict[str, tuple[float, ...]] = {}
        self._lock = threading.Lock()

    def _post_batch(self, texts: list[str]) -> list[tuple[float, ...]]:
        try:
            response = self._session.post(
                f"{self.endpoint}/embed", json={"texts": texts}, timeout=self.timeout
            )
        except requests.RequestException as exc:
            raise TransportError(f"embedding endpoint unreachable: {exc}") from exc
        if response.status_code != 200:
            raise TransportError(f"embedding endpoint answered {response.status_code}")
        try:
            payload = response.json()
            vectors = payload["vectors"]
            dim = int(payload["dim"])
        except (ValueError, KeyError, TypeError) as exc:
            raise ProtocolError(f"malformed embedding response: {exc}") from exc
        if len(vectors) != len(texts):
            raise ProtocolError(f"expected {len(texts)} vectors, got {len(vectors)}")
        out = []
        for vec in vectors:
            if len(vec) != dim:
                raise ProtocolError(f"vector dimension {len(vec)} != declared {dim}")
            norm = math.sqrt(sum(x * x for x in vec))
            if norm == 0:
                raise ProtocolError("embedding endpoint returned a zero vector")
            out.append(tuple(x / norm for x in vec))
        return out

    def embed(self, texts: Sequence[str]) -> list[tuple[float, ...]]:
        """One unit vector per text, in order; cached texts cost no request."""
        if not texts:
            raise ValueError("texts must be non-empty")
        with self._lock:
            missing = [t for t in dict.fromkeys(texts) if t not in self._cache]
        for start in range(0, len(missing), self.batch_size):
            batch = missing[start : start + self.batch_size]
            vectors = self._post_batch(batch)
            with self._lock:
                self._cache.update(zip(batch, vectors))
        with self._lock:
            return [self._cache[t] for t in texts]

    def score(self, request: ScoreRequest) -> ScoredCandidates:
        vectors = self.embed([request.query, *request.candidates])
        query_vec = vectors[0]
        scores = tuple(sum(q * c for q, c in zip(query_vec, vec)) for vec in vectors[1:])
        return ScoredCandidates(scores=scores, provenance=self.provenance)


def softmax_log_probs(scores: Sequence[float], temperature: float = 1.0) -> list[float]:
    """Log-probabilities of a temperature softmax over raw scores.

    Monotone in the scores; exp of the outputs sums to 1.
    """
    if temperature <= 0:
        raise ValueError("temperature must be positive")
    scaled = [s / temperature for s in scores]
    peak = max(scaled)
    lse = peak + math.log(sum(math.exp(s - peak) for s in scaled))
    return [s - lse for s in scaled]


def resolve_scorer(spec: str) -> Scorer:
    """Map a --scorer value to a backend: ``lexical`` or an embedding endpoint URL."""
    from .errors import ConfigurationError

    if spec == "lexical":
        return LexicalScorer()
    if spec.startswith(("http://", "https://")):
        return EmbeddingScorer(spec)
    raise ConfigurationError(
        f"scorer {spec!r} is neither 'lexical' nor an embedding endpoint URL; "
        "model checkpoints must be served (see the trainer's serve mode) and "
        "passed as http://host:port"
    )
