"""Weak-supervision training-data generation.

Likely expansion paths between question and answer entities are found by
shortest-path search (two hops at most), kept when the entities they reach
agree with the answer set, and decomposed into one positive sample per hop
plus a final END sample. Negative relations are sampled from the same frontier
the retriever would face at that step.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .kg.base import KnowledgeSource
from .records import END_LABEL, QuestionRecord, TrainSample, build_query

DEFAULT_THRESHOLD = 0.5


def jaccard(a: Iterable, b: Iterable) -> float:
    """|a ∩ b| / |a ∪ b|, with the empty/empty case defined as 0."""
    a, b = set(a), set(b)
    union = a | b
    if not union:
        return 0.0
    return len(a & b) / len(union)


@dataclass(frozen=True)
class ScoredPath:
    """A candidate expansion path with its answer-agreement score."""

    relations: tuple[str, ...]
    agreement: float


def find_scored_paths(
    record: QuestionRecord,
    source: KnowledgeSource,
    threshold: float = DEFAULT_THRESHOLD,
    metric=jaccard,
) -> list[ScoredPath]:
    """Shortest paths from each question entity to the answers, scored and filtered.

    Each path is scored by the metric between the entities it reaches from its
    source entity and the answer set; paths below the threshold are discarded.
    Deduplicated across source entities (best agreement wins), sorted by
    agreement descending.
    """
    if not record.question_entities or not record.answer_entities:
        raise ValueError("record needs question_entities and answer_entities")
    answers = set(record.answer_entities)
    best: dict[tuple[str, ...], float] = {}
    for source_entity in record.question_entities:
        for path in source.search_shortest_paths(source_entity, answers, max_hop=2):
            terminals = source.get_terminal_entities({source_entity}, path)
            agreement = metric(terminals, answers)
            if agreement < threshold:
                continue
            key = tuple(path)
            if agreement > best.get(key, -1.0):
                best[key] = agreement
    return [
        ScoredPath(relations=rels, agreement=score)
        for rels, score in sorted(best.items(), key=lambda kv: (-kv[1], kv[0]))
    ]


def decompose_path(question: str, path: Sequence[str]) -> list[tuple[str, str]]:
    """Decompose a K-hop path of relation labels into K+1 (query, positive) pairs.

    Pair k pairs the question plus the first k-1 labels with label k; the last
    pair marks the exhausted path with the reserved END label.
    """
    pairs = []
    for k in range(len(path)):
        pairs.append((build_query(question, path[:k]), path[k]))
    pairs.append((build_query(question, path), END_LABEL))
    return pairs


def generate_samples(
    record: QuestionRecord,
    source: KnowledgeSource,
    threshold: float = DEFAULT_THRESHOLD,
    num_negative: int = 2,
    seed: int = 0,
    search_paths: bool = True,
    record_index: int = 0,
    metric=jaccard,
) -> list[TrainSample]:
    """Turn one record into training samples.

    With ``search_paths`` the paths come from weak supervision
    (find_scored_paths); otherwise the record must carry gold ``paths`` (lists
    of relation ids) and no search is performed. Negatives for step k are
    sampled from the relations connected to the frontier after the first k-1
    relations, excluding the positive; END steps sample the same way with no
    exclusion. Sampling is seeded per (record, path, step) so results do not
    depend on scheduling.
    """
    if num_negative < 0:
        raise ValueError("num_negative must be >= 0")
    if not record.question:
        raise ValueError("record needs question text")
    if search_paths:
        rel_paths = [p.relations for p in find_scored_paths(record, source, threshold, metric)]
    else:
        gold = record.extra.get("paths")
        if gold is None:
            raise ValueError("supervised mode needs a gold 'paths' field on the record")
        rel_paths = [tuple(p) for p in gold]

    entities = set(record.question_entities or ())
    samples: list[TrainSample] = []
    for path_index, rel_path in enumerate(rel_paths):
        label_map = source.fetch_labels(set(rel_path)) if rel_path else {}
        label_path = [label_map[r] for r in rel_path]
        for k, (query, positive) in enumerate(decompose_path(record.question or "", label_path)):
            frontier = source.get_terminal_entities(entities, rel_path[:k]) if entities else set()
            exclude = rel_path[k] if k < len(rel_path) else None
            negative_ids = source.sample_negative_relations(
                frontier, exclude, num_negative, seed=f"{seed}:{record_index}:{path_index}:{k}"
            )
            negative_labels = source.fetch_labels(negative_ids) if negative_ids else {}
            negatives = []
            for neg in negative_ids:
                label = negative_labels[neg]
                if label != positive and label not in negatives:
                    negatives.append(label)
            samples.append(TrainSample(query=query, positive=positive, negatives=tuple(negatives)))
    return samples
