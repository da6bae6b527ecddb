"""Beam-search path expansion from linked entities, then fact retrieval.

Starting from the single empty path whose frontier is the linked-entity set,
each step scores every relation connected to a path's frontier (plus the
reserved END choice) against the question concatenated with the labels of the
relations expanded so far. Scores become a softmax distribution; a child path
adds the chosen relation's log-probability to its parent's score, so beams are
comparable across depths. The top paths are kept, expansion stops at the depth
limit or when every surviving path has chosen END, and the subgraph is
materialized by instantiating triples hop by hop along the accepted paths.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

from .kg.base import KnowledgeSource
from .records import END_LABEL, ExpansionPath, Subgraph, build_query
from .scoring import ScoreRequest, Scorer, softmax_log_probs

logger = logging.getLogger(__name__)

# Hub entities can explode a frontier; truncate deterministically.
FRONTIER_CAP = 10_000


@dataclass(frozen=True)
class Beam:
    """Paths under consideration, each with its tracked-entity frontier.

    Entries stay sorted by log_score descending; ties break on the
    lexicographically smaller relation sequence.
    """

    entries: tuple[tuple[ExpansionPath, frozenset[str]], ...]

    def all_terminated(self) -> bool:
        return all(path.terminated for path, _ in self.entries)

    def paths(self) -> list[ExpansionPath]:
        return [path for path, _ in self.entries]


def _sort_entries(entries) -> tuple:
    return tuple(sorted(entries, key=lambda e: (-e[0].log_score, e[0].relations)))


def _cap_frontier(frontier: set[str]) -> frozenset[str]:
    if len(frontier) > FRONTIER_CAP:
        logger.warning("frontier of %d entities truncated to %d (sorted)", len(frontier), FRONTIER_CAP)
        return frozenset(sorted(frontier)[:FRONTIER_CAP])
    return frozenset(frontier)


def score_candidates(scorer: Scorer, query: str, texts: list[str]) -> list[float]:
    """Score a list of candidate texts, deduplicating before the backend call."""
    unique = list(dict.fromkeys(texts))
    scored = scorer.score(ScoreRequest(query=query, candidates=tuple(unique)))
    by_text = dict(zip(unique, scored.scores))
    return [by_text[t] for t in texts]


def expand_step(
    beam: Beam,
    question: str,
    scorer: Scorer,
    source: KnowledgeSource,
    beam_width: int | None,
    temperature: float = 1.0,
) -> Beam:
    """Expand every live path by one hop and keep the top ``beam_width`` entries.

    For each non-terminated entry the candidate set is the frontier's connected
    relations plus END; choosing END terminates the path, a dead-end frontier
    (no relations at all) forces END at log-probability 0. Terminated parents
    compete with the new children for beam slots. ``beam_width=None`` keeps
    everything.
    """
    if not beam.entries:
        raise ValueError("beam must be non-empty")
    if beam_width is not None and beam_width < 1:
        raise ValueError("beam_width must be >= 1")

    live = [(p, f) for p, f in beam.entries if not p.terminated]
    pool: list[tuple[ExpansionPath, frozenset[str]]] = [
        (p, f) for p, f in beam.entries if p.terminated
    ]

    candidate_rels = {}
    label_ids: set[str] = set()
    for path, frontier in live:
        rels = sorted(source.get_connected_relations(frontier)) if frontier else []
        candidate_rels[path.relations] = rels
        label_ids.update(rels)
        label_ids.update(path.relations)
    labels = source.fetch_labels(label_ids) if label_ids else {}

    for path, frontier in live:
        rels = candidate_rels[path.relations]
        if not rels:
            pool.append((ExpansionPath(path.relations, True, path.log_score), frontier))
            continue
        query = build_query(question, [labels[r] for r in path.relations])
        texts = [labels[r] for r in rels] + [END_LABEL]
        scores = score_candidates(scorer, query, texts)
        log_probs = softmax_log_probs(scores, temperature)
        for rel, log_prob in zip(rels, log_probs):
            child_frontier = _cap_frontier(source.get_terminal_entities(frontier, [rel]))
            child = ExpansionPath(path.relations + (rel,), False, path.log_score + log_prob)
            pool.append((child, child_frontier))
        pool.append((ExpansionPath(path.relations, True, path.log_score + log_probs[-1]), frontier))

    entries = _sort_entries(pool)
    if beam_width is not None:
        entries = entries[:beam_width]
    return Beam(entries=entries)


def retrieve_paths(
    question: str,
    entities: set[str] | frozenset[str],
    scorer: Scorer,
    source: KnowledgeSource,
    beam_width: int | None = 2,
    max_depth: int = 2,
    temperature: float = 1.0,
) -> list[ExpansionPath]:
    """Run beam search up to ``max_depth`` hops from the linked entities.

    All linked entities share one beam (one empty path whose frontier is their
    union). Stops early once every beam entry has terminated; returns the
    surviving paths sorted by log_score descending.
    """
    if max_depth < 0:
        raise ValueError("max_depth must be >= 0")
    if not entities:
        return []
    beam = Beam(entries=((ExpansionPath(), _cap_frontier(set(entities))),))
    for _ in range(max_depth):
        if beam.all_terminated():
            break
        beam = expand_step(beam, question, scorer, source, beam_width, temperature)
    return beam.paths()


def materialize_subgraph(
    entities: set[str] | frozenset[str],
    paths: list[ExpansionPath],
    source: KnowledgeSource,
) -> Subgraph:
    """Instantiate the triples along each path, starting from the linked entities.

    A path contributes the union over hops of every (subject, relation, object)
    edge reachable at that hop; paths that match no facts contribute nothing.
    """
    triples: list[tuple[str, str, str]] = []
    seen: set[tuple[str, str, str]] = set()
    for path in paths:
        frontier = frozenset(entities)
        for relation in path.relations:
            edges = sorted(source.get_one_hop_edges(frontier, relation))
            for subject, obj in edges:
                triple = (subject, relation, obj)
                if triple not in seen:
                    seen.add(triple)
                    triples.append(triple)
            frontier = frozenset(obj for _, obj in edges)
            if not frontier:
                break
    return Subgraph(triples=tuple(triples))
