"""Uniform knowledge-source interface shared by the SPARQL and in-memory backends.

Backends supply raw graph lookups; this base class layers the behavior that
must be observationally identical across backends: blocklist filtering,
deterministic result capping, seeded negative sampling, and the
1-hop-then-2-hop shortest path policy.
"""

from __future__ import annotations

import logging
import random
from abc import ABC, abstractmethod
from typing import Iterable, Sequence

from ..profiles import KnowledgeGraphProfile

logger = logging.getLogger(__name__)

# Deterministic cap on bindings returned by any single query; sorted
# truncation keeps the result reproducible when a hub entity blows up.
RESULT_CAP = 2000
MAX_HOP = 3


class KnowledgeSource(ABC):
    """Graph queries every pipeline stage needs, over short-form identifiers."""

    def __init__(self, profile: KnowledgeGraphProfile, result_cap: int = RESULT_CAP):
        self.profile = profile
        self.result_cap = result_cap

    # -- backend primitives ------------------------------------------------

    @abstractmethod
    def _connected_relations(self, entities: frozenset[str]) -> set[str]:
        """Distinct outgoing predicates of ``entities`` whose objects are entities."""

    @abstractmethod
    def _terminal_entities(self, entities: frozenset[str], path: Sequence[str]) -> set[str]:
        """Entities reached from ``entities`` by following ``path`` exactly."""

    @abstractmethod
    def _path_probe(self, source: str, answers: frozenset[str], hop: int) -> set[tuple[str, ...]]:
        """All relation paths of exactly ``hop`` hops from ``source`` to any answer."""

    @abstractmethod
    def _one_hop_edges(self, entities: frozenset[str], relation: str) -> set[tuple[str, str]]:
        """(subject, object) pairs for ``relation`` outgoing from ``entities``."""

    @abstractmethod
    def _labels(self, ids: frozenset[str]) -> dict[str, str]:
        """Labels for the ids that have one; missing ids are simply absent."""

    # -- shared operations ---------------------------------------------------

    def _cap(self, results: Iterable, what: str) -> list:
        out = sorted(results)
        if len(out) > self.result_cap:
            logger.warning(
                "%s returned %d results; truncating to %d (sorted)", what, len(out), self.result_cap
            )
            out = out[: self.result_cap]
        return out

    def get_connected_relations(self, entities: Iterable[str]) -> set[str]:
        """Distinct outgoing relations of the tracked entities, blocklist applied."""
        entities = frozenset(entities)
        if not entities:
            raise ValueError("entities must be non-empty")
        raw = self._cap(self._connected_relations(entities), "relation query")
        return {r for r in raw if not self.profile.is_blocked(r)}

    def get_terminal_entities(self, sources: Iterable[str], path: Sequence[str]) -> set[str]:
        """Entities reachable by following exactly the given relation sequence."""
        sources = frozenset(sources)
        if len(path) > MAX_HOP:
            raise ValueError(f"path length {len(path)} exceeds the supported maximum of {MAX_HOP}")
        if not path:
            return set(sources)
        if not sources:
            return set()
        return set(self._cap(self._terminal_entities(sources, list(path)), "terminal query"))

    def search_shortest_paths(
        self, source: str, answers: Iterable[str], max_hop: int = 2
    ) -> list[list[str]]:
        """All 1-hop relation paths from source to any answer, else all 2-hop paths.

        Returned deduplicated and sorted; empty when neither hop connects.
        """
        answers = frozenset(answers)
        if not answers:
            raise ValueError("answers must be non-empty")
        if max_hop not in (1, 2):
            raise ValueError("max_hop must be 1 or 2")
        for hop in range(1, max_hop + 1):
            paths = self._cap(self._path_probe(source, answers, hop), f"{hop}-hop path probe")
            paths = [p for p in paths if not any(self.profile.is_blocked(r) for r in p)]
            if paths:
                return [list(p) for p in paths]
        return []

    def sample_negative_relations(
        self,
        frontier: Iterable[str],
        exclude: str | None,
        n: int,
        seed: int | str = 0,
    ) -> list[str]:
        """Up to ``n`` distinct relations outgoing from the frontier, never ``exclude``.

        Deterministic for a given seed; when fewer than ``n`` candidates exist,
        all are returned (sorted).
        """
        if n < 0:
            raise ValueError("n must be >= 0")
        frontier = frozenset(frontier)
        if not frontier or n == 0:
            return []
        candidates = sorted(self.get_connected_relations(frontier) - {exclude})
        if len(candidates) <= n:
            return candidates
        return random.Random(seed).sample(candidates, n)

    def fetch_labels(self, ids: Iterable[str]) -> dict[str, str]:
        """Label every requested id, falling back to the bare identifier."""
        ids = frozenset(ids)
        if not ids:
            return {}
        found = self._labels(ids)
        out = {}
        for i in ids:
            if i in found:
                out[i] = found[i]
            else:
                short = self.profile.shorten_entity(i)
                out[i] = self.profile.shorten_relation(short)
        return out

    def get_one_hop_edges(self, entities: Iterable[str], relation: str) -> set[tuple[str, str]]:
        """(subject, object) pairs instantiating one relation hop; used to
        materialize subgraph triples along accepted paths."""
        entities = frozenset(entities)
        if not entities:
            return set()
        return set(self._cap(self._one_hop_edges(entities, relation), "edge query"))
