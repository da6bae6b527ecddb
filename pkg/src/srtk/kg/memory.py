"""In-memory triple store: the desk-scale backend for tests and offline runs."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import IO, Iterable, Sequence

from ..errors import RecordFormatError
from ..profiles import KnowledgeGraphProfile, builtin_profile
from .base import KnowledgeSource


@dataclass(frozen=True)
class TripleStoreFixture:
    """A small graph given extensionally: ID triples plus an ID -> label map."""

    triples: frozenset[tuple[str, str, str]]
    labels: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "triples", frozenset(tuple(t) for t in self.triples))
        mentioned: set[str] = set()
        for s, p, o in self.triples:
            mentioned.update((s, p, o))
        for labeled in self.labels:
            if labeled not in mentioned:
                raise ValueError(f"labeled id {labeled!r} appears in no triple")


def load_fixture(stream: IO | Iterable[str]) -> TripleStoreFixture:
    """Parse the fixture file format: ``subject predicate object [label-of-subject]``
    per line, whitespace-separated, ``#`` comments; label columns are joined
    with single spaces and attach to the subject."""
    triples: set[tuple[str, str, str]] = set()
    labels: dict[str, str] = {}
    for lineno, raw in enumerate(stream, start=1):
        line = raw.decode("utf-8") if isinstance(raw, bytes) else raw
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) < 3:
            raise RecordFormatError(f"fixture line {lineno}: expected at least 3 columns")
        s, p, o = parts[:3]
        triples.add((s, p, o))
        if len(parts) > 3:
            labels[s] = " ".join(parts[3:])
    return TripleStoreFixture(triples=frozenset(triples), labels=labels)


class InMemoryKnowledgeSource(KnowledgeSource):
    """KnowledgeSource over a TripleStoreFixture; identifiers are used as-is."""

    def __init__(self, fixture: TripleStoreFixture, profile: KnowledgeGraphProfile | None = None,
                 **kwargs):
        super().__init__(profile or builtin_profile("custom"), **kwargs)
        self.fixture = fixture
        self._by_subject: dict[str, list[tuple[str, str]]] = {}
        for s, p, o in fixture.triples:
            self._by_subject.setdefault(s, []).append((p, o))

    def _connected_relations(self, entities: frozenset[str]) -> set[str]:
        out = set()
        for e in entities:
            for p, _ in self._by_subject.get(e, ()):
                out.add(p)
        return out

    def _terminal_entities(self, entities: frozenset[str], path: Sequence[str]) -> set[str]:
        frontier = set(entities)
        for rel in path:
            frontier = {o for e in frontier for p, o in self._by_subject.get(e, ()) if p == rel}
            if not frontier:
                break
        return frontier

    def _path_probe(self, source: str, answers: frozenset[str], hop: int) -> set[tuple[str, ...]]:
        paths: set[tuple[str, ...]] = set()
        if hop == 1:
            for p, o in self._by_subject.get(source, ()):
                if o in answers:
                    paths.add((p,))
        else:
            for p1, mid in self._by_subject.get(source, ()):
                for p2, o in self._by_subject.get(mid, ()):
                    if o in answers:
                        paths.add((p1, p2))
        return paths

    def _one_hop_edges(self, entities: frozenset[str], relation: str) -> set[tuple[str, str]]:
        return {(e, o) for e in entities for p, o in self._by_subject.get(e, ()) if p == relation}

    def _labels(self, ids: frozenset[str]) -> dict[str, str]:
        return {i: self.fixture.labels[i] for i in ids if i in self.fixture.labels}
