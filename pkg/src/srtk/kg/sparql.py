"""SPARQL 1.1 Protocol client backend.

Queries are built from fixed templates (no property paths, portable across
endpoints) and results parsed from the standard SPARQL JSON results format.
The client retries transient failures with exponential backoff, throttles via
the profile's minimum request interval, and bounds concurrent requests.

Usage:
    profile = resolve_profile("wikidata")
    source = SparqlKnowledgeSource(profile)
    source.get_connected_relations({"Q1330839"})
"""

from __future__ import annotations

import logging
import threading
import time
from typing import Sequence

import requests

from ..errors import ProtocolError, TransportError
from ..profiles import KnowledgeGraphProfile
from .base import KnowledgeSource

logger = logging.getLogger(__name__)

_ACCEPT = "application/sparql-results+json"
_RETRY_STATUS = {429, 500, 502, 503, 504}
_BACKOFF_START_S = 0.5
DEFAULT_MAX_INFLIGHT = 4


def _values(var: str, iris: Sequence[str]) -> str:
    joined = " ".join(f"<{i}>" for i in sorted(iris))
    return f"VALUES ?{var} {{ {joined} }}"


def relations_query(entity_iris: Sequence[str], limit: int) -> str:
    return (
        f"SELECT DISTINCT ?r WHERE {{ {_values('e', entity_iris)} "
        f"?e ?r ?x . FILTER(isIRI(?x)) }} LIMIT {limit}"
    )


def terminals_query(entity_iris: Sequence[str], relation_iris: Sequence[str], limit: int) -> str:
    chain = []
    subject = "?e"
    for i, rel in enumerate(relation_iris):
        obj = "?t" if i == len(relation_iris) - 1 else f"?m{i + 1}"
        chain.append(f"{subject} <{rel}> {obj} .")
        subject = obj
    body = " ".join(chain)
    return (
        f"SELECT DISTINCT ?t WHERE {{ {_values('e', entity_iris)} "
        f"{body} FILTER(isIRI(?t)) }} LIMIT {limit}"
    )


def path_probe_query(source_iri: str, answer_iris: Sequence[str], hop: int, limit: int) -> str:
    if hop == 1:
        return (
            f"SELECT DISTINCT ?r1 WHERE {{ {_values('s', [source_iri])} "
            f"{_values('t', answer_iris)} ?s ?r1 ?t . }} LIMIT {limit}"
        )
    return (
        f"SELECT DISTINCT ?r1 ?r2 WHERE {{ {_values('s', [source_iri])} "
        f"{_values('t', answer_iris)} ?s ?r1 ?m . ?m ?r2 ?t . }} LIMIT {limit}"
    )


def edges_query(entity_iris: Sequence[str], relation_iri: str, limit: int) -> str:
    return (
        f"SELECT DISTINCT ?e ?o WHERE {{ {_values('e', entity_iris)} "
        f"?e <{relation_iri}> ?o . FILTER(isIRI(?o)) }} LIMIT {limit}"
    )


def labels_query(iris: Sequence[str], label_predicate: str, limit: int) -> str:
    return (
        f"SELECT ?e ?l WHERE {{ {_values('e', iris)} ?e <{label_predicate}> ?l . "
        f'FILTER(LANG(?l) = "" || LANGMATCHES(LANG(?l), "en")) }} LIMIT {limit}'
    )


class SparqlKnowledgeSource(KnowledgeSource):
    """KnowledgeSource backed by a SPARQL query endpoint.

    Safe to share across worker threads: at most ``max_inflight`` requests run
    concurrently and throttling state is lock-protected.
    """

    def __init__(
        self,
        profile: KnowledgeGraphProfile,
        max_inflight: int = DEFAULT_MAX_INFLIGHT,
        backoff_start_s: float = _BACKOFF_START_S,
        session: requests.Session | None = None,
        **kwargs,
    ):
        super().__init__(profile, **kwargs)
        self._session = session or requests.Session()
        self._inflight = threading.BoundedSemaphore(max_inflight)
        self._throttle_lock = threading.Lock()
        self._last_request = 0.0
        self._backoff_start_s = backoff_start_s

    # -- wire ---------------------------------------------------------------

    def _throttle(self):
        interval_s = self.profile.min_request_interval / 1000.0
        if interval_s <= 0:
            return
        with self._throttle_lock:
            wait = self._last_request + interval_s - time.monotonic()
            if wait > 0:
                time.sleep(wait)
            self._last_request = time.monotonic()

    def _select(self, query: str) -> list[dict]:
        """Run a SELECT query, returning the result bindings."""
        last_error: Exception | None = None
        for attempt in range(self.profile.max_retries + 1):
            if attempt:
                time.sleep(self._backoff_start_s * 2 ** (attempt - 1))
            self._throttle()
            try:
                with self._inflight:
                    response = self._session.post(
                        self.profile.sparql_endpoint,
                        data={"query": query},
                        headers={"Accept": _ACCEPT},
                        timeout=self.profile.request_timeout,
                    )
            except requests.RequestException as exc:
                last_error = exc
                logger.warning("SPARQL request failed (attempt %d): %s", attempt + 1, exc)
                continue
            if response.status_code in _RETRY_STATUS:
                last_error = TransportError(f"endpoint answered {response.status_code}")
                logger.warning("SPARQL endpoint answered %d (attempt %d)", response.status_code, attempt + 1)
                continue
            if response.status_code != 200:
                raise ProtocolError(
                    f"endpoint rejected query with {response.status_code}: {response.text[:200]}"
                )
            try:
                payload = response.json()
                return payload["results"]["bindings"]
            except (ValueError, KeyError, TypeError) as exc:
                raise ProtocolError(f"malformed SPARQL JSON results: {exc}") from exc
        raise TransportError(
            f"endpoint {self.profile.sparql_endpoint} unreachable after "
            f"{self.profile.max_retries + 1} attempts: {last_error}"
        )

    @staticmethod
    def _value(binding: dict, var: str) -> str:
        try:
            return binding[var]["value"]
        except (KeyError, TypeError) as exc:
            raise ProtocolError(f"binding missing variable {var!r}") from exc

    # -- backend primitives ---------------------------------------------------

    def _connected_relations(self, entities: frozenset[str]) -> set[str]:
        iris = [self.profile.expand_entity(e) for e in entities]
        bindings = self._select(relations_query(iris, self.result_cap + 1))
        return {self.profile.shorten_relation(self._value(b, "r")) for b in bindings}

    def _terminal_entities(self, entities: frozenset[str], path: Sequence[str]) -> set[str]:
        iris = [self.profile.expand_entity(e) for e in entities]
        rels = [self.profile.expand_relation(r) for r in path]
        bindings = self._select(terminals_query(iris, rels, self.result_cap + 1))
        return {self.profile.shorten_entity(self._value(b, "t")) for b in bindings}

    def _path_probe(self, source: str, answers: frozenset[str], hop: int) -> set[tuple[str, ...]]:
        src = self.profile.expand_entity(source)
        ans = [self.profile.expand_entity(a) for a in answers]
        bindings = self._select(path_probe_query(src, ans, hop, self.result_cap + 1))
        out = set()
        for b in bindings:
            rels = [self._value(b, f"r{i + 1}") for i in range(hop)]
            out.add(tuple(self.profile.shorten_relation(r) for r in rels))
        return out

    def _one_hop_edges(self, entities: frozenset[str], relation: str) -> set[tuple[str, str]]:
        iris = [self.profile.expand_entity(e) for e in entities]
        rel = self.profile.expand_relation(relation)
        bindings = self._select(edges_query(iris, rel, self.result_cap + 1))
        return {
            (
                self.profile.shorten_entity(self._value(b, "e")),
                self.profile.shorten_entity(self._value(b, "o")),
            )
            for b in bindings
        }

    def _labels(self, ids: frozenset[str]) -> dict[str, str]:
        # Mixed entity/relation ids: probe both namespaces, since e.g. Wikidata
        # keeps property labels in the entity namespace.
        iris: dict[str, str] = {}
        for i in ids:
            iris[self.profile.expand_entity(i)] = i
            iris[self.profile.expand_relation(i)] = i
        bindings = self._select(
            labels_query(list(iris), self.profile.label_predicate, self.result_cap + 1)
        )
        out: dict[str, str] = {}
        for b in sorted(bindings, key=lambda b: (self._value(b, "e"), self._value(b, "l"))):
            iri = self._value(b, "e")
            short = iris.get(iri, self.profile.shorten_entity(iri))
            out.setdefault(short, self._value(b, "l"))
        return out
