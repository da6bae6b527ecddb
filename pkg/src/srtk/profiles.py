"""Per-knowledge-graph configuration: endpoints, identifier prefixes, blocklists.

Built-in profiles cover Wikidata, Freebase, and DBpedia with unified access
patterns; a JSON file can override any field or describe a custom graph.
"""

from __future__ import annotations

import json
import os
import re
from dataclasses import dataclass, replace

from .errors import ConfigurationError

BUILTIN_NAMES = ("wikidata", "freebase", "dbpedia", "custom")


@dataclass(frozen=True)
class KnowledgeGraphProfile:
    name: str
    sparql_endpoint: str
    entity_prefix: str
    relation_prefix: str
    label_predicate: str
    relation_blocklist: tuple[str, ...] = ()
    request_timeout: float = 30.0
    max_retries: int = 2
    min_request_interval: float = 0.0  # milliseconds between requests

    def __post_init__(self):
        if self.name not in BUILTIN_NAMES:
            raise ConfigurationError(f"unknown knowledge graph name {self.name!r}")
        for prefix in (self.entity_prefix, self.relation_prefix):
            if not prefix.endswith(("/", "#")):
                raise ConfigurationError(f"prefix {prefix!r} must end with '/' or '#'")
        if self.request_timeout <= 0:
            raise ConfigurationError("request_timeout must be positive")
        if self.max_retries < 0:
            raise ConfigurationError("max_retries must be >= 0")
        for pattern in self.relation_blocklist:
            try:
                re.compile(pattern)
            except re.error as exc:
                raise ConfigurationError(f"bad blocklist pattern {pattern!r}: {exc}") from exc

    def shorten(self, iri: str, prefix: str) -> str:
        return iri[len(prefix):] if iri.startswith(prefix) else iri

    def shorten_entity(self, iri: str) -> str:
        return self.shorten(iri, self.entity_prefix)

    def shorten_relation(self, iri: str) -> str:
        return self.shorten(iri, self.relation_prefix)

    def expand(self, identifier: str, prefix: str) -> str:
        if identifier.startswith(("http://", "https://")):
            return identifier
        return prefix + identifier

    def expand_entity(self, identifier: str) -> str:
        return self.expand(identifier, self.entity_prefix)

    def expand_relation(self, identifier: str) -> str:
        return self.expand(identifier, self.relation_prefix)

    def is_blocked(self, relation: str) -> bool:
        return any(re.search(p, relation) for p in self.relation_blocklist)


# Wikidata: after stripping the prop/direct/ prefix, anything still shaped
# like an IRI lies outside that namespace and is metadata noise.
_BUILTINS = {
    "wikidata": KnowledgeGraphProfile(
        name="wikidata",
        sparql_endpoint="https://query.wikidata.org/sparql",
        entity_prefix="http://www.wikidata.org/entity/",
        relation_prefix="http://www.wikidata.org/prop/direct/",
        label_predicate="http://www.w3.org/2000/01/rdf-schema#label",
        relation_blocklist=(r"^https?://",),
    ),
    "freebase": KnowledgeGraphProfile(
        name="freebase",
        sparql_endpoint="http://localhost:8890/sparql",
        entity_prefix="http://rdf.freebase.com/ns/",
        relation_prefix="http://rdf.freebase.com/ns/",
        label_predicate="http://www.w3.org/2000/01/rdf-schema#label",
    ),
    "dbpedia": KnowledgeGraphProfile(
        name="dbpedia",
        sparql_endpoint="https://dbpedia.org/sparql",
        entity_prefix="http://dbpedia.org/resource/",
        relation_prefix="http://dbpedia.org/ontology/",
        label_predicate="http://www.w3.org/2000/01/rdf-schema#label",
        relation_blocklist=(r"^wikiPageWikiLink$", r"^https?://www\.w3\.org/"),
    ),
    "custom": KnowledgeGraphProfile(
        name="custom",
        sparql_endpoint="",
        entity_prefix="http://example.org/entity/",
        relation_prefix="http://example.org/relation/",
        label_predicate="http://www.w3.org/2000/01/rdf-schema#label",
    ),
}

_PROFILE_FIELDS = (
    "name",
    "sparql_endpoint",
    "entity_prefix",
    "relation_prefix",
    "label_predicate",
    "relation_blocklist",
    "request_timeout",
    "max_retries",
    "min_request_interval",
)


def builtin_profile(name: str) -> KnowledgeGraphProfile:
    try:
        return _BUILTINS[name]
    except KeyError:
        raise ConfigurationError(f"unknown knowledge graph {name!r}") from None


def resolve_profile(name_or_path: str, sparql_endpoint: str | None = None) -> KnowledgeGraphProfile:
    """Resolve a built-in name or a JSON profile file into a full profile.

    A file profile overrides the built-in it names field-wise (``name``
    defaults to ``custom``). ``sparql_endpoint`` applies last, and a profile
    that still has no endpoint is a configuration error.
    """
    if name_or_path in _BUILTINS:
        profile = _BUILTINS[name_or_path]
    elif os.path.exists(name_or_path):
        try:
            with open(name_or_path, encoding="utf-8") as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigurationError(f"cannot read profile {name_or_path!r}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigurationError(f"profile {name_or_path!r} must be a JSON object")
        base = builtin_profile(data.get("name", "custom"))
        overrides = {}
        for key, value in data.items():
            if key not in _PROFILE_FIELDS:
                raise ConfigurationError(f"profile {name_or_path!r}: unknown field {key!r}")
            if key == "relation_blocklist":
                value = tuple(value)
            overrides[key] = value
        profile = replace(base, **overrides)
    else:
        raise ConfigurationError(
            f"unknown knowledge graph {name_or_path!r}: not a built-in "
            f"({', '.join(BUILTIN_NAMES)}) and no such profile file"
        )
    if sparql_endpoint:
        profile = replace(profile, sparql_endpoint=sparql_endpoint)
    if not profile.sparql_endpoint:
        raise ConfigurationError(
            f"knowledge graph {profile.name!r} has no SPARQL endpoint; pass --sparql-endpoint"
        )
    return profile
