"""Rendering retrieved subgraphs as self-contained interactive HTML pages.

Labels come from the knowledge graph, linked entities are highlighted, and the
rendering script is vendored into the package and inlined, so the output makes
no network fetches at view time.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from string import Template

from .errors import ConfigurationError
from .records import RetrievalResult


@dataclass(frozen=True)
class GraphDocument:
    """Labeled node/edge lists ready for embedding into the page."""

    nodes: tuple[dict, ...]
    edges: tuple[dict, ...]
    title: str = "Retrieved subgraph"


def build_graph_document(result: RetrievalResult, labels: dict[str, str]) -> GraphDocument:
    """One node per distinct subject/object, one edge per triple.

    Nodes matching the record's question entities are flagged highlighted;
    every id must have a label (fetch_labels guarantees a fallback).
    """
    question_entities = set(result.record.question_entities or ())
    nodes = []
    for entity in sorted(result.subgraph.entities()):
        nodes.append(
            {
                "id": entity,
                "label": labels.get(entity, entity),
                "highlighted": entity in question_entities,
            }
        )
    edges = []
    for subject, predicate, obj in result.subgraph.triples:
        edges.append(
            {"source": subject, "target": obj, "label": labels.get(predicate, predicate)}
        )
    title = result.record.question or "Retrieved subgraph"
    return GraphDocument(nodes=tuple(nodes), edges=tuple(edges), title=title)


def _asset(name: str) -> str:
    return resources.files("srtk.assets").joinpath(name).read_text(encoding="utf-8")


def render_html(doc: GraphDocument, template: str | None = None) -> str:
    """Fill the page template with the graph data and the vendored script.

    Deterministic for a given document; raises ConfigurationError when the
    template lacks one of the required placeholders.
    """
    template_text = template if template is not None else _asset("graph_view.html")
    for placeholder in ("$title", "$graph_data", "$script"):
        if placeholder not in template_text:
            raise ConfigurationError(f"template is missing the {placeholder} placeholder")
    data = {"nodes": list(doc.nodes), "edges": list(doc.edges)}
    return Template(template_text).substitute(
        title=doc.title,
        graph_data=json.dumps(data, ensure_ascii=False, sort_keys=True),
        script=_asset("graph_view.js"),
    )
