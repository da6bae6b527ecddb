import re

import pytest

from srtk.errors import ConfigurationError
from srtk.records import QuestionRecord, RetrievalResult, Subgraph
from srtk.visualization import build_graph_document, render_html

HAKATA_LABELS = {
    "Q1330839": "Hakata-ku",
    "Q26600": "Fukuoka",
    "Q17": "Japan",
    "P31": "located in",
    "P17": "country",
}


def hakata_result():
    return RetrievalResult(
        record=QuestionRecord(question="Where is Hakata Ward?",
                              question_entities=("Q1330839",)),
        subgraph=Subgraph(
            triples=(("Q1330839", "P31", "Q26600"), ("Q1330839", "P17", "Q17"))
        ),
    )


def test_build_graph_document_hakata():
    doc = build_graph_document(hakata_result(), HAKATA_LABELS)
    assert len(doc.nodes) == 3
    highlighted = [n for n in doc.nodes if n["highlighted"]]
    assert [n["id"] for n in highlighted] == ["Q1330839"]
    assert len(doc.edges) == 2
    assert {e["label"] for e in doc.edges} == {"located in", "country"}


def test_build_graph_document_empty():
    result = RetrievalResult(record=QuestionRecord(question="q"), subgraph=Subgraph())
    doc = build_graph_document(result, {})
    assert doc.nodes == () and doc.edges == ()


def test_node_dedup_and_degree():
    result = RetrievalResult(
        record=QuestionRecord(question="q"),
        subgraph=Subgraph(triples=(("A", "R1", "B"), ("A", "R2", "C"))),
    )
    doc = build_graph_document(result, {})
    assert len(doc.nodes) == 3  # A deduplicated across the two triples
    degree = sum(1 for e in doc.edges if e["source"] == "A")
    assert degree == 2


def test_counts_match_subgraph():
    result = hakata_result()
    doc = build_graph_document(result, HAKATA_LABELS)
    assert len(doc.nodes) == len(result.subgraph.entities())
    assert len(doc.edges) == len(result.subgraph)


def test_render_html_contains_labels():
    html = render_html(build_graph_document(hakata_result(), HAKATA_LABELS))
    assert "Fukuoka" in html
    assert "Japan" in html
    assert html.startswith("<!DOCTYPE html>")


def test_render_html_empty_doc():
    result = RetrievalResult(record=QuestionRecord(question="q"), subgraph=Subgraph())
    html = render_html(build_graph_document(result, {}))
    assert '"nodes": []' in html


def test_render_html_deterministic():
    doc = build_graph_document(hakata_result(), HAKATA_LABELS)
    assert render_html(doc) == render_html(doc)


EXTERNAL_REF_RE = re.compile(
    r"""(?:src|href)\s*=\s*["']\s*(?:https?:)?//|<link\b|url\(\s*["']?https?:|@import""",
    re.IGNORECASE,
)


def test_no_external_resources():
    html = render_html(build_graph_document(hakata_result(), HAKATA_LABELS))
    assert not EXTERNAL_REF_RE.search(html)


def test_template_missing_placeholder_is_config_error():
    doc = build_graph_document(hakata_result(), HAKATA_LABELS)
    with pytest.raises(ConfigurationError, match="graph_data"):
        render_html(doc, template="<html>$title $script</html>")
