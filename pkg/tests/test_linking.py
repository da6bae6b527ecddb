import os

import pytest

from srtk.errors import AuthenticationError, TransportError
from srtk.linking import (
    Annotation,
    LinkerConfig,
    WikiMapping,
    annotate_rel,
    annotate_spotlight,
    link_records,
    load_wikimapping,
    map_to_wikidata,
)
from srtk.records import QuestionRecord
from srtk.testkit import MockRelEndpoint, MockSpotlightEndpoint

HAKATA_Q = "Where is Hakata Ward?"
HAKATA_ROW = (9, 11, "Hakata Ward", "Hakata-ku,_Fukuoka", 0.83)


def test_annotate_rel_hakata():
    with MockRelEndpoint({HAKATA_Q: [HAKATA_ROW]}) as endpoint:
        annotations = annotate_rel(HAKATA_Q, endpoint.url)
    assert len(annotations) == 1
    ann = annotations[0]
    assert (ann.start, ann.end) == (9, 20)
    assert ann.target_name == "Hakata-ku,_Fukuoka"
    assert ann.mention == "Hakata Ward"


def test_annotate_rel_rejects_empty_question():
    with pytest.raises(ValueError):
        annotate_rel("", "http://127.0.0.1:1")


def test_annotate_rel_overlap_resolution():
    rows = [
        (0, 8, "Hakata W", "Hakata", 0.4),
        (0, 11, "Hakata Ward", "Hakata-ku,_Fukuoka", 0.9),
    ]
    with MockRelEndpoint({"Hakata Ward today": rows}) as endpoint:
        annotations = annotate_rel("Hakata Ward today", endpoint.url)
    assert len(annotations) == 1
    assert annotations[0].confidence == 0.9


def test_annotate_rel_auth_error():
    with MockRelEndpoint({}, require_auth="secret-token") as endpoint:
        with pytest.raises(AuthenticationError):
            annotate_rel("some question", endpoint.url)
        assert annotate_rel("some question", endpoint.url, auth="secret-token") == []


def test_annotate_rel_transport_error():
    with pytest.raises(TransportError):
        annotate_rel("q", "http://127.0.0.1:1", timeout=0.2)


def test_map_to_wikidata():
    mapping = WikiMapping(table={"Hakata-ku,_Fukuoka": "Q1330839"})
    annotations = [
        Annotation(9, 20, "Hakata Ward", "Hakata-ku,_Fukuoka", "Hakata-ku,_Fukuoka", 0.8)
    ]
    mapped, dropped = map_to_wikidata(annotations, mapping)
    assert dropped == 0
    assert mapped[0].target_id == "Q1330839"
    assert mapped[0].target_name == "Hakata-ku,_Fukuoka"


def test_map_to_wikidata_empty():
    assert map_to_wikidata([], WikiMapping()) == ([], 0)


def test_map_to_wikidata_drops_and_counts():
    mapping = WikiMapping(table={"A": "Q1", "C": "Q3"})
    annotations = [
        Annotation(0, 1, "a", "A", "A"),
        Annotation(2, 3, "b", "B", "B"),
        Annotation(4, 5, "c", "C", "C"),
    ]
    mapped, dropped = map_to_wikidata(annotations, mapping)
    assert [a.target_id for a in mapped] == ["Q1", "Q3"]
    assert dropped == 1


def test_wikimapping_validates_qids():
    with pytest.raises(ValueError):
        WikiMapping(table={"X": "not-a-qid"})


def test_load_wikimapping(tmp_path):
    path = tmp_path / "map.tsv"
    path.write_text("Fukuoka\tQ26600\nHakata-ku,_Fukuoka\tQ1330839\n")
    mapping = load_wikimapping(str(path))
    assert mapping.lookup("Hakata-ku, Fukuoka") == "Q1330839"
    assert mapping.lookup("Missing") is None


def test_annotate_spotlight_threshold():
    resources = {
        "Where is Hakata Ward?": [
            ("http://dbpedia.org/resource/Hakata-ku,_Fukuoka", 9, "Hakata Ward", 0.99),
            ("http://dbpedia.org/resource/Ward", 16, "Ward?", 0.30),
        ]
    }
    with MockSpotlightEndpoint(resources) as endpoint:
        kept = annotate_spotlight("Where is Hakata Ward?", endpoint.url, 0.5)
        assert len(kept) == 1
        assert kept[0].target_id == "Hakata-ku,_Fukuoka"
        everything = annotate_spotlight("Where is Hakata Ward?", endpoint.url, 0.0)
        assert len(everything) == 1  # second span overlaps and loses on confidence


def test_annotate_spotlight_threshold_zero_keeps_all():
    resources = {"a b": [("http://dbpedia.org/resource/A", 0, "a", 0.9),
                         ("http://dbpedia.org/resource/B", 2, "b", 0.1)]}
    with MockSpotlightEndpoint(resources) as endpoint:
        assert len(annotate_spotlight("a b", endpoint.url, 0.0)) == 2


def link_config(endpoint_url, **kwargs):
    return LinkerConfig(
        kind="rel",
        endpoint=endpoint_url,
        mapping=WikiMapping(table={"Hakata-ku,_Fukuoka": "Q1330839"}),
        **kwargs,
    )


def test_link_records_fills_parallel_arrays():
    record = QuestionRecord(question=HAKATA_Q)
    with MockRelEndpoint({HAKATA_Q: [HAKATA_ROW]}) as endpoint:
        report = link_records([record], link_config(endpoint.url))
    linked = report.records[0]
    assert linked.question_entities == ("Q1330839",)
    assert linked.spans == ((9, 20),)
    assert linked.entity_names == ("Hakata-ku,_Fukuoka",)


def test_link_records_empty_annotations_keep_pipeline_alive():
    record = QuestionRecord(question="nothing to link here")
    with MockRelEndpoint({}) as endpoint:
        report = link_records([record], link_config(endpoint.url))
    linked = report.records[0]
    assert linked.question_entities == ()
    assert linked.spans == ()
    assert linked.entity_names == ()
    assert "error" not in linked.extra


def test_link_records_batch_with_one_failure():
    questions = [f"question number {i}" for i in range(10)]
    annotations = {
        q: [(0, 8, "question", "Question", 0.7)] for q in questions
    }
    with MockRelEndpoint(annotations, fail_on={questions[4]}) as endpoint:
        config = LinkerConfig(kind="rel", endpoint=endpoint.url,
                              mapping=WikiMapping(table={"Question": "Q100"}))
        report = link_records([QuestionRecord(question=q) for q in questions], config)
    assert len(report.records) == 10
    assert report.errors == 1
    assert "error" in report.records[4].extra
    for i, rec in enumerate(report.records):
        if i != 4:
            assert rec.question_entities == ("Q100",)
            assert len(rec.question_entities) == len(rec.spans) == len(rec.entity_names)


def test_link_records_output_order_is_input_order():
    questions = [f"q {i:02d}" for i in range(16)]
    annotations = {q: [(0, 1, "q", "Thing", 0.5)] for q in questions}
    with MockRelEndpoint(annotations) as endpoint:
        config = LinkerConfig(kind="rel", endpoint=endpoint.url,
                              mapping=WikiMapping(table={"Thing": "Q1"}), jobs=8)
        report = link_records([QuestionRecord(question=q) for q in questions], config)
    assert [r.question for r in report.records] == questions


@pytest.mark.skipif(
    not os.environ.get("SRTK_LIVE_TESTS"),
    reason="live endpoint smoke test; set SRTK_LIVE_TESTS=1 to run",
)
def test_annotate_spotlight_live_smoke():
    annotations = annotate_spotlight(
        "Where is Hakata Ward?", "https://api.dbpedia-spotlight.org/en/annotate", 0.5
    )
    assert any(a.mention == "Hakata Ward" for a in annotations)
