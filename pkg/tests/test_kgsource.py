import io
import random

import pytest

from srtk.errors import ConfigurationError, TransportError
from srtk.kg import InMemoryKnowledgeSource, TripleStoreFixture, load_fixture
from srtk.kg.sparql import SparqlKnowledgeSource
from srtk.profiles import KnowledgeGraphProfile, builtin_profile, resolve_profile
from srtk.testkit import MockSparqlEndpoint, fixture_profile

from conftest import random_fixture


def test_connected_relations_on_g0(g0_source):
    assert g0_source.get_connected_relations({"E1"}) == {"Rloc", "Rcountry", "Rtz"}


def test_connected_relations_sink_node(g0_source):
    assert g0_source.get_connected_relations({"E4"}) == set()


def test_connected_relations_requires_entities(g0_source):
    with pytest.raises(ValueError):
        g0_source.get_connected_relations(set())


def test_terminal_entities_on_g0(g0_source):
    assert g0_source.get_terminal_entities({"E1"}, ["Rloc"]) == {"E2"}
    assert g0_source.get_terminal_entities({"E1"}, []) == {"E1"}
    assert g0_source.get_terminal_entities({"E1"}, ["Rloc", "Rloc"]) == {"E4"}


def test_terminal_entities_hop_limit(g0_source):
    with pytest.raises(ValueError):
        g0_source.get_terminal_entities({"E1"}, ["Rloc"] * 4)


def test_shortest_paths_on_g0(g0_source):
    assert g0_source.search_shortest_paths("E1", {"E2"}) == [["Rloc"]]
    assert g0_source.search_shortest_paths("E1", {"E1"}) == []
    assert g0_source.search_shortest_paths("E1", {"E4"}) == [["Rloc", "Rloc"]]


def test_shortest_paths_prefers_one_hop(g0_source):
    # E2 is reachable in one hop; two-hop paths must not be probed into the result
    assert g0_source.search_shortest_paths("E1", {"E2", "E4"}) == [["Rloc"]]


def test_sample_negatives_on_g0(g0_source):
    negatives = g0_source.sample_negative_relations({"E1"}, "Rloc", 2, seed=1)
    assert sorted(negatives) == ["Rcountry", "Rtz"]
    assert g0_source.sample_negative_relations({"E4"}, "Rloc", 5, seed=1) == []


def test_sample_negatives_seeded(g0_source):
    one = g0_source.sample_negative_relations({"E1"}, "Rloc", 1, seed=11)
    two = g0_source.sample_negative_relations({"E1"}, "Rloc", 1, seed=11)
    assert one == two and len(one) == 1 and one[0] in {"Rcountry", "Rtz"}
    picks = {
        g0_source.sample_negative_relations({"E1"}, "Rloc", 1, seed=s)[0] for s in range(30)
    }
    assert picks == {"Rcountry", "Rtz"}


def test_fetch_labels_with_fallback(g0_source):
    assert g0_source.fetch_labels({"Rloc"}) == {"Rloc": "located in"}
    assert g0_source.fetch_labels({"E1"}) == {"E1": "E1"}
    assert g0_source.fetch_labels(set()) == {}


def test_one_hop_edges(g0_source):
    assert g0_source.get_one_hop_edges({"E1", "E2"}, "Rloc") == {("E1", "E2"), ("E2", "E4")}


def test_path_composition_property(g0_source):
    rng = random.Random(7)
    for _ in range(10):
        fixture = random_fixture(rng)
        source = InMemoryKnowledgeSource(fixture)
        nodes = sorted({t[0] for t in fixture.triples})
        rels = sorted({t[1] for t in fixture.triples})
        start = {rng.choice(nodes)}
        p1 = [rng.choice(rels)]
        p2 = [rng.choice(rels)]
        composed = source.get_terminal_entities(start, p1 + p2)
        staged = source.get_terminal_entities(source.get_terminal_entities(start, p1), p2)
        assert composed == staged


def test_shortest_paths_reach_answers_property(g0_source):
    rng = random.Random(13)
    for _ in range(10):
        fixture = random_fixture(rng)
        source = InMemoryKnowledgeSource(fixture)
        nodes = sorted({x for t in fixture.triples for x in (t[0], t[2])})
        src = rng.choice(nodes)
        answers = set(rng.sample(nodes, 3))
        for path in source.search_shortest_paths(src, answers):
            assert source.get_terminal_entities({src}, path) & answers


def test_fixture_file_format():
    text = """\
# desk fixture
E1 Rloc E2
E1 Rcountry E3   # trailing comment
E2 Rloc E4
Rloc Rtype Rmeta located in
"""
    fixture = load_fixture(io.StringIO(text))
    assert ("E1", "Rloc", "E2") in fixture.triples
    assert fixture.labels == {"Rloc": "located in"}


def test_fixture_rejects_unanchored_labels():
    with pytest.raises(ValueError):
        TripleStoreFixture(triples=frozenset({("a", "b", "c")}), labels={"zzz": "nope"})


def test_profile_invariants():
    with pytest.raises(ConfigurationError):
        KnowledgeGraphProfile(
            name="custom",
            sparql_endpoint="",
            entity_prefix="http://x.org/e",  # no trailing separator
            relation_prefix="http://x.org/r/",
            label_predicate="http://x.org/label",
        )
    with pytest.raises(ConfigurationError):
        resolve_profile("custom")  # no endpoint anywhere
    profile = resolve_profile("wikidata")
    assert profile.sparql_endpoint == "https://query.wikidata.org/sparql"


def test_profile_file_overrides(tmp_path):
    path = tmp_path / "profile.json"
    path.write_text('{"name": "wikidata", "sparql_endpoint": "http://localhost:1/sparql"}')
    profile = resolve_profile(str(path))
    assert profile.sparql_endpoint == "http://localhost:1/sparql"
    assert profile.entity_prefix == "http://www.wikidata.org/entity/"


def test_wikidata_blocklist_drops_foreign_namespaces():
    profile = builtin_profile("wikidata")
    assert not profile.is_blocked("P31")
    assert profile.is_blocked("http://schema.org/description")


def test_result_cap_truncates_sorted(caplog):
    triples = frozenset({("HUB", f"R{i:04d}", f"N{i}") for i in range(30)})
    source = InMemoryKnowledgeSource(TripleStoreFixture(triples=triples), result_cap=10)
    relations = source.get_connected_relations({"HUB"})
    assert relations == {f"R{i:04d}" for i in range(10)}


ALL_OPS = [
    ("get_connected_relations", lambda s, e, a: s.get_connected_relations(e)),
    ("get_terminal_entities", lambda s, e, a: s.get_terminal_entities(e, a["path"])),
    ("search_shortest_paths", lambda s, e, a: s.search_shortest_paths(a["src"], a["answers"])),
    (
        "sample_negative_relations",
        lambda s, e, a: s.sample_negative_relations(e, a["exclude"], 2, seed=5),
    ),
    ("fetch_labels", lambda s, e, a: s.fetch_labels(a["ids"])),
    ("get_one_hop_edges", lambda s, e, a: s.get_one_hop_edges(e, a["rel"])),
]


def _equivalence_args(fixture, rng):
    nodes = sorted({x for t in fixture.triples for x in (t[0], t[2])})
    rels = sorted({t[1] for t in fixture.triples})
    return {
        "path": [rng.choice(rels) for _ in range(rng.randint(0, 2))],
        "src": rng.choice(nodes),
        "answers": set(rng.sample(nodes, min(3, len(nodes)))),
        "exclude": rng.choice(rels),
        "ids": set(rng.sample(nodes, 2)) | {rng.choice(rels)},
        "rel": rng.choice(rels),
    }


def test_backends_observationally_equivalent_on_g0(g0, g0_source, g0_sparql_source):
    args = {
        "path": ["Rloc", "Rloc"],
        "src": "E1",
        "answers": {"E4"},
        "exclude": "Rloc",
        "ids": {"E1", "Rloc", "Rcountry"},
        "rel": "Rloc",
    }
    for name, op in ALL_OPS:
        assert op(g0_source, {"E1", "E2"}, args) == op(g0_sparql_source, {"E1", "E2"}, args), name


def test_backends_observationally_equivalent_on_random_fixtures():
    rng = random.Random(99)
    for round_ in range(10):
        fixture = random_fixture(rng, n_nodes=12, n_relations=4, n_edges=25)
        memory = InMemoryKnowledgeSource(fixture)
        with MockSparqlEndpoint(fixture) as endpoint:
            sparql = SparqlKnowledgeSource(fixture_profile(endpoint.url))
            args = _equivalence_args(fixture, rng)
            entities = set(rng.sample(sorted({t[0] for t in fixture.triples}), 2))
            for name, op in ALL_OPS:
                assert op(memory, entities, args) == op(sparql, entities, args), (round_, name)


def test_transport_error_after_retries():
    profile = fixture_profile("http://127.0.0.1:1/sparql")  # nothing listens here
    source = SparqlKnowledgeSource(profile, backoff_start_s=0.001)
    with pytest.raises(TransportError):
        source.get_connected_relations({"E1"})


def test_sparql_source_usable_from_worker_threads(g0_sparql_source):
    from concurrent.futures import ThreadPoolExecutor

    with ThreadPoolExecutor(max_workers=8) as pool:
        results = list(pool.map(lambda _: g0_sparql_source.get_connected_relations({"E1"}), range(16)))
    assert all(r == {"Rloc", "Rcountry", "Rtz"} for r in results)


@pytest.mark.skipif(
    not __import__("os").environ.get("SRTK_LIVE_TESTS"),
    reason="live endpoint smoke test; set SRTK_LIVE_TESTS=1 to run",
)
def test_wikidata_live_smoke():
    source = SparqlKnowledgeSource(resolve_profile("wikidata"))
    relations = source.get_connected_relations({"Q1330839"})
    assert {"P31", "P17"} <= relations
    labels = source.fetch_labels({"Q17"})
    assert labels["Q17"] == "Japan"
