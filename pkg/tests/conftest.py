import random

import pytest

from srtk.kg import InMemoryKnowledgeSource, TripleStoreFixture
from srtk.testkit import MockSparqlEndpoint, fixture_profile
from srtk.kg.sparql import SparqlKnowledgeSource

G0_TRIPLES = frozenset(
    {
        ("E1", "Rloc", "E2"),
        ("E1", "Rcountry", "E3"),
        ("E1", "Rtz", "E5"),
        ("E2", "Rloc", "E4"),
    }
)

G0_LABELS = {
    "Rloc": "located in",
    "Rcountry": "country",
    "Rtz": "time zone",
}


@pytest.fixture(scope="session")
def g0():
    return TripleStoreFixture(triples=G0_TRIPLES, labels=G0_LABELS)


@pytest.fixture()
def g0_source(g0):
    return InMemoryKnowledgeSource(g0)


@pytest.fixture(scope="session")
def g0_sparql_source(g0):
    with MockSparqlEndpoint(g0) as endpoint:
        profile = fixture_profile(endpoint.url)
        yield SparqlKnowledgeSource(profile)


def random_fixture(rng: random.Random, n_nodes: int = 20, n_relations: int = 5,
                   n_edges: int = 40, labeled: bool = True) -> TripleStoreFixture:
    """Random small graph; relation labels drawn from a word pool when labeled."""
    nodes = [f"N{i}" for i in range(n_nodes)]
    relations = [f"R{i}" for i in range(n_relations)]
    words = ["located", "in", "country", "time", "zone", "part", "of", "capital", "borders"]
    triples = set()
    while len(triples) < n_edges:
        s = rng.choice(nodes)
        o = rng.choice(nodes)
        if s == o:
            continue
        triples.add((s, rng.choice(relations), o))
    labels = {}
    if labeled:
        for r in relations:
            labels[r] = " ".join(rng.sample(words, rng.randint(1, 3)))
        mentioned = {x for t in triples for x in t}
        labels = {k: v for k, v in labels.items() if k in mentioned}
    return TripleStoreFixture(triples=frozenset(triples), labels=labels)
