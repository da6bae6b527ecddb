from .base import MAX_HOP, RESULT_CAP, KnowledgeSource
from .memory import InMemoryKnowledgeSource, TripleStoreFixture, load_fixture
from .sparql import SparqlKnowledgeSource

__all__ = [
    "KnowledgeSource",
    "InMemoryKnowledgeSource",
    "SparqlKnowledgeSource",
    "TripleStoreFixture",
    "load_fixture",
    "MAX_HOP",
    "RESULT_CAP",
]
