from .mock_endpoints import (
    MockEmbedEndpoint,
    MockRelEndpoint,
    MockSparqlEndpoint,
    MockSpotlightEndpoint,
    fixture_profile,
    hash_embedding,
)
from .planted import (
    CountingSource,
    OracleScorer,
    PlantedInstance,
    brute_force_paths,
    generate_planted,
    oracle_scorer,
)

__all__ = [
    "MockEmbedEndpoint",
    "MockRelEndpoint",
    "MockSparqlEndpoint",
    "MockSpotlightEndpoint",
    "fixture_profile",
    "hash_embedding",
    "CountingSource",
    "OracleScorer",
    "PlantedInstance",
    "brute_force_paths",
    "generate_planted",
    "oracle_scorer",
]
