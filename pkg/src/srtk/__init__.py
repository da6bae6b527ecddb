"""Semantic-relevant subgraph retrieval toolkit.

Pipeline stages (each also a CLI subcommand): entity linking, scorer-guided
beam-search path expansion with fact retrieval, weak-supervision training-data
generation, coverage evaluation, and interactive-HTML visualization. Stages
communicate through line-delimited JSON records.
"""

from .errors import (
    AuthenticationError,
    ConfigurationError,
    ProtocolError,
    RecordFormatError,
    SrtkError,
    TransportError,
)
from .evaluation import EvalReport, evaluate, format_report, is_covered
from .expansion import Beam, expand_step, materialize_subgraph, retrieve_paths
from .kg import (
    InMemoryKnowledgeSource,
    KnowledgeSource,
    SparqlKnowledgeSource,
    TripleStoreFixture,
    load_fixture,
)
from .linking import (
    Annotation,
    LinkerConfig,
    WikiMapping,
    annotate_rel,
    annotate_spotlight,
    link_records,
    load_wikimapping,
    map_to_wikidata,
)
from .preprocess import ScoredPath, decompose_path, find_scored_paths, generate_samples, jaccard
from .profiles import KnowledgeGraphProfile, builtin_profile, resolve_profile
from .records import (
    END_LABEL,
    SEP_TOKEN,
    ExpansionPath,
    QuestionRecord,
    RetrievalResult,
    Subgraph,
    TrainSample,
    build_query,
    read_records,
    write_records,
)
from .scoring import (
    EmbeddingScorer,
    LexicalScorer,
    ScoredCandidates,
    ScoreRequest,
    resolve_scorer,
    softmax_log_probs,
)
from .visualization import GraphDocument, build_graph_document, render_html

__version__ = "0.1.0"
