"""Threaded mock HTTP endpoints speaking the exact wire formats the clients use.

The SPARQL mock matches the client's fixed query templates against a fixture
graph (template matching, not a SPARQL engine); the linker and embedding mocks
serve canned or derived responses. All servers count requests so tests can
assert caching, batching, and zero-call properties, and all tolerate
concurrent requests.
"""

from __future__ import annotations

import hashlib
import json
import math
import re
import struct
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from urllib.parse import parse_qs, urlparse

from ..kg.memory import InMemoryKnowledgeSource, TripleStoreFixture
from ..profiles import KnowledgeGraphProfile, builtin_profile


def fixture_profile(endpoint: str = "", **overrides) -> KnowledgeGraphProfile:
    """The profile mock-backed sources use: example.org prefixes, no retries."""
    from dataclasses import replace

    base = builtin_profile("custom")
    return replace(
        base, sparql_endpoint=endpoint, max_retries=0, request_timeout=10.0, **overrides
    )


class _CountingServer(ThreadingHTTPServer):
    daemon_threads = True

    def __init__(self, handler):
        super().__init__(("127.0.0.1", 0), handler)
        self.request_count = 0
        self.request_lock = threading.Lock()

    def bump(self):
        with self.request_lock:
            self.request_count += 1


class _Endpoint:
    """Start/stop wrapper; use as a context manager to get a live URL."""

    server_class = _CountingServer

    def __init__(self):
        self._server: _CountingServer | None = None
        self._thread: threading.Thread | None = None

    def _make_handler(self):
        raise NotImplementedError

    def start(self) -> str:
        self._server = self.server_class(self._make_handler())
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)
        self._thread.start()
        return self.url

    def stop(self):
        if self._server:
            self._server.shutdown()
            self._server.server_close()
            self._server = None

    @property
    def url(self) -> str:
        host, port = self._server.server_address
        return f"http://{host}:{port}"

    @property
    def request_count(self) -> int:
        return self._server.request_count if self._server else 0

    def __enter__(self):
        self.start()
        return self

    def __exit__(self, *exc):
        self.stop()


def _silent(handler_cls):
    handler_cls.log_message = lambda *args, **kwargs: None
    return handler_cls


_RELATIONS_RE = re.compile(r"^SELECT DISTINCT \?r WHERE \{ VALUES \?e \{ (?P<e>[^}]*)\} \?e \?r \?x \. FILTER\(isIRI\(\?x\)\) \} LIMIT (?P<limit>\d+)$")
_TERMINALS_RE = re.compile(r"^SELECT DISTINCT \?t WHERE \{ VALUES \?e \{ (?P<e>[^}]*)\} (?P<chain>.*?) FILTER\(isIRI\(\?t\)\) \} LIMIT (?P<limit>\d+)$")
_HOP1_RE = re.compile(r"^SELECT DISTINCT \?r1 WHERE \{ VALUES \?s \{ (?P<s>[^}]*)\} VALUES \?t \{ (?P<t>[^}]*)\} \?s \?r1 \?t \. \} LIMIT (?P<limit>\d+)$")
_HOP2_RE = re.compile(r"^SELECT DISTINCT \?r1 \?r2 WHERE \{ VALUES \?s \{ (?P<s>[^}]*)\} VALUES \?t \{ (?P<t>[^}]*)\} \?s \?r1 \?m \. \?m \?r2 \?t \. \} LIMIT (?P<limit>\d+)$")
_EDGES_RE = re.compile(r"^SELECT DISTINCT \?e \?o WHERE \{ VALUES \?e \{ (?P<e>[^}]*)\} \?e <(?P<r>[^>]*)> \?o \. FILTER\(isIRI\(\?o\)\) \} LIMIT (?P<limit>\d+)$")
_LABELS_RE = re.compile(r"^SELECT \?e \?l WHERE \{ VALUES \?e \{ (?P<e>[^}]*)\} \?e <(?P<p>[^>]*)> \?l \. FILTER\(LANG\(\?l\) = \"\" \|\| LANGMATCHES\(LANG\(\?l\), \"en\"\)\) \} LIMIT (?P<limit>\d+)$")
_CHAIN_STEP_RE = re.compile(r"(\?\w+) <([^>]*)> (\?\w+) \.")


class MockSparqlEndpoint(_Endpoint):
    """Serves standard SPARQL JSON results for the client's query templates,
    evaluated against an in-memory fixture."""

    def __init__(self, fixture: TripleStoreFixture, profile: KnowledgeGraphProfile | None = None,
                 fail_on_ids: set[str] | None = None):
        super().__init__()
        self.profile = profile or fixture_profile()
        self.source = InMemoryKnowledgeSource(
            fixture, builtin_profile("custom"), result_cap=10**9
        )
        self.fixture = fixture
        self.fail_on_ids = fail_on_ids or set()
        self.queries: list[str] = []
        self._queries_lock = threading.Lock()

    def _shorten(self, iri: str) -> str:
        short = self.profile.shorten_entity(iri)
        return self.profile.shorten_relation(short)

    def _iris(self, blob: str) -> list[str]:
        return [self._shorten(m) for m in re.findall(r"<([^>]*)>", blob)]

    def _answer(self, query: str) -> dict:
        query = " ".join(query.split())
        with self._queries_lock:
            self.queries.append(query)
        for bad in self.fail_on_ids:
            if bad in query:
                raise ConnectionResetError(f"configured failure for id {bad!r}")
        store = self.source

        m = _RELATIONS_RE.match(query)
        if m:
            entities = frozenset(self._iris(m.group("e")))
            rows = sorted(store._connected_relations(entities))[: int(m.group("limit"))]
            return self._bindings([("r", "uri", self.profile.expand_relation(r)) for r in rows])

        m = _TERMINALS_RE.match(query)
        if m:
            entities = frozenset(self._iris(m.group("e")))
            chain = [self._shorten(rel) for _, rel, _ in _CHAIN_STEP_RE.findall(m.group("chain"))]
            rows = sorted(store._terminal_entities(entities, chain))[: int(m.group("limit"))]
            return self._bindings([("t", "uri", self.profile.expand_entity(t)) for t in rows])

        m = _HOP1_RE.match(query)
        if m:
            src = self._iris(m.group("s"))[0]
            answers = frozenset(self._iris(m.group("t")))
            rows = sorted(store._path_probe(src, answers, 1))[: int(m.group("limit"))]
            return self._bindings(
                [("r1", "uri", self.profile.expand_relation(p[0])) for p in rows]
            )

        m = _HOP2_RE.match(query)
        if m:
            src = self._iris(m.group("s"))[0]
            answers = frozenset(self._iris(m.group("t")))
            rows = sorted(store._path_probe(src, answers, 2))[: int(m.group("limit"))]
            return self._bindings(
                [
                    [
                        ("r1", "uri", self.profile.expand_relation(p[0])),
                        ("r2", "uri", self.profile.expand_relation(p[1])),
                    ]
                    for p in rows
                ],
                multi=True,
            )

        m = _EDGES_RE.match(query)
        if m:
            entities = frozenset(self._iris(m.group("e")))
            relation = self._shorten(m.group("r"))
            rows = sorted(store._one_hop_edges(entities, relation))[: int(m.group("limit"))]
            return self._bindings(
                [
                    [
                        ("e", "uri", self.profile.expand_entity(s)),
                        ("o", "uri", self.profile.expand_entity(o)),
                    ]
                    for s, o in rows
                ],
                multi=True,
            )

        m = _LABELS_RE.match(query)
        if m:
            ids = self._iris(m.group("e"))
            rows = []
            for i in sorted(set(ids)):
                if i in self.fixture.labels:
                    rows.append(
                        [
                            ("e", "uri", self.profile.expand_entity(i)),
                            ("l", "literal", self.fixture.labels[i]),
                        ]
                    )
            return self._bindings(rows[: int(m.group("limit"))], multi=True)

        raise ValueError(f"mock endpoint does not understand query: {query!r}")

    @staticmethod
    def _bindings(rows, multi: bool = False) -> dict:
        bindings = []
        for row in rows:
            cells = row if multi else [row]
            bindings.append({var: {"type": kind, "value": value} for var, kind, value in cells})
        head = sorted({var for b in bindings for var in b}) if bindings else []
        return {"head": {"vars": head}, "results": {"bindings": bindings}}

    def _make_handler(self):
        endpoint = self

        @_silent
        class Handler(BaseHTTPRequestHandler):
            def _respond(self, query: str | None):
                endpoint._server.bump()
                if query is None:
                    self.send_error(400, "missing query")
                    return
                try:
                    payload = endpoint._answer(query)
                except ConnectionResetError as exc:
                    self.send_error(500, str(exc))
                    return
                except ValueError as exc:
                    self.send_error(400, str(exc))
                    return
                body = json.dumps(payload).encode("utf-8")
                self.send_response(200)
                self.send_header("Content-Type", "application/sparql-results+json")
                self.send_header("Content-Length", str(len(body)))
                self.end_headers()
                self.wfile.write(body)

            def do_GET(self):
                params = parse_qs(urlparse(self.path).query)
                self._respond(params.get("query", [None])[0])

            def do_POST(self):
                length = int(self.headers.get("Content-Length", 0))
                body = self.rfile.read(length).decode("utf-8")
                content_type = self.headers.get("Content-Type", "")
                if "application/sparql-query" in content_type:
                    query = body
                else:
                    query = parse_qs(body).get("query", [None])[0]
                self._respond(query)

        return Handler


class MockRelEndpoint(_Endpoint):
    """REL-style linker endpoint serving configured rows per question text.

    ``annotations`` maps question text to a list of
    ``(start, length, mention, title, confidence)`` tuples. Unknown questions
    get an empty list; texts in ``fail_on`` get a 500.
    """

    def __init__(self, annotations: dict[str, list[tuple]], require_auth: str | None = None,
                 fail_on: set[str] | None = None):
        super().__init__()
        self.annotations = annotations
        self.require_auth = require_auth
        self.fail_on = fail_on or set()

    def _make_handler(self):
        endpoint = self

        @_silent
        class Handler(BaseHTTPRequestHandler):
            def do_POST(self):
                endpoint._server.bump()
                if endpoint.require_auth and self.headers.get("Authorization") != endpoint.require_auth:
                    self.send_error(401, "missing or wrong authorization")
                    return
                length = int(self.headers.get("Content-Length", 0))
                try:
                    payload = json.loads(self.rfile.read(length))
                    text = payload["text"]
                except (ValueError, KeyError):
                    self.send_error(400, "expected {\"text\": ...}")
                    return
                if text in endpoint.fail_on:
                    self.send_error(500, "configured failure")
                    return
                rows = [list(row) for row in endpoint.annotations.get(text, [])]
                body = json.dumps(rows).encode("utf-8")
                self.send_response(200)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(body)))
                self.end_headers()
                self.wfile.write(body)

        return Handler


class MockSpotlightEndpoint(_Endpoint):
    """Spotlight-style endpoint serving configured resources per text.

    ``resources`` maps text to a list of ``(uri, offset, surface_form, score)``.
    The confidence filter is left to the client, mirroring a lenient server.
    """

    def __init__(self, resources: dict[str, list[tuple]]):
        super().__init__()
        self.resources = resources

    def _make_handler(self):
        endpoint = self

        @_silent
        class Handler(BaseHTTPRequestHandler):
            def do_POST(self):
                endpoint._server.bump()
                length = int(self.headers.get("Content-Length", 0))
                params = parse_qs(self.rfile.read(length).decode("utf-8"))
                text = params.get("text", [""])[0]
                rows = [
                    {
                        "@URI": uri,
                        "@offset": str(offset),
                        "@surfaceForm": surface,
                        "@similarityScore": str(score),
                    }
                    for uri, offset, surface, score in endpoint.resources.get(text, [])
                ]
                body = json.dumps({"Resources": rows}).encode("utf-8")
                self.send_response(200)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(body)))
                self.end_headers()
                self.wfile.write(body)

        return Handler


def hash_embedding(text: str, dim: int = 16) -> list[float]:
    """Deterministic pseudo-embedding: unit vector derived from the text hash."""
    out = []
    counter = 0
    while len(out) < dim:
        digest = hashlib.sha256(f"{text}\x00{counter}".encode("utf-8")).digest()
        for i in range(0, len(digest) - 7, 8):
            (value,) = struct.unpack(">q", digest[i : i + 8])
            out.append(value / 2**63)
            if len(out) == dim:
                break
        counter += 1
    norm = math.sqrt(sum(x * x for x in out)) or 1.0
    return [x / norm for x in out]


class MockEmbedEndpoint(_Endpoint):
    """Embedding endpoint speaking POST /embed; vectors are hash-derived unless
    an explicit ``vectors`` map is given. Counts requests and texts served."""

    def __init__(self, dim: int = 16, vectors: dict[str, list[float]] | None = None):
        super().__init__()
        self.dim = dim
        self.vectors = vectors or {}
        self.texts_served: list[str] = []
        self._texts_lock = threading.Lock()

    def _embed(self, text: str) -> list[float]:
        if text in self.vectors:
            vec = self.vectors[text]
            norm = math.sqrt(sum(x * x for x in vec)) or 1.0
            return [x / norm for x in vec]
        return hash_embedding(text, self.dim)

    def _make_handler(self):
        endpoint = self

        @_silent
        class Handler(BaseHTTPRequestHandler):
            def do_GET(self):
                endpoint._server.bump()
                if urlparse(self.path).path != "/health":
                    self.send_error(404)
                    return
                body = b'{"status": "ok"}'
                self.send_response(200)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(body)))
                self.end_headers()
                self.wfile.write(body)

            def do_POST(self):
                endpoint._server.bump()
                if urlparse(self.path).path != "/embed":
                    self.send_error(404)
                    return
                length = int(self.headers.get("Content-Length", 0))
                try:
                    payload = json.loads(self.rfile.read(length))
                    texts = payload["texts"]
                    assert isinstance(texts, list)
                except (ValueError, KeyError, AssertionError):
                    self.send_error(400, "expected {\"texts\": [...]}")
                    return
                with endpoint._texts_lock:
                    endpoint.texts_served.extend(texts)
                vectors = [endpoint._embed(t) for t in texts]
                body = json.dumps({"vectors": vectors, "dim": endpoint.dim}).encode("utf-8")
                self.send_response(200)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(body)))
                self.end_headers()
                self.wfile.write(body)

        return Handler
