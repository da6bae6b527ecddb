"""Serving a trained scorer over the embedding wire protocol.

POST /embed with ``{"texts": [...]}`` answers ``{"vectors": [[...], ...],
"dim": d}`` with L2-normalized rows in input order; GET /health answers 200.
Requests may arrive concurrently; inference is serialized, all other state is
request-scoped.
"""

from __future__ import annotations

import json
import logging
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import urlparse

import torch
from transformers import AutoModel, AutoTokenizer

from .pooling import select_pooling
from .training import SCORER_CONFIG_NAME, encode

logger = logging.getLogger(__name__)

_CHUNK = 64


class EmbeddingService:
    """Loads a saved scorer directory and embeds text batches."""

    def __init__(self, model_dir: str | Path, device: str = "cpu"):
        model_dir = Path(model_dir)
        self.tokenizer = AutoTokenizer.from_pretrained(model_dir)
        self.model = AutoModel.from_pretrained(model_dir).to(device).eval()
        self.device = device
        config_path = model_dir / SCORER_CONFIG_NAME
        if config_path.exists():
            with open(config_path, encoding="utf-8") as fh:
                self.pooling = json.load(fh).get("pooling")
        else:
            self.pooling = None
        self.pooling = select_pooling(self.tokenizer, self.pooling)
        self.dim = int(self.model.config.hidden_size)
        self._lock = threading.Lock()

    def embed_texts(self, texts: list[str]) -> list[list[float]]:
        rows: list[list[float]] = []
        with self._lock, torch.no_grad():
            for start in range(0, len(texts), _CHUNK):
                chunk = texts[start : start + _CHUNK]
                vectors = encode(self.model, self.tokenizer, chunk, self.pooling, self.device)
                rows.extend(vectors.cpu().tolist())
        return rows


class EmbeddingServer:
    """Threaded HTTP server around an EmbeddingService."""

    def __init__(self, service: EmbeddingService, port: int = 0, host: str = "127.0.0.1"):
        self.service = service
        self._server = ThreadingHTTPServer((host, port), self._make_handler())
        self._thread: threading.Thread | None = None

    @property
    def url(self) -> str:
        host, port = self._server.server_address
        return f"http://{host}:{port}"

    @property
    def port(self) -> int:
        return self._server.server_address[1]

    def start(self) -> str:
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)
        self._thread.start()
        logger.info("serving embeddings on %s", self.url)
        return self.url

    def stop(self):
        self._server.shutdown()
        self._server.server_close()

    def serve_forever(self):
        self._server.serve_forever()

    def __enter__(self):
        self.start()
        return self

    def __exit__(self, *exc):
        self.stop()

    def _make_handler(self):
        service = self.service

        class Handler(BaseHTTPRequestHandler):
            def log_message(self, *args, **kwargs):
                pass

            def _send_json(self, code: int, payload: dict):
                body = json.dumps(payload).encode("utf-8")
                self.send_response(code)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(body)))
                self.end_headers()
                self.wfile.write(body)

            def do_GET(self):
                if urlparse(self.path).path == "/health":
                    self._send_json(200, {"status": "ok", "dim": service.dim})
                else:
                    self._send_json(404, {"error": "unknown path"})

            def do_POST(self):
                if urlparse(self.path).path != "/embed":
                    self._send_json(404, {"error": "unknown path"})
                    return
                length = int(self.headers.get("Content-Length", 0))
                try:
                    payload = json.loads(self.rfile.read(length))
                    texts = payload["texts"]
                    if not isinstance(texts, list) or not all(isinstance(t, str) for t in texts):
                        raise TypeError("texts must be a list of strings")
                except (ValueError, KeyError, TypeError) as exc:
                    self._send_json(400, {"error": f"expected {{\"texts\": [...]}}: {exc}"})
                    return
                vectors = service.embed_texts(texts)
                self._send_json(200, {"vectors": vectors, "dim": service.dim})

        return Handler


def serve(model_dir: str | Path, port: int, host: str = "127.0.0.1") -> EmbeddingServer:
    """Load a model directory and start serving; returns the running server."""
    server = EmbeddingServer(EmbeddingService(model_dir), port=port, host=host)
    server.start()
    return server
