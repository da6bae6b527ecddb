"""Entity-linking clients behind one annotation interface.

Two endpoint styles are supported: a REL-style service that links mentions to
Wikipedia articles (mapped onward to Wikidata Q-ids through a local title
table) and a Spotlight-style service that links directly to DBpedia resources.
"""

from __future__ import annotations

import logging
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import requests

from .errors import AuthenticationError, ProtocolError, TransportError
from .profiles import KnowledgeGraphProfile
from .records import QuestionRecord

logger = logging.getLogger(__name__)

_WS_RE = re.compile(r"\s+")
_QID_RE = re.compile(r"^Q[0-9]+$")


def _normalize_ws(text: str) -> str:
    return _WS_RE.sub(" ", text).strip()


@dataclass(frozen=True)
class Annotation:
    """One linked mention: a character span and its knowledge-graph target."""

    start: int
    end: int
    mention: str
    target_id: str
    target_name: str
    confidence: float | None = None

    def __post_init__(self):
        if not 0 <= self.start < self.end:
            raise ValueError(f"span [{self.start},{self.end}) is not a valid character range")

    def check_against(self, question: str) -> None:
        span_text = question[self.start : self.end]
        if _normalize_ws(span_text) != _normalize_ws(self.mention):
            raise ValueError(
                f"span [{self.start},{self.end}) reads {span_text!r}, not {self.mention!r}"
            )


@dataclass
class WikiMapping:
    """Wikipedia title (underscored) -> Wikidata Q-id table."""

    table: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        for title, qid in self.table.items():
            if not _QID_RE.match(qid):
                raise ValueError(f"mapping for {title!r} is not a Q-id: {qid!r}")

    def lookup(self, title: str) -> str | None:
        return self.table.get(title.replace(" ", "_"))


def load_wikimapping(path: str) -> WikiMapping:
    """Load a sorted two-column TSV (``title<TAB>QID``) into memory."""
    table = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected 'title<TAB>QID'")
            table[parts[0]] = parts[1]
    return WikiMapping(table=table)


def _resolve_overlaps(annotations: list[Annotation]) -> list[Annotation]:
    """Drop overlapping spans, keeping the higher-confidence one; sort by start."""
    kept: list[Annotation] = []
    ranked = sorted(
        annotations, key=lambda a: (-(a.confidence if a.confidence is not None else 0.0), a.start)
    )
    for ann in ranked:
        if all(ann.end <= other.start or ann.start >= other.end for other in kept):
            kept.append(ann)
    return sorted(kept, key=lambda a: a.start)


def annotate_rel(
    question: str,
    endpoint: str,
    auth: str | None = None,
    timeout: float = 30.0,
    session: requests.Session | None = None,
) -> list[Annotation]:
    """Annotate with a REL-style endpoint; targets are Wikipedia titles.

    The wire format is ``{"text": ...}`` in, rows of
    ``[start, length, mention, wikipedia_title, confidence, ...]`` out.
    """
    if not question:
        raise ValueError("question must be non-empty")
    headers = {}
    if auth:
        headers["Authorization"] = auth
    try:
        response = (session or requests).post(
            endpoint, json={"text": question}, headers=headers, timeout=timeout
        )
    except requests.RequestException as exc:
        raise TransportError(f"entity-linking endpoint unreachable: {exc}") from exc
    if response.status_code in (401, 403):
        raise AuthenticationError(
            f"entity-linking endpoint rejected the request ({response.status_code}); "
            "pass an authorization token"
        )
    if response.status_code != 200:
        raise TransportError(f"entity-linking endpoint answered {response.status_code}")
    try:
        rows = response.json()
        annotations = []
        for row in rows:
            start, length, mention, title = row[0], row[1], row[2], row[3]
            confidence = float(row[4]) if len(row) > 4 and row[4] is not None else None
            annotations.append(
                Annotation(
                    start=int(start),
                    end=int(start) + int(length),
                    mention=str(mention),
                    target_id=str(title),
                    target_name=str(title),
                    confidence=confidence,
                )
            )
    except (ValueError, TypeError, IndexError, KeyError) as exc:
        raise ProtocolError(f"unparseable entity-linking response: {exc}") from exc
    for ann in annotations:
        ann.check_against(question)
    return _resolve_overlaps(annotations)


def map_to_wikidata(
    annotations: list[Annotation], mapping: WikiMapping
) -> tuple[list[Annotation], int]:
    """Rewrite Wikipedia-title targets to Q-ids; unmapped annotations are
    dropped and counted, never an error."""
    mapped = []
    dropped = 0
    for ann in annotations:
        qid = mapping.lookup(ann.target_id)
        if qid is None:
            dropped += 1
            logger.debug("no Wikidata mapping for title %r; dropping", ann.target_id)
            continue
        mapped.append(
            Annotation(
                start=ann.start,
                end=ann.end,
                mention=ann.mention,
                target_id=qid,
                target_name=ann.target_name,
                confidence=ann.confidence,
            )
        )
    return mapped, dropped


def annotate_spotlight(
    question: str,
    endpoint: str,
    confidence_threshold: float = 0.5,
    entity_prefix: str = "http://dbpedia.org/resource/",
    timeout: float = 30.0,
    session: requests.Session | None = None,
) -> list[Annotation]:
    """Annotate with a Spotlight-style endpoint; targets are DBpedia resources
    shortened by the entity prefix, filtered by the confidence threshold."""
    if not question:
        raise ValueError("question must be non-empty")
    if not 0 <= confidence_threshold <= 1:
        raise ValueError("confidence_threshold must be in [0, 1]")
    try:
        response = (session or requests).post(
            endpoint,
            data={"text": question, "confidence": confidence_threshold},
            headers={"Accept": "application/json"},
            timeout=timeout,
        )
    except requests.RequestException as exc:
        raise TransportError(f"entity-linking endpoint unreachable: {exc}") from exc
    if response.status_code in (401, 403):
        raise AuthenticationError(f"entity-linking endpoint rejected the request ({response.status_code})")
    if response.status_code != 200:
        raise TransportError(f"entity-linking endpoint answered {response.status_code}")
    try:
        body = response.json()
        annotations = []
        for resource in body.get("Resources", []):
            confidence = float(resource["@similarityScore"])
            if confidence < confidence_threshold:
                continue
            uri = resource["@URI"]
            start = int(resource["@offset"])
            mention = resource["@surfaceForm"]
            short = uri[len(entity_prefix):] if uri.startswith(entity_prefix) else uri
            annotations.append(
                Annotation(
                    start=start,
                    end=start + len(mention),
                    mention=mention,
                    target_id=short,
                    target_name=short,
                    confidence=confidence,
                )
            )
    except (ValueError, TypeError, KeyError) as exc:
        raise ProtocolError(f"unparseable entity-linking response: {exc}") from exc
    for ann in annotations:
        ann.check_against(question)
    return _resolve_overlaps(annotations)


@dataclass
class LinkerConfig:
    kind: str  # "rel" or "spotlight"
    endpoint: str
    authorization: str | None = None
    mapping: WikiMapping | None = None
    confidence_threshold: float = 0.5
    timeout: float = 30.0
    jobs: int = 4
    entity_prefix: str = "http://dbpedia.org/resource/"

    @classmethod
    def for_profile(cls, profile: KnowledgeGraphProfile, endpoint: str, **kwargs) -> "LinkerConfig":
        kind = "spotlight" if profile.name == "dbpedia" else "rel"
        return cls(kind=kind, endpoint=endpoint, entity_prefix=profile.entity_prefix, **kwargs)


@dataclass
class LinkReport:
    records: list[QuestionRecord]
    dropped: int = 0
    errors: int = 0


def _annotate(question: str, config: LinkerConfig) -> tuple[list[Annotation], int]:
    if config.kind == "spotlight":
        return (
            annotate_spotlight(
                question,
                config.endpoint,
                config.confidence_threshold,
                entity_prefix=config.entity_prefix,
                timeout=config.timeout,
            ),
            0,
        )
    annotations = annotate_rel(question, config.endpoint, config.authorization, config.timeout)
    if config.mapping is not None:
        return map_to_wikidata(annotations, config.mapping)
    return annotations, 0


def link_records(records: list[QuestionRecord], config: LinkerConfig) -> LinkReport:
    """Annotate a batch of records, filling the three parallel arrays.

    Records are processed concurrently but emitted in input order, one output
    per input. A record with no annotations gets empty arrays; a record whose
    endpoint call fails carries an ``error`` field instead of aborting the
    batch.
    """

    def one(record: QuestionRecord) -> tuple[QuestionRecord, int, int]:
        if not record.question:
            return record.replace(extra={**record.extra, "error": "record has no question"}), 0, 1
        try:
            annotations, dropped = _annotate(record.question, config)
        except Exception as exc:
            logger.warning("linking failed for %r: %s", record.question, exc)
            return record.replace(extra={**record.extra, "error": str(exc)}), 0, 1
        return (
            record.replace(
                question_entities=tuple(a.target_id for a in annotations),
                spans=tuple((a.start, a.end) for a in annotations),
                entity_names=tuple(a.target_name for a in annotations),
            ),
            dropped,
            0,
        )

    with ThreadPoolExecutor(max_workers=max(config.jobs, 1)) as pool:
        results = list(pool.map(one, records))
    report = LinkReport(records=[r for r, _, _ in results])
    report.dropped = sum(d for _, d, _ in results)
    report.errors = sum(e for _, _, e in results)
    return report
