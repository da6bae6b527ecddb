"""Domain types and the line-delimited record streams that connect pipeline stages.

Every stage reads and writes UTF-8 JSONL: one object per line, blank lines
skipped, unknown fields preserved verbatim. The types here are immutable value
objects, safe to share across worker threads.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from typing import IO, Any, Iterable, Iterator, Union

from .errors import RecordFormatError

# Separator between the question and previously expanded relation labels in a
# scorer query, and the reserved pseudo-relation that stops expansion.
SEP_TOKEN = "[SEP]"
END_LABEL = "END"

_ID_RE = re.compile(r"^\S+$")


def build_query(question: str, relation_labels: Iterable[str]) -> str:
    """Concatenate a question with prior relation labels into a scorer query.

    The empty prefix yields ``"<question> [SEP]"``; each label is appended
    with a single space.
    """
    query = f"{question} {SEP_TOKEN}"
    for label in relation_labels:
        query += f" {label}"
    return query


def _check_ids(ids: Iterable[str], what: str) -> tuple[str, ...]:
    out = tuple(ids)
    for i in out:
        if not isinstance(i, str) or not _ID_RE.match(i):
            raise ValueError(f"{what} must be non-empty strings without whitespace, got {i!r}")
    return out


@dataclass(frozen=True)
class QuestionRecord:
    """One dataset sample flowing through the pipeline.

    All fields except ``extra`` may be absent (None). ``extra`` holds unknown
    input fields, re-emitted verbatim on write. When ``id`` is absent the
    0-based line index is the sample identity.
    """

    id: str | None = None
    question: str | None = None
    question_entities: tuple[str, ...] | None = None
    spans: tuple[tuple[int, int], ...] | None = None
    entity_names: tuple[str, ...] | None = None
    answer_entities: tuple[str, ...] | None = None
    extra: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.question_entities is not None:
            object.__setattr__(
                self, "question_entities", _check_ids(self.question_entities, "question_entities")
            )
        if self.answer_entities is not None:
            object.__setattr__(
                self, "answer_entities", _check_ids(self.answer_entities, "answer_entities")
            )
        if self.spans is not None:
            spans = tuple((int(s), int(e)) for s, e in self.spans)
            object.__setattr__(self, "spans", spans)
            if self.question_entities is None or len(spans) != len(self.question_entities):
                raise ValueError("spans must align one-to-one with question_entities")
            for start, end in spans:
                if not 0 <= start < end:
                    raise ValueError(f"span [{start},{end}) is not a valid character range")
                if self.question is not None and end > len(self.question):
                    raise ValueError(f"span [{start},{end}) exceeds question length")

    def replace(self, **changes) -> "QuestionRecord":
        fields = {
            "id": self.id,
            "question": self.question,
            "question_entities": self.question_entities,
            "spans": self.spans,
            "entity_names": self.entity_names,
            "answer_entities": self.answer_entities,
            "extra": dict(self.extra),
        }
        fields.update(changes)
        return QuestionRecord(**fields)

    def to_json_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {}
        if self.id is not None:
            out["id"] = self.id
        if self.question is not None:
            out["question"] = self.question
        if self.question_entities is not None:
            out["question_entities"] = list(self.question_entities)
        if self.spans is not None:
            out["spans"] = [list(s) for s in self.spans]
        if self.entity_names is not None:
            out["entity_names"] = list(self.entity_names)
        if self.answer_entities is not None:
            out["answer_entities"] = list(self.answer_entities)
        out.update(self.extra)
        return out


@dataclass(frozen=True)
class ExpansionPath:
    """An ordered relation sequence with its cumulative log-probability.

    ``relations`` never contains the reserved END label; choosing END sets
    ``terminated`` instead. The empty path scores exactly 0.
    """

    relations: tuple[str, ...] = ()
    terminated: bool = False
    log_score: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "relations", _check_ids(self.relations, "relations"))
        if END_LABEL in self.relations:
            raise ValueError(f"relations must not contain the reserved {END_LABEL} token")
        if not math.isfinite(self.log_score):
            raise ValueError("log_score must be finite")
        if self.log_score > 1e-9:
            raise ValueError("log_score is a sum of log-probabilities and cannot be positive")
        if not self.relations and not self.terminated and self.log_score != 0.0:
            raise ValueError("the empty path has log_score 0")

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "relations": list(self.relations),
            "log_score": self.log_score,
            "terminated": self.terminated,
        }


@dataclass(frozen=True)
class Subgraph:
    """A duplicate-free collection of (subject, predicate, object) ID triples.

    Triples keep their construction order so files round-trip byte-stably.
    """

    triples: tuple[tuple[str, str, str], ...] = ()

    def __post_init__(self):
        seen = set()
        cleaned = []
        for t in self.triples:
            s, p, o = t
            for part in (s, p, o):
                if not part or not isinstance(part, str):
                    raise ValueError(f"triple {t!r} has an empty position")
            key = (s, p, o)
            if key in seen:
                continue
            seen.add(key)
            cleaned.append(key)
        object.__setattr__(self, "triples", tuple(cleaned))

    def __len__(self) -> int:
        return len(self.triples)

    def as_set(self) -> frozenset[tuple[str, str, str]]:
        return frozenset(self.triples)

    def entities(self) -> set[str]:
        """Distinct subjects and objects."""
        out: set[str] = set()
        for s, _, o in self.triples:
            out.add(s)
            out.add(o)
        return out

    def predicates(self) -> set[str]:
        return {p for _, p, _ in self.triples}

    def to_json_dict(self) -> dict[str, Any]:
        return {"triples": [list(t) for t in self.triples]}


@dataclass(frozen=True)
class TrainSample:
    """One scorer training unit: a query, its positive relation label, and negatives."""

    query: str
    positive: str
    negatives: tuple[str, ...] = ()

    def __post_init__(self):
        negatives = tuple(self.negatives)
        object.__setattr__(self, "negatives", negatives)
        if len(set(negatives)) != len(negatives):
            raise ValueError("negatives must not contain duplicates")
        if self.positive in negatives:
            raise ValueError("the positive label must not appear among the negatives")

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "query": self.query,
            "positive": self.positive,
            "negatives": list(self.negatives),
        }


@dataclass(frozen=True)
class RetrievalResult:
    """A record joined with its retrieved paths and materialized subgraph."""

    record: QuestionRecord
    paths: tuple[ExpansionPath, ...] = ()
    subgraph: Subgraph = Subgraph()
    include_paths: bool = False

    def to_json_dict(self) -> dict[str, Any]:
        out = self.record.to_json_dict()
        out["triples"] = [list(t) for t in self.subgraph.triples]
        if self.include_paths:
            out["paths"] = [p.to_json_dict() for p in self.paths]
        return out


Writable = Union[QuestionRecord, RetrievalResult, TrainSample, Subgraph, ExpansionPath]

_KNOWN_FIELDS = {
    "id": str,
    "question": str,
    "question_entities": list,
    "spans": list,
    "entity_names": list,
    "answer_entities": list,
}


def record_from_json_dict(obj: dict[str, Any]) -> QuestionRecord:
    """Build a QuestionRecord from a parsed JSON object, keeping unknown fields.

    Absent and null known fields are treated identically (absent).
    """
    kwargs: dict[str, Any] = {}
    extra: dict[str, Any] = {}
    for key, value in obj.items():
        if key in _KNOWN_FIELDS:
            if value is None:
                continue
            if not isinstance(value, _KNOWN_FIELDS[key]):
                raise RecordFormatError(
                    f"field {key!r} must be a {_KNOWN_FIELDS[key].__name__}, got {type(value).__name__}"
                )
            kwargs[key] = value
        else:
            extra[key] = value
    try:
        return QuestionRecord(
            id=kwargs.get("id"),
            question=kwargs.get("question"),
            question_entities=tuple(kwargs["question_entities"]) if "question_entities" in kwargs else None,
            spans=tuple((s[0], s[1]) for s in kwargs["spans"]) if "spans" in kwargs else None,
            entity_names=tuple(kwargs["entity_names"]) if "entity_names" in kwargs else None,
            answer_entities=tuple(kwargs["answer_entities"]) if "answer_entities" in kwargs else None,
            extra=extra,
        )
    except (TypeError, IndexError, ValueError) as exc:
        raise RecordFormatError(str(exc)) from exc


def read_records(stream: Iterable[str | bytes]) -> Iterator[QuestionRecord]:
    """Lazily parse one QuestionRecord per non-blank line of a UTF-8 stream.

    Raises RecordFormatError naming the 1-based line number on malformed JSON
    and the offending field on a type mismatch.
    """
    for lineno, raw in enumerate(stream, start=1):
        line = raw.decode("utf-8") if isinstance(raw, bytes) else raw
        line = line.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise RecordFormatError(f"line {lineno}: malformed JSON ({exc.msg})") from exc
        if not isinstance(obj, dict):
            raise RecordFormatError(f"line {lineno}: expected a JSON object")
        try:
            yield record_from_json_dict(obj)
        except RecordFormatError as exc:
            raise RecordFormatError(f"line {lineno}: {exc}") from exc


def write_records(records: Iterable[Writable | dict], stream: IO) -> int:
    """Write one JSON object per record in input order; returns bytes written.

    Accepts anything with ``to_json_dict`` or a plain dict. Re-reading the
    output yields structurally equal records.
    """
    total = 0
    for rec in records:
        obj = rec.to_json_dict() if hasattr(rec, "to_json_dict") else rec
        try:
            line = json.dumps(obj, ensure_ascii=False) + "\n"
            data = line.encode("utf-8")
        except (TypeError, ValueError, UnicodeEncodeError) as exc:
            raise RecordFormatError(f"record not serializable: {exc}") from exc
        try:
            stream.write(line)
        except TypeError:
            stream.write(data)
        total += len(data)
    return total
