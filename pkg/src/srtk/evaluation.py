"""Retrieval quality measurement: answer coverage rate and mean subgraph size."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from typing import Callable, Iterable

from .records import QuestionRecord, RetrievalResult, Subgraph

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EvalReport:
    covered: int
    total: int
    coverage_rate: float
    avg_triples: float
    failures: int = 0


def is_covered(subgraph: Subgraph, answers: Iterable[str]) -> bool:
    """True iff any answer entity appears as a subject or object of any triple."""
    answers = set(answers)
    if not answers:
        raise ValueError("answers must be non-empty")
    for s, _, o in subgraph.triples:
        if s in answers or o in answers:
            return True
    return False


def evaluate(
    records: Iterable[QuestionRecord],
    retriever: Callable[[QuestionRecord], RetrievalResult],
) -> EvalReport:
    """Run retrieval over every record and tally coverage and subgraph size.

    A record whose retrieval raises counts as not covered with zero triples
    and is tallied separately; every record counts in the denominator.
    """
    covered = 0
    total = 0
    failures = 0
    triple_counts: list[int] = []
    for record in records:
        total += 1
        try:
            result = retriever(record)
        except Exception as exc:  # per-record failure, never aborts the run
            logger.warning("retrieval failed for record %d: %s", total - 1, exc)
            failures += 1
            triple_counts.append(0)
            continue
        triple_counts.append(len(result.subgraph))
        if record.answer_entities and is_covered(result.subgraph, record.answer_entities):
            covered += 1
    rate = covered / total if total else 0.0
    avg = sum(triple_counts) / total if total else 0.0
    return EvalReport(
        covered=covered, total=total, coverage_rate=rate, avg_triples=avg, failures=failures
    )


def _round4(value: Decimal) -> str:
    return str(value.quantize(Decimal("0.0001"), rounding=ROUND_HALF_UP))


def format_report(report: EvalReport) -> str:
    """The two report lines, with rates rounded half-up to four decimals."""
    if report.total:
        rate = _round4(Decimal(report.covered) / Decimal(report.total))
    else:
        rate = "0.0000"
    avg = _round4(Decimal(str(report.avg_triples)))
    return (
        f"Answer coverage rate: {rate} ({report.covered} / {report.total})\n"
        f"Average subgraph size: {avg} triples"
    )
