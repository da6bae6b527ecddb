"""Desk-scale verification assets: planted-path instances and oracles.

A planted instance is a random graph where every record has one known-good
relation path from its question entity to its answers, with distractor
relations at every hop. The oracle scorer recognizes gold prefixes and points
at the gold next step, so retrieval over a planted instance must reach every
answer. The brute-force enumerator ranks every possible expansion outcome
under the same softmax-chain scoring the beam uses, giving an exact reference
ranking for beams wide enough to keep everything.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from ..kg.base import KnowledgeSource
from ..kg.memory import TripleStoreFixture
from ..records import END_LABEL, ExpansionPath, QuestionRecord, build_query
from ..scoring import ScoredCandidates, ScoreRequest, Scorer, softmax_log_probs


@dataclass(frozen=True)
class PlantedInstance:
    graph: TripleStoreFixture
    records: list[QuestionRecord]
    gold_paths: dict[str, tuple[str, ...]] = field(default_factory=dict)  # record id -> path


def generate_planted(
    seed: int, n_records: int, max_hop: int = 2, branching: int = 3
) -> PlantedInstance:
    """Build a planted instance: per record one gold chain of 1..max_hop hops,
    each hop decorated with ``branching - 1`` distractor relations.

    The question mentions the gold relation ids in order, so both the oracle
    and lexical scorers (and a trained scorer) can find the path. Deterministic
    under the seed.
    """
    if max_hop not in (1, 2, 3):
        raise ValueError("max_hop must be 1, 2, or 3")
    if branching < 2:
        raise ValueError("branching must be >= 2")
    rng = random.Random(seed)
    triples: set[tuple[str, str, str]] = set()
    records: list[QuestionRecord] = []
    gold_paths: dict[str, tuple[str, ...]] = {}
    for i in range(n_records):
        hops = rng.randint(1, max_hop)
        chain = [f"E{i}_{j}" for j in range(hops + 1)]
        gold = tuple(f"R{i}_{j}" for j in range(1, hops + 1))
        for j, relation in enumerate(gold):
            triples.add((chain[j], relation, chain[j + 1]))
            for d in range(branching - 1):
                triples.add((chain[j], f"R{i}_{j + 1}d{d}", f"E{i}_{j + 1}d{d}"))
        question = f"what is {' '.join(gold)} of {chain[0]}"
        record = QuestionRecord(
            id=str(i),
            question=question,
            question_entities=(chain[0],),
            answer_entities=(chain[-1],),
        )
        records.append(record)
        gold_paths[record.id] = gold
    return PlantedInstance(
        graph=TripleStoreFixture(triples=frozenset(triples)),
        records=records,
        gold_paths=gold_paths,
    )


class OracleScorer:
    """Scores 1.0 for the gold next relation (END once the gold path is
    exhausted) given a gold prefix, 0.0 for everything else."""

    provenance = "lexical"

    def __init__(self, instance: PlantedInstance):
        self._gold_by_question: dict[str, tuple[str, ...]] = {}
        labels = instance.graph.labels
        for record in instance.records:
            gold = instance.gold_paths[record.id]
            self._gold_by_question[record.question] = tuple(labels.get(r, r) for r in gold)

    def _target_for(self, query: str) -> str | None:
        for question, gold in self._gold_by_question.items():
            prefix = build_query(question, ())
            if not query.startswith(prefix):
                continue
            rest = query[len(prefix):]
            for k in range(len(gold) + 1):
                if rest == "".join(f" {label}" for label in gold[:k]):
                    return gold[k] if k < len(gold) else END_LABEL
        return None

    def score(self, request: ScoreRequest) -> ScoredCandidates:
        target = self._target_for(request.query)
        scores = tuple(1.0 if c == target else 0.0 for c in request.candidates)
        return ScoredCandidates(scores=scores, provenance=self.provenance)


def oracle_scorer(instance: PlantedInstance) -> OracleScorer:
    return OracleScorer(instance)


def brute_force_paths(
    source: KnowledgeSource,
    question: str,
    entities: set[str] | frozenset[str],
    scorer: Scorer,
    max_depth: int,
    temperature: float = 1.0,
) -> list[ExpansionPath]:
    """Enumerate every expansion outcome up to ``max_depth`` and rank exactly.

    An outcome either picked END at some step (terminated) or ran out of depth
    budget; its score is the same cumulative softmax log-probability the beam
    search assigns. Intended for graphs of at most a few dozen nodes.
    """
    if not entities:
        return []
    outcomes: list[ExpansionPath] = []

    def walk(relations: tuple[str, ...], labels: list[str], frontier: frozenset[str],
             log_score: float, depth: int):
        if depth == max_depth:
            outcomes.append(ExpansionPath(relations, False, log_score))
            return
        rels = sorted(source.get_connected_relations(frontier)) if frontier else []
        if not rels:
            outcomes.append(ExpansionPath(relations, True, log_score))
            return
        label_map = source.fetch_labels(set(rels))
        query = build_query(question, labels)
        texts = [label_map[r] for r in rels] + [END_LABEL]
        unique = list(dict.fromkeys(texts))
        scored = scorer.score(ScoreRequest(query=query, candidates=tuple(unique)))
        by_text = dict(zip(unique, scored.scores))
        log_probs = softmax_log_probs([by_text[t] for t in texts], temperature)
        for rel, log_prob in zip(rels, log_probs):
            child_frontier = frozenset(source.get_terminal_entities(frontier, [rel]))
            walk(relations + (rel,), labels + [label_map[rel]], child_frontier,
                 log_score + log_prob, depth + 1)
        outcomes.append(ExpansionPath(relations, True, log_score + log_probs[-1]))

    walk((), [], frozenset(entities), 0.0, 0)
    return sorted(outcomes, key=lambda p: (-p.log_score, p.relations))


class CountingSource(KnowledgeSource):
    """Delegating wrapper that counts calls per operation, for tests that
    assert an operation was never used."""

    def __init__(self, inner: KnowledgeSource):
        super().__init__(inner.profile, result_cap=inner.result_cap)
        self.inner = inner
        self.calls: dict[str, int] = {}

    def _count(self, name: str):
        self.calls[name] = self.calls.get(name, 0) + 1

    def _connected_relations(self, entities):
        self._count("connected_relations")
        return self.inner._connected_relations(entities)

    def _terminal_entities(self, entities, path):
        self._count("terminal_entities")
        return self.inner._terminal_entities(entities, path)

    def _path_probe(self, source, answers, hop):
        self._count("path_probe")
        return self.inner._path_probe(source, answers, hop)

    def _one_hop_edges(self, entities, relation):
        self._count("one_hop_edges")
        return self.inner._one_hop_edges(entities, relation)

    def _labels(self, ids):
        self._count("labels")
        return self.inner._labels(ids)
