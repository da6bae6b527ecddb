"""Subcommand front-end: link, preprocess, retrieve, visualize.

Exit codes: 0 on full success, 1 when some records failed but processing
completed (failures are embedded per record or reported on stderr), 2 on a
configuration error (nothing written). Progress goes to stderr, reports to
stdout.
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ThreadPoolExecutor

from tqdm import tqdm

from .errors import ConfigurationError, SrtkError
from .evaluation import evaluate, format_report
from .expansion import materialize_subgraph, retrieve_paths
from .kg.sparql import SparqlKnowledgeSource
from .linking import LinkerConfig, link_records, load_wikimapping
from .preprocess import generate_samples
from .profiles import resolve_profile
from .records import (
    QuestionRecord,
    RetrievalResult,
    Subgraph,
    read_records,
    write_records,
)
from .scoring import resolve_scorer
from .visualization import build_graph_document, render_html

AUTH_ENV_VAR = "SRTK_AUTHORIZATION"


def _progress(iterable, desc: str, total: int | None = None):
    return tqdm(iterable, desc=desc, total=total, file=sys.stderr, leave=False,
                disable=not sys.stderr.isatty())


def _load_records(path: str) -> list[QuestionRecord]:
    with open(path, encoding="utf-8") as fh:
        return list(read_records(fh))


def _add_common(parser: argparse.ArgumentParser, output: bool = True):
    parser.add_argument("--input", required=True, help="input .jsonl file")
    if output:
        parser.add_argument("--output", required=True, help="output .jsonl file")
    parser.add_argument(
        "--knowledge-graph",
        default="wikidata",
        help="built-in name (wikidata, freebase, dbpedia, custom) or profile JSON path",
    )
    parser.add_argument("--jobs", type=int, default=4, help="record-level worker threads")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="srtk", description="Semantic-relevant subgraph retrieval toolkit"
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    link = sub.add_parser("link", help="link entity mentions in questions to the knowledge graph")
    _add_common(link)
    link.add_argument("--el-endpoint", required=True, help="entity-linking service URL")
    link.add_argument("--wikimapper-db", help="title<TAB>QID TSV mapping Wikipedia to Wikidata")
    link.add_argument("--authorization", help=f"auth token (or set {AUTH_ENV_VAR})")
    link.add_argument("--confidence", type=float, default=0.5,
                      help="minimum linker confidence (Spotlight-style endpoints)")

    pre = sub.add_parser("preprocess", help="generate scorer training samples")
    _add_common(pre)
    pre.add_argument("--sparql-endpoint", help="SPARQL endpoint override")
    pre.add_argument("--metric", choices=["jaccard"], default="jaccard",
                     help="path-agreement metric")
    pre.add_argument("--num-negative", type=int, default=2,
                     help="negative relations per positive")
    pre.add_argument("--search-path", action="store_true",
                     help="search paths between question and answer entities (weak supervision)")
    pre.add_argument("--threshold", type=float, default=0.5,
                     help="minimum path agreement to keep")
    pre.add_argument("--seed", type=int, default=0, help="negative-sampling seed")

    ret = sub.add_parser("retrieve", help="retrieve subgraphs for linked questions")
    ret.add_argument("--input", required=True, help="input .jsonl file")
    ret.add_argument("--output", help="output .jsonl file")
    ret.add_argument(
        "--knowledge-graph",
        default="wikidata",
        help="built-in name (wikidata, freebase, dbpedia, custom) or profile JSON path",
    )
    ret.add_argument("--jobs", type=int, default=4, help="record-level worker threads")
    ret.add_argument("--sparql-endpoint", help="SPARQL endpoint override")
    ret.add_argument("--scorer", "--scorer-model-path", dest="scorer", required=True,
                     help="'lexical' or an embedding endpoint URL")
    ret.add_argument("--beam-width", type=int, default=2, help="paths kept per expansion step")
    ret.add_argument("--max-depth", type=int, default=2, help="maximum hops to expand")
    ret.add_argument("--evaluate", action="store_true",
                     help="report answer coverage rate and average subgraph size")
    ret.add_argument("--include-paths", action="store_true",
                     help="write expansion paths next to the triples")

    vis = sub.add_parser("visualize", help="render retrieved subgraphs as interactive HTML")
    vis.add_argument("--input", required=True, help="input .jsonl file with triples")
    vis.add_argument("--output-dir", required=True, help="directory for one HTML file per record")
    vis.add_argument(
        "--knowledge-graph",
        default="wikidata",
        help="built-in name (wikidata, freebase, dbpedia, custom) or profile JSON path",
    )
    vis.add_argument("--sparql-endpoint", help="SPARQL endpoint override")
    vis.add_argument("--jobs", type=int, default=4, help="record-level worker threads")

    sub.add_parser("train", help="train a path scorer (ships separately)",
                   add_help=False)
    return parser


def _cmd_link(args) -> int:
    profile = resolve_profile(args.knowledge_graph)
    mapping = None
    if args.wikimapper_db:
        mapping = load_wikimapping(args.wikimapper_db)
    elif profile.name == "wikidata":
        raise ConfigurationError(
            "linking to wikidata needs --wikimapper-db (Wikipedia title to Q-id table)"
        )
    config = LinkerConfig.for_profile(
        profile,
        endpoint=args.el_endpoint,
        authorization=args.authorization or os.environ.get(AUTH_ENV_VAR),
        mapping=mapping,
        confidence_threshold=args.confidence,
        jobs=args.jobs,
    )
    records = _load_records(args.input)
    report = link_records(records, config)
    with open(args.output, "w", encoding="utf-8") as fh:
        write_records(report.records, fh)
    print(
        f"link: {len(report.records)} records, {report.dropped} unmapped annotations dropped, "
        f"{report.errors} errors",
        file=sys.stderr,
    )
    return 1 if report.errors else 0


def _cmd_preprocess(args) -> int:
    profile = resolve_profile(args.knowledge_graph, args.sparql_endpoint)
    source = SparqlKnowledgeSource(profile)
    records = _load_records(args.input)

    def one(indexed) -> tuple[list, str | None]:
        index, record = indexed
        try:
            return (
                generate_samples(
                    record,
                    source,
                    threshold=args.threshold,
                    num_negative=args.num_negative,
                    seed=args.seed,
                    search_paths=args.search_path,
                    record_index=index,
                ),
                None,
            )
        except Exception as exc:
            return [], f"record {index}: {exc}"

    with ThreadPoolExecutor(max_workers=max(args.jobs, 1)) as pool:
        outcomes = list(
            _progress(pool.map(one, enumerate(records)), "preprocess", total=len(records))
        )
    errors = [message for _, message in outcomes if message]
    samples = [sample for batch, _ in outcomes for sample in batch]
    with open(args.output, "w", encoding="utf-8") as fh:
        write_records(samples, fh)
    for message in errors:
        print(f"preprocess: {message}", file=sys.stderr)
    print(
        f"preprocess: {len(samples)} samples from {len(records)} records, {len(errors)} errors",
        file=sys.stderr,
    )
    return 1 if errors else 0


def _cmd_retrieve(args) -> int:
    if not args.output and not args.evaluate:
        raise ConfigurationError("retrieve needs --output, --evaluate, or both")
    if args.beam_width < 1:
        raise ConfigurationError("--beam-width must be >= 1")
    if args.max_depth < 0:
        raise ConfigurationError("--max-depth must be >= 0")
    profile = resolve_profile(args.knowledge_graph, args.sparql_endpoint)
    source = SparqlKnowledgeSource(profile)
    scorer = resolve_scorer(args.scorer)
    records = _load_records(args.input)

    def one(record: QuestionRecord):
        if record.question is None:
            raise SrtkError("record has no question text")
        entities = set(record.question_entities or ())
        paths = retrieve_paths(
            record.question, entities, scorer, source,
            beam_width=args.beam_width, max_depth=args.max_depth,
        )
        subgraph = materialize_subgraph(entities, paths, source)
        return RetrievalResult(
            record=record, paths=tuple(paths), subgraph=subgraph,
            include_paths=args.include_paths,
        )

    def guarded(record: QuestionRecord):
        try:
            return one(record)
        except Exception as exc:
            return exc

    with ThreadPoolExecutor(max_workers=max(args.jobs, 1)) as pool:
        outcomes = list(_progress(pool.map(guarded, records), "retrieve", total=len(records)))

    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            lines = []
            for record, outcome in zip(records, outcomes):
                if isinstance(outcome, Exception):
                    line = record.to_json_dict()
                    line["error"] = str(outcome)
                    line["triples"] = []
                    lines.append(line)
                else:
                    lines.append(outcome.to_json_dict())
            write_records(lines, fh)

    failures = sum(1 for o in outcomes if isinstance(o, Exception))
    if args.evaluate:
        replay = iter(outcomes)

        def retriever(record: QuestionRecord) -> RetrievalResult:
            outcome = next(replay)
            if isinstance(outcome, Exception):
                raise outcome
            return outcome

        print(format_report(evaluate(records, retriever)))
    for record, outcome in zip(records, outcomes):
        if isinstance(outcome, Exception):
            print(f"retrieve: record {record.id or '?'}: {outcome}", file=sys.stderr)
    print(
        f"retrieve: {len(records)} records, {failures} errors",
        file=sys.stderr,
    )
    return 1 if failures else 0


def _cmd_visualize(args) -> int:
    profile = resolve_profile(args.knowledge_graph, args.sparql_endpoint)
    source = SparqlKnowledgeSource(profile)
    records = _load_records(args.input)
    os.makedirs(args.output_dir, exist_ok=True)

    def one(indexed) -> str | None:
        index, record = indexed
        raw = record.extra.get("triples")
        if raw is None:
            return f"record {index}: no triples field"
        try:
            subgraph = Subgraph(triples=tuple((s, p, o) for s, p, o in raw))
            ids = subgraph.entities() | subgraph.predicates()
            labels = source.fetch_labels(ids) if ids else {}
            doc = build_graph_document(
                RetrievalResult(record=record, subgraph=subgraph), labels
            )
            html = render_html(doc)
        except ConfigurationError:
            raise
        except Exception as exc:
            return f"record {index}: {exc}"
        name = record.id if record.id is not None else str(index)
        with open(os.path.join(args.output_dir, f"{name}.html"), "w", encoding="utf-8") as fh:
            fh.write(html)
        return None

    with ThreadPoolExecutor(max_workers=max(args.jobs, 1)) as pool:
        outcomes = list(
            _progress(pool.map(one, enumerate(records)), "visualize", total=len(records))
        )
    errors = [message for message in outcomes if message]
    for message in errors:
        print(f"visualize: {message}", file=sys.stderr)
    print(
        f"visualize: {len(records) - len(errors)} pages written to {args.output_dir}, "
        f"{len(errors)} errors",
        file=sys.stderr,
    )
    return 1 if errors else 0


_COMMANDS = {
    "link": _cmd_link,
    "preprocess": _cmd_preprocess,
    "retrieve": _cmd_retrieve,
    "visualize": _cmd_visualize,
}


def run(argv: list[str]) -> int:
    parser = build_parser()
    try:
        args, unknown = parser.parse_known_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    if args.subcommand == "train":
        print(
            "srtk train is not part of this package: install the scorer trainer and run "
            "srtk-train / srtk-serve, then pass the served endpoint via --scorer",
            file=sys.stderr,
        )
        return 2
    if unknown:
        print(f"srtk {args.subcommand}: unknown arguments: {' '.join(unknown)}", file=sys.stderr)
        return 2
    try:
        return _COMMANDS[args.subcommand](args)
    except ConfigurationError as exc:
        print(f"srtk {args.subcommand}: {exc}", file=sys.stderr)
        return 2
    except SrtkError as exc:
        print(f"srtk {args.subcommand}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"srtk {args.subcommand}: {exc}", file=sys.stderr)
        return 2


def main():
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
