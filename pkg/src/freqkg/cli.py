"""Command-line interface: mine rules, benchmark, generate data, build graphs.

Exit codes: 0 on success, 1 for argument/usage problems (including a
benchmark result mismatch), 2 for unreadable or malformed data files.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .apriori import mine_apriori
from .bench import ResultMismatchError, run_benchmark
from .fpgrowth import mine_fpgrowth
from .kgraph import (
    PropertyGraph,
    apply_aliases,
    export_dot,
    export_graphml,
    ingest_triples,
    load_graph,
    parse_aliases,
    parse_triples,
    query_neighbors,
    rules_to_graph,
    save_graph,
)
from .rules import (
    derive_rules,
    filter_by_rule_size,
    parse_rules_json,
    rank_rules,
    render_rules_table,
    rules_to_json,
)
from .txdb import (
    MiningConfig,
    ParseError,
    generate_synthetic,
    parse_planted_rules_json,
    parse_transactions_csv,
    serialize_transactions_csv,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2

THREADS_ENV_VAR = "FREQKG_THREADS"


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage problems; this tool reserves 2 for
    # data errors, so remap
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _threshold(text: str) -> float:
    raw = text.strip()
    try:
        value = float(raw[:-1]) / 100.0 if raw.endswith("%") else float(raw)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not 0.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError(
            f"threshold {text!r} is outside the range [0, 1] (percent forms like '1%' are accepted)"
        )
    return value


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {text}")
    return value


def _nonnegative_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {text}")
    return value


def _default_threads() -> int:
    raw = os.environ.get(THREADS_ENV_VAR, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _write_output(path: Path | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        path.write_text(text, encoding="utf-8")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="freqkg", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    mine = sub.add_parser("mine", help="mine association rules from a transactions CSV")
    mine.add_argument("csv_path", type=Path)
    mine.add_argument("--min-support", type=_threshold, default=0.01)
    mine.add_argument("--min-confidence", type=_threshold, default=0.6)
    mine.add_argument("--algorithm", choices=("fpgrowth", "apriori"), default="fpgrowth")
    mine.add_argument("--max-rule-size", type=_positive_int, default=None,
                      help="keep only rules with at most this many items per side")
    mine.add_argument("--max-itemset-size", type=_positive_int, default=None)
    mine.add_argument("--out", type=Path, default=None)
    mine.add_argument("--format", choices=("json", "table"), default="table")
    mine.add_argument("--threads", type=_positive_int, default=_default_threads())
    mine.set_defaults(handler=_cmd_mine)

    bench = sub.add_parser("bench", help="compare miner wall times on the same data")
    bench.add_argument("csv_path", type=Path, nargs="?")
    bench.add_argument("--synthetic", type=Path, default=None,
                       help="planted-rules JSON spec to generate data from")
    bench.add_argument("--n", type=_positive_int, default=10000)
    bench.add_argument("--noise-items", type=_nonnegative_int, default=10)
    bench.add_argument("--seed", type=int, default=0)
    bench.add_argument("--min-support", type=_threshold, default=0.01)
    bench.add_argument("--min-confidence", type=_threshold, default=0.6)
    bench.add_argument("--reps", type=_positive_int, default=3)
    bench.add_argument("--json", action="store_true", help="print the report as JSON")
    bench.set_defaults(handler=_cmd_bench)

    gen = sub.add_parser("gen", help="generate a synthetic transactions CSV")
    gen.add_argument("--rules", type=Path, required=True, help="planted-rules JSON spec")
    gen.add_argument("--n", type=_positive_int, required=True)
    gen.add_argument("--noise-items", type=_nonnegative_int, default=0)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", type=Path, required=True)
    gen.set_defaults(handler=_cmd_gen)

    kg = sub.add_parser("kg", help="build, query, or export the knowledge graph")
    kg_sub = kg.add_subparsers(dest="kg_command", required=True, parser_class=_Parser)

    build = kg_sub.add_parser("build", help="build a graph from triples and optional rules")
    build.add_argument("--triples", type=Path, required=True)
    build.add_argument("--rules", type=Path, default=None, help="rules JSON from 'mine --format json'")
    build.add_argument("--aliases", type=Path, default=None,
                       help="tab-separated name merges applied before ingestion")
    build.add_argument("--graph", type=Path, required=True, help="output graph JSON path")
    build.set_defaults(handler=_cmd_kg_build)

    query = kg_sub.add_parser("query", help="print the neighborhood of a node as triples")
    query.add_argument("--graph", type=Path, required=True)
    query.add_argument("--start", required=True, help="node as 'Label:Name'")
    query.add_argument("--depth", type=_nonnegative_int, default=1)
    query.add_argument("--label", action="append", default=None,
                       help="restrict expansion to these node labels (repeatable)")
    query.add_argument("--relation", action="append", default=None,
                       help="restrict traversal to these relations (repeatable)")
    query.set_defaults(handler=_cmd_kg_query)

    export = kg_sub.add_parser("export", help="export a graph for visualization")
    export.add_argument("--graph", type=Path, required=True)
    export.add_argument("--format", choices=("dot", "graphml"), required=True)
    export.add_argument("--out", type=Path, required=True)
    export.set_defaults(handler=_cmd_kg_export)

    return parser


def _cmd_mine(args) -> int:
    db = parse_transactions_csv(args.csv_path.read_text(encoding="utf-8"))
    config = MiningConfig(args.min_support, args.min_confidence, args.max_itemset_size)
    if args.algorithm == "fpgrowth":
        frequent = mine_fpgrowth(db, config, threads=args.threads)
    else:
        frequent = mine_apriori(db, config)
    ranked = rank_rules(derive_rules(frequent, config, db.n, db.item_names))
    if args.max_rule_size is not None:
        ranked = filter_by_rule_size(ranked, args.max_rule_size)
    text = rules_to_json(ranked) if args.format == "json" else render_rules_table(ranked)
    _write_output(args.out, text)
    return EXIT_OK


def _cmd_bench(args) -> int:
    if (args.csv_path is None) == (args.synthetic is None):
        raise ValueError("bench needs either a CSV path or --synthetic, not both")
    if args.csv_path is not None:
        db = parse_transactions_csv(args.csv_path.read_text(encoding="utf-8"))
    else:
        spec = parse_planted_rules_json(args.synthetic.read_text(encoding="utf-8"))
        db = generate_synthetic(spec, args.n, args.noise_items, args.seed)
    config = MiningConfig(args.min_support, args.min_confidence)
    report = run_benchmark(db, config, args.reps)
    sys.stdout.write(report.to_json() if args.json else report.to_text())
    return EXIT_OK


def _cmd_gen(args) -> int:
    spec = parse_planted_rules_json(args.rules.read_text(encoding="utf-8"))
    db = generate_synthetic(spec, args.n, args.noise_items, args.seed)
    _write_output(args.out, serialize_transactions_csv(db))
    return EXIT_OK


def _cmd_kg_build(args) -> int:
    triples = parse_triples(args.triples.read_text(encoding="utf-8"))
    aliases = {}
    if args.aliases is not None:
        aliases = parse_aliases(args.aliases.read_text(encoding="utf-8"))
        triples = apply_aliases(triples, aliases)
    graph = PropertyGraph()
    report = ingest_triples(graph, triples)
    summary = [
        f"triples: {report.nodes_added} nodes, {report.edges_added} edges, "
        f"{report.duplicates_skipped} duplicates skipped"
    ]
    if args.rules is not None:
        records = parse_rules_json(args.rules.read_text(encoding="utf-8"))
        if aliases:
            records = [
                type(r)(
                    antecedent=tuple(aliases.get(x, x) for x in r.antecedent),
                    consequent=tuple(aliases.get(x, x) for x in r.consequent),
                    support=r.support,
                    confidence=r.confidence,
                    lift=r.lift,
                )
                for r in records
            ]
        rule_report = rules_to_graph(graph, records)
        summary.append(
            f"rules: {rule_report.nodes_added} nodes, {rule_report.edges_added} edges, "
            f"{rule_report.duplicates_skipped} updated"
        )
    args.graph.write_text(save_graph(graph), encoding="utf-8")
    summary.append(f"graph: {graph.node_count} nodes, {graph.edge_count} edges -> {args.graph}")
    sys.stdout.write("\n".join(summary) + "\n")
    return EXIT_OK


def _parse_start(text: str) -> tuple[str, str]:
    label, sep, name = text.partition(":")
    if not sep or not label.strip() or not name.strip():
        raise ValueError(f"--start must look like 'Label:Name', got {text!r}")
    return label.strip(), name.strip()


def _cmd_kg_query(args) -> int:
    graph = load_graph(args.graph.read_text(encoding="utf-8"))
    start = _parse_start(args.start)
    subgraph = query_neighbors(
        graph, start, args.depth, label_filter=args.label, relation_filter=args.relation
    )
    lines = [f"# node\t{node.label.value}\t{node.name}" for node in subgraph.nodes()]
    for edge in subgraph.edges():
        lines.append(
            f"{edge.source[1]}\t{edge.relation}\t{edge.target[1]}\t{edge.source[0]}\t{edge.target[0]}"
        )
    sys.stdout.write("\n".join(lines) + "\n")
    return EXIT_OK


def _cmd_kg_export(args) -> int:
    graph = load_graph(args.graph.read_text(encoding="utf-8"))
    text = export_dot(graph) if args.format == "dot" else export_graphml(graph)
    args.out.write_text(text, encoding="utf-8")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except ParseError as err:
        print(f"freqkg: data error: {err}", file=sys.stderr)
        return EXIT_DATA
    except OSError as err:
        print(f"freqkg: cannot read or write: {err}", file=sys.stderr)
        return EXIT_DATA
    except ResultMismatchError as err:
        print(f"freqkg: {err}", file=sys.stderr)
        return EXIT_USAGE
    except KeyError as err:
        detail = err.args[0] if err.args else err
        print(f"freqkg: error: {detail}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as err:
        print(f"freqkg: error: {err}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
