"""Frequent-itemset and association-rule mining for equipment-inspection
data, plus an embedded inspection knowledge graph."""

from .apriori import (
    FrequentItemset,
    as_itemsets,
    canonical_counts,
    count_support,
    join_candidates,
    mine_apriori,
    mine_bruteforce,
    prune_candidates,
)
from .bench import BenchReport, ResultMismatchError, run_benchmark
from .fpgrowth import (
    FPNode,
    FPTree,
    PrefixPath,
    build_conditional_tree,
    build_fptree,
    conditional_pattern_base,
    mine_fpgrowth,
    reconstruct_filtered,
)
from .kgraph import (
    Edge,
    IngestReport,
    Node,
    NodeLabel,
    PropertyGraph,
    Triple,
    export_dot,
    export_graphml,
    ingest_triples,
    load_graph,
    parse_triples,
    query_neighbors,
    rules_to_graph,
    save_graph,
)
from .rules import (
    AssociationRule,
    RuleRecord,
    derive_rules,
    filter_by_rule_size,
    parse_rules_json,
    rank_rules,
    render_rules_table,
    rules_to_json,
)
from .rules import confidence, lift, support
from .txdb import (
    DuplicateDeviceWarning,
    GenerationError,
    Item,
    MiningConfig,
    ParseError,
    PlantedRule,
    Transaction,
    TransactionDatabase,
    frequency_order,
    generate_random,
    generate_synthetic,
    item_frequencies,
    normalize_name,
    parse_planted_rules_json,
    parse_transactions_csv,
    serialize_transactions_csv,
)

__version__ = "0.1.0"
