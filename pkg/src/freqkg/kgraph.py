"""Embedded labeled property graph for inspection knowledge.

Curated triples and mined rules become labeled nodes joined by typed,
directed edges that carry string key-value properties. The graph
persists to JSON and exports to DOT and GraphML for visualization.
Mutations are expected from a single writer; queries and exports only
read.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Sequence
from xml.etree import ElementTree

from .txdb import ParseError, normalize_name

RELATED_ITEMS_RELATION = "Related items"


class NodeLabel(str, Enum):
    """Closed vocabulary of entity types; unknown labels are rejected."""

    EQUIPMENT = "Equipment"
    COMPONENT = "Component"
    INSPECTION_ITEM = "InspectionItem"
    INSPECTION_INDEX = "InspectionIndex"
    DEFECT_CAUSE = "DefectCause"
    DEFECT_TYPE = "DefectType"


LABEL_COLORS = {
    NodeLabel.EQUIPMENT: "#4c78a8",
    NodeLabel.COMPONENT: "#f58518",
    NodeLabel.INSPECTION_ITEM: "#54a24b",
    NodeLabel.INSPECTION_INDEX: "#eeca3b",
    NodeLabel.DEFECT_CAUSE: "#b279a2",
    NodeLabel.DEFECT_TYPE: "#e45756",
}

NodeKey = tuple[str, str]
EdgeKey = tuple[NodeKey, str, NodeKey]


def _coerce_label(label: NodeLabel | str) -> NodeLabel:
    if isinstance(label, NodeLabel):
        return label
    try:
        return NodeLabel(label)
    except ValueError:
        known = ", ".join(member.value for member in NodeLabel)
        raise ValueError(f"unknown node label {label!r} (expected one of: {known})") from None


def node_key(label: NodeLabel | str, name: str) -> NodeKey:
    return (_coerce_label(label).value, normalize_name(name))


@dataclass
class Node:
    label: NodeLabel
    name: str
    properties: dict[str, str] = field(default_factory=dict)

    @property
    def key(self) -> NodeKey:
        return (self.label.value, self.name)


@dataclass
class Edge:
    source: NodeKey
    target: NodeKey
    relation: str
    properties: dict[str, str] = field(default_factory=dict)

    @property
    def key(self) -> EdgeKey:
        return (self.source, self.relation, self.target)


@dataclass(frozen=True)
class Triple:
    """(head, relation, tail) plus the labels of both endpoints."""

    head: str
    relation: str
    tail: str
    head_label: NodeLabel
    tail_label: NodeLabel

    def __post_init__(self):
        for field_name in ("head", "relation", "tail"):
            if not getattr(self, field_name):
                raise ValueError(f"triple field {field_name!r} may not be empty")


@dataclass
class IngestReport:
    nodes_added: int = 0
    edges_added: int = 0
    duplicates_skipped: int = 0


class PropertyGraph:
    """Directed graph of labeled nodes and relation-typed edges.

    Node identity is (label, normalized name); edge identity is
    (source, relation, target), and re-adding an existing edge updates
    its properties instead of duplicating it.
    """

    def __init__(self):
        self._nodes: dict[NodeKey, Node] = {}
        self._edges: dict[EdgeKey, Edge] = {}
        self._out: dict[NodeKey, list[EdgeKey]] = {}
        self._in: dict[NodeKey, list[EdgeKey]] = {}

    @property
    def node_count(self) -> int:
        return len(self._nodes)

    @property
    def edge_count(self) -> int:
        return len(self._edges)

    def nodes(self) -> list[Node]:
        return [self._nodes[key] for key in sorted(self._nodes)]

    def edges(self) -> list[Edge]:
        return [self._edges[key] for key in sorted(self._edges)]

    def has_node(self, label: NodeLabel | str, name: str) -> bool:
        return node_key(label, name) in self._nodes

    def get_node(self, label: NodeLabel | str, name: str) -> Node:
        return self._nodes[node_key(label, name)]

    def ensure_node(
        self,
        label: NodeLabel | str,
        name: str,
        properties: Mapping[str, str] | None = None,
    ) -> tuple[Node, bool]:
        """Fetch or create the node; existing nodes get properties merged in."""
        key = node_key(label, name)
        node = self._nodes.get(key)
        created = node is None
        if created:
            node = Node(_coerce_label(label), key[1])
            self._nodes[key] = node
            self._out[key] = []
            self._in[key] = []
        if properties:
            node.properties.update(properties)
        return node, created

    def upsert_edge(
        self,
        source: NodeKey,
        relation: str,
        target: NodeKey,
        properties: Mapping[str, str] | None = None,
    ) -> bool:
        """Add or refresh an edge; returns True when newly created."""
        if source not in self._nodes:
            raise KeyError(f"unknown edge source {source!r}")
        if target not in self._nodes:
            raise KeyError(f"unknown edge target {target!r}")
        key = (source, relation, target)
        edge = self._edges.get(key)
        created = edge is None
        if created:
            edge = Edge(source, target, relation)
            self._edges[key] = edge
            self._out[source].append(key)
            self._in[target].append(key)
        if properties:
            edge.properties.update(properties)
        return created

    def edges_touching(self, key: NodeKey) -> list[Edge]:
        seen = list(self._out.get(key, ())) + [
            k for k in self._in.get(key, ()) if k[0] != k[2]
        ]
        return [self._edges[k] for k in seen]

    def structurally_equal(self, other: "PropertyGraph") -> bool:
        if sorted(self._nodes) != sorted(other._nodes):
            return False
        for key, node in self._nodes.items():
            if node.properties != other._nodes[key].properties:
                return False
        if sorted(self._edges) != sorted(other._edges):
            return False
        for key, edge in self._edges.items():
            if edge.properties != other._edges[key].properties:
                return False
        return True


# ---------------------------------------------------------------------------
# Triple ingestion
# ---------------------------------------------------------------------------

TRIPLE_FIELD_COUNT = 5


def parse_triples(text: str) -> list[Triple]:
    """Parse tab-separated triples: head, relation, tail, head label, tail label.

    Lines starting with '#' are comments; blank lines are skipped.
    """
    triples = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != TRIPLE_FIELD_COUNT:
            raise ParseError(
                f"expected {TRIPLE_FIELD_COUNT} tab-separated fields, got {len(fields)}",
                line_no,
            )
        head, relation, tail, head_label, tail_label = (normalize_name(f) for f in fields)
        try:
            triples.append(
                Triple(head, relation, tail, _coerce_label(head_label), _coerce_label(tail_label))
            )
        except ValueError as err:
            raise ParseError(str(err), line_no) from err
    return triples


def serialize_triples(triples: Sequence[Triple]) -> str:
    lines = ["# head\trelation\ttail\thead_label\ttail_label"]
    for t in triples:
        lines.append(f"{t.head}\t{t.relation}\t{t.tail}\t{t.head_label.value}\t{t.tail_label.value}")
    return "\n".join(lines) + "\n"


def ingest_triples(graph: PropertyGraph, triples: Iterable[Triple]) -> IngestReport:
    """Add triples to the graph, deduplicating nodes and edges; idempotent."""
    report = IngestReport()
    for t in triples:
        head, head_created = graph.ensure_node(t.head_label, t.head)
        tail, tail_created = graph.ensure_node(t.tail_label, t.tail)
        report.nodes_added += int(head_created) + int(tail_created)
        if graph.upsert_edge(head.key, t.relation, tail.key):
            report.edges_added += 1
        else:
            report.duplicates_skipped += 1
    return report


def rules_to_graph(graph: PropertyGraph, rules: Iterable) -> IngestReport:
    """Turn association rules into "Related items" edges between inspection items.

    Rules need .antecedent / .consequent name tuples plus .support,
    .confidence and optionally .lift. Multi-item sides expand pairwise,
    each edge keeping the full rule in a derived_from property.
    Re-ingesting a rule updates the edge properties in place.
    """
    report = IngestReport()
    for rule in rules:
        properties = {
            "support": f"{rule.support:.2f}",
            "confidence": f"{rule.confidence:.2f}",
        }
        lift_value = getattr(rule, "lift", None)
        if lift_value is not None:
            properties["lift"] = f"{lift_value:.2f}"
        expanded = len(rule.antecedent) > 1 or len(rule.consequent) > 1
        if expanded:
            properties["derived_from"] = (
                " + ".join(rule.antecedent) + " => " + " + ".join(rule.consequent)
            )
        for source_name in rule.antecedent:
            source, created = graph.ensure_node(NodeLabel.INSPECTION_ITEM, source_name)
            report.nodes_added += int(created)
            for target_name in rule.consequent:
                target, created = graph.ensure_node(NodeLabel.INSPECTION_ITEM, target_name)
                report.nodes_added += int(created)
                if graph.upsert_edge(source.key, RELATED_ITEMS_RELATION, target.key, properties):
                    report.edges_added += 1
                else:
                    report.duplicates_skipped += 1
    return report


# ---------------------------------------------------------------------------
# Aliases
# ---------------------------------------------------------------------------

def parse_aliases(text: str) -> dict[str, str]:
    """Parse "variant<TAB>canonical" name merges, '#' comments allowed."""
    aliases: dict[str, str] = {}
    for line_no, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != 2:
            raise ParseError(f"expected 2 tab-separated fields, got {len(fields)}", line_no)
        variant, canonical = (normalize_name(f) for f in fields)
        if not variant or not canonical:
            raise ParseError("alias names may not be empty", line_no)
        aliases[variant] = canonical
    return aliases


def apply_aliases(triples: Sequence[Triple], aliases: Mapping[str, str]) -> list[Triple]:
    """Rewrite head/tail names through the alias map before ingestion."""
    rewritten = []
    for t in triples:
        rewritten.append(
            Triple(
                aliases.get(t.head, t.head),
                t.relation,
                aliases.get(t.tail, t.tail),
                t.head_label,
                t.tail_label,
            )
        )
    return rewritten


# ---------------------------------------------------------------------------
# Query
# ---------------------------------------------------------------------------

def query_neighbors(
    graph: PropertyGraph,
    start: tuple[NodeLabel | str, str],
    depth: int,
    label_filter: Iterable[NodeLabel | str] | None = None,
    relation_filter: Iterable[str] | None = None,
) -> PropertyGraph:
    """Breadth-first neighborhood over both edge directions up to depth.

    Returns the subgraph induced by the visited nodes: every
    filter-passing edge whose endpoints were both reached is included.
    Nodes are added in (label, name) order. Raises KeyError for an
    unknown start node.
    """
    if depth < 0:
        raise ValueError(f"depth must be >= 0, got {depth}")
    start_key = node_key(*start)
    if start_key not in graph._nodes:
        raise KeyError(f"unknown start node {start_key!r}")
    allowed_labels = None if label_filter is None else {
        _coerce_label(l).value for l in label_filter
    }
    allowed_relations = None if relation_filter is None else set(relation_filter)

    visited = {start_key}
    frontier = [start_key]
    for _ in range(depth):
        next_frontier = []
        for key in frontier:
            for edge in graph.edges_touching(key):
                if allowed_relations is not None and edge.relation not in allowed_relations:
                    continue
                other = edge.target if edge.source == key else edge.source
                if allowed_labels is not None and other[0] not in allowed_labels:
                    continue
                if other not in visited:
                    visited.add(other)
                    next_frontier.append(other)
        frontier = next_frontier

    subgraph = PropertyGraph()
    for key in sorted(visited):
        original = graph._nodes[key]
        subgraph.ensure_node(original.label, original.name, dict(original.properties))
    for key in sorted(graph._edges):
        source, relation, target = key
        if source in visited and target in visited:
            if allowed_relations is not None and relation not in allowed_relations:
                continue
            subgraph.upsert_edge(source, relation, target, dict(graph._edges[key].properties))
    return subgraph


# ---------------------------------------------------------------------------
# Persistence
# ---------------------------------------------------------------------------

def save_graph(graph: PropertyGraph) -> str:
    """Serialize to JSON with deterministic node/edge and key order."""
    doc = {
        "nodes": [
            {"label": node.label.value, "name": node.name, "properties": dict(sorted(node.properties.items()))}
            for node in graph.nodes()
        ],
        "edges": [
            {
                "from": {"label": edge.source[0], "name": edge.source[1]},
                "relation": edge.relation,
                "to": {"label": edge.target[0], "name": edge.target[1]},
                "properties": dict(sorted(edge.properties.items())),
            }
            for edge in graph.edges()
        ],
    }
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


def _endpoint(entry, role: str) -> NodeKey:
    if not isinstance(entry, dict) or "label" not in entry or "name" not in entry:
        raise ParseError(f"edge {role} must be an object with label and name")
    return node_key(str(entry["label"]), str(entry["name"]))


def load_graph(text: str) -> PropertyGraph:
    """Parse a saved graph document; dangling edge endpoints are an error."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as err:
        raise ParseError(f"invalid JSON: {err}") from err
    if not isinstance(doc, dict) or "nodes" not in doc or "edges" not in doc:
        raise ParseError("graph document needs 'nodes' and 'edges' arrays")
    graph = PropertyGraph()
    for pos, entry in enumerate(doc["nodes"]):
        if not isinstance(entry, dict):
            raise ParseError(f"node {pos}: expected an object")
        try:
            label = _coerce_label(str(entry["label"]))
            name = str(entry["name"])
        except (KeyError, ValueError) as err:
            raise ParseError(f"node {pos}: {err}") from err
        properties = entry.get("properties", {})
        if not isinstance(properties, dict):
            raise ParseError(f"node {pos}: properties must be an object")
        graph.ensure_node(label, name, {str(k): str(v) for k, v in properties.items()})
    for pos, entry in enumerate(doc["edges"]):
        if not isinstance(entry, dict):
            raise ParseError(f"edge {pos}: expected an object")
        try:
            source = _endpoint(entry.get("from"), "source")
            target = _endpoint(entry.get("to"), "target")
            relation = normalize_name(str(entry["relation"]))
        except (KeyError, ValueError) as err:
            raise ParseError(f"edge {pos}: {err}") from err
        properties = entry.get("properties", {})
        if not isinstance(properties, dict):
            raise ParseError(f"edge {pos}: properties must be an object")
        try:
            graph.upsert_edge(source, relation, target,
                              {str(k): str(v) for k, v in properties.items()})
        except KeyError as err:
            raise ParseError(f"edge {pos}: dangling endpoint {err.args[0]}") from err
    return graph


# ---------------------------------------------------------------------------
# Exports
# ---------------------------------------------------------------------------

def _dot_quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def export_dot(graph: PropertyGraph) -> str:
    """Directed DOT document, one statement per node and per edge.

    Node ids combine label and name so same-named nodes under different
    labels stay distinct; fill colors come from a fixed per-label table.
    """
    lines = ["digraph inspection_graph {"]
    for node in graph.nodes():
        node_id = _dot_quote(f"{node.label.value}:{node.name}")
        color = LABEL_COLORS[node.label]
        lines.append(
            f"  {node_id} [label={_dot_quote(node.name)}, style=filled, fillcolor=\"{color}\"];"
        )
    for edge in graph.edges():
        source_id = _dot_quote(f"{edge.source[0]}:{edge.source[1]}")
        target_id = _dot_quote(f"{edge.target[0]}:{edge.target[1]}")
        lines.append(f"  {source_id} -> {target_id} [label={_dot_quote(edge.relation)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


GRAPHML_NS = "http://graphml.graphdrawing.org/xmlns"


def export_graphml(graph: PropertyGraph) -> str:
    """GraphML document with declared string keys for all node/edge data."""
    ElementTree.register_namespace("", GRAPHML_NS)
    root = ElementTree.Element(f"{{{GRAPHML_NS}}}graphml")

    node_attrs = ["label", "name"]
    node_attrs += sorted({p for node in graph.nodes() for p in node.properties} - set(node_attrs))
    edge_attrs = ["relation"]
    edge_attrs += sorted({p for edge in graph.edges() for p in edge.properties} - set(edge_attrs))

    key_ids: dict[tuple[str, str], str] = {}
    for domain, attrs in (("node", node_attrs), ("edge", edge_attrs)):
        for attr in attrs:
            key_id = f"d{len(key_ids)}"
            key_ids[(domain, attr)] = key_id
            ElementTree.SubElement(
                root,
                f"{{{GRAPHML_NS}}}key",
                {"id": key_id, "for": domain, "attr.name": attr, "attr.type": "string"},
            )

    graph_el = ElementTree.SubElement(
        root, f"{{{GRAPHML_NS}}}graph", {"id": "G", "edgedefault": "directed"}
    )

    def add_data(parent, domain: str, attr: str, value: str) -> None:
        data = ElementTree.SubElement(
            parent, f"{{{GRAPHML_NS}}}data", {"key": key_ids[(domain, attr)]}
        )
        data.text = value

    node_ids: dict[NodeKey, str] = {}
    for position, node in enumerate(graph.nodes()):
        node_ids[node.key] = f"n{position}"
        el = ElementTree.SubElement(graph_el, f"{{{GRAPHML_NS}}}node", {"id": f"n{position}"})
        add_data(el, "node", "label", node.label.value)
        add_data(el, "node", "name", node.name)
        for prop in sorted(node.properties):
            add_data(el, "node", prop, node.properties[prop])
    for position, edge in enumerate(graph.edges()):
        el = ElementTree.SubElement(
            graph_el,
            f"{{{GRAPHML_NS}}}edge",
            {"id": f"e{position}", "source": node_ids[edge.source], "target": node_ids[edge.target]},
        )
        add_data(el, "edge", "relation", edge.relation)
        for prop in sorted(edge.properties):
            add_data(el, "edge", prop, edge.properties[prop])

    ElementTree.indent(root)
    body = ElementTree.tostring(root, encoding="unicode")
    return '<?xml version="1.0" encoding="UTF-8"?>\n' + body + "\n"
