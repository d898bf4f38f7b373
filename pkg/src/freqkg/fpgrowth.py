"""FP-tree construction and pattern-growth mining.

The tree is built in exactly two passes over the transaction database:
the first pass counts item frequencies, the second filters and sorts
each transaction into the tree, merging shared prefixes. Mining walks
the header table bottom-up, rebuilding a conditional tree from the
prefix paths above each item and recursing with the item appended to
the current suffix.
"""

from __future__ import annotations

from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import combinations
from typing import Callable, Sequence

from .apriori import canonical_counts
from .txdb import MiningConfig, TransactionDatabase, item_frequencies, order_from_frequencies


class FPNode:
    """One prefix-tree node; the root carries item None and count 0."""

    __slots__ = ("item", "count", "parent", "children", "next_same_item")

    def __init__(self, item: int | None, parent: "FPNode | None"):
        self.item = item
        self.count = 0
        self.parent = parent
        self.children: dict[int, FPNode] = {}
        self.next_same_item: FPNode | None = None


class HeaderEntry:
    """Total count plus the node-link chain for one frequent item."""

    __slots__ = ("count", "head", "_tail")

    def __init__(self):
        self.count = 0
        self.head: FPNode | None = None
        self._tail: FPNode | None = None

    def append(self, node: FPNode) -> None:
        if self.head is None:
            self.head = node
        else:
            self._tail.next_same_item = node
        self._tail = node

    def chain(self):
        node = self.head
        while node is not None:
            yield node
            node = node.next_same_item


class FPTree:
    """Prefix tree over frequency-ordered itemsets with a header table.

    Header rows are keyed by item id in frequency order; node-link
    chains record nodes in insertion order.
    """

    def __init__(self, min_count: int, order: Sequence[int]):
        self.min_count = min_count
        self.root = FPNode(None, None)
        self.header: dict[int, HeaderEntry] = {item: HeaderEntry() for item in order}
        self._rank = {item: position for position, item in enumerate(order)}

    @property
    def order(self) -> list[int]:
        return list(self.header)

    def rank_of(self, item: int) -> int:
        return self._rank[item]

    def insert(self, items: Sequence[int], weight: int) -> None:
        """Insert an already filtered, frequency-ordered itemset."""
        node = self.root
        header = self.header
        for item in items:
            children = node.children
            child = children.get(item)
            if child is None:
                child = FPNode(item, node)
                children[item] = child
                header[item].append(child)
            child.count += weight
            node = child

    def refresh_header_counts(self) -> None:
        """Set each header row's total to the sum along its node-link chain."""
        for entry in self.header.values():
            total = 0
            node = entry.head
            while node is not None:
                total += node.count
                node = node.next_same_item
            entry.count = total


def build_fptree(db: TransactionDatabase, min_count: int) -> FPTree:
    """Two-pass tree build: count frequencies, then filter/sort/insert."""
    if min_count < 1:
        raise ValueError(f"min_count must be >= 1, got {min_count}")
    counts = item_frequencies(db)  # first pass
    order = order_from_frequencies(counts, min_count, db.name_of)
    tree = FPTree(min_count, order)
    rank = tree._rank
    rank_key = rank.__getitem__
    insert = tree.insert
    for t in db.scan():  # second pass
        kept = [item for item in t.items if item in rank]
        if kept:
            kept.sort(key=rank_key)
            insert(kept, 1)
    tree.refresh_header_counts()
    return tree


def reconstruct_filtered(tree: FPTree) -> Counter:
    """Expand the tree back into the multiset of filtered, ordered transactions.

    Each root-to-node path is emitted as many times as transactions ended
    exactly there (node count minus the counts of its children). Losslessness
    oracle: for any database this equals the frequency-ordered filtered
    transactions.
    """
    expanded: Counter = Counter()
    stack = [(child, (child.item,)) for child in tree.root.children.values()]
    while stack:
        node, path = stack.pop()
        terminal = node.count - sum(child.count for child in node.children.values())
        if terminal:
            expanded[path] += terminal
        for child in node.children.values():
            stack.append((child, path + (child.item,)))
    return expanded


@dataclass(frozen=True)
class PrefixPath:
    """A root-to-parent item path weighted by the terminal node's count."""

    items: tuple[int, ...]
    weight: int


def _raw_prefix_paths(tree: FPTree, item: int) -> list[tuple[list[int], int]]:
    # hot path: plain (items, weight) pairs, no dataclass per path
    paths = []
    node = tree.header[item].head
    while node is not None:
        reversed_items = []
        cursor = node.parent
        while cursor.item is not None:
            reversed_items.append(cursor.item)
            cursor = cursor.parent
        if reversed_items:
            reversed_items.reverse()
            paths.append((reversed_items, node.count))
        node = node.next_same_item
    return paths


def conditional_pattern_base(tree: FPTree, item: int) -> list[PrefixPath]:
    """Weighted prefix paths above every occurrence of an item.

    Paths exclude the root and the item itself; empty paths are dropped.
    Raises KeyError when the item is not in the header table.
    """
    if item not in tree.header:
        raise KeyError(f"item {item!r} is not in the header table")
    return [PrefixPath(tuple(items), weight) for items, weight in _raw_prefix_paths(tree, item)]


def _tree_from_paths(
    paths: list[tuple[list[int], int]],
    min_count: int,
    name_of: Callable[[int], str] | None,
) -> FPTree:
    counts: dict[int, int] = {}
    for items, weight in paths:
        for item in items:
            counts[item] = counts.get(item, 0) + weight
    kept = [item for item, total in counts.items() if total >= min_count]
    if name_of is None:
        kept.sort(key=lambda item: (-counts[item], item))
    else:
        kept.sort(key=lambda item: (-counts[item], name_of(item)))
    tree = FPTree(min_count, kept)
    rank = tree._rank
    rank_key = rank.__getitem__
    header = tree.header
    root = tree.root
    for items, weight in paths:
        filtered = [item for item in items if item in rank]
        if not filtered:
            continue
        filtered.sort(key=rank_key)
        node = root
        for item in filtered:
            children = node.children
            child = children.get(item)
            if child is None:
                child = FPNode(item, node)
                children[item] = child
                header[item].append(child)
            child.count += weight
            node = child
    tree.refresh_header_counts()
    return tree


def build_conditional_tree(
    base: Sequence[PrefixPath],
    min_count: int,
    name_of: Callable[[int], str] | None = None,
) -> FPTree:
    """Build a tree from weighted prefix paths instead of raw transactions.

    Ordering follows the weighted counts within the base; ties fall back
    to ascending item id unless a name lookup is supplied.
    """
    if min_count < 1:
        raise ValueError(f"min_count must be >= 1, got {min_count}")
    return _tree_from_paths([(list(p.items), p.weight) for p in base], min_count, name_of)


def _single_chain(tree: FPTree) -> list[tuple[int, int]] | None:
    """Return [(item, count)] top-down when the tree is one chain, else None."""
    chain = []
    node = tree.root
    while node.children:
        if len(node.children) > 1:
            return None
        node = next(iter(node.children.values()))
        chain.append((node.item, node.count))
    return chain


def _emit_chain_subsets(chain, suffix, budget, out) -> None:
    # every subset of a single prefix path is frequent; its count is the
    # count of the deepest selected node
    limit = len(chain) if budget is None else min(len(chain), budget)
    for size in range(1, limit + 1):
        for picks in combinations(range(len(chain)), size):
            count = chain[picks[-1]][1]
            pattern = tuple(sorted(suffix + tuple(chain[i][0] for i in picks)))
            out[pattern] = count


def _mine_tree(tree, suffix, min_count, name_of, max_size, shortcut, out) -> None:
    budget = None if max_size is None else max_size - len(suffix)
    if budget is not None and budget <= 0:
        return
    if shortcut:
        chain = _single_chain(tree)
        if chain is not None:
            _emit_chain_subsets(chain, suffix, budget, out)
            return
    for item in reversed(tree.order):
        entry = tree.header[item]
        pattern = tuple(sorted(suffix + (item,)))
        out[pattern] = entry.count
        if budget is not None and budget == 1:
            continue
        paths = _raw_prefix_paths(tree, item)
        if not paths or sum(weight for _, weight in paths) < min_count:
            continue
        conditional = _tree_from_paths(paths, min_count, name_of)
        if conditional.header:
            _mine_tree(conditional, suffix + (item,), min_count, name_of, max_size, shortcut, out)


def mine_fpgrowth(
    db: TransactionDatabase,
    config: MiningConfig,
    *,
    threads: int = 1,
    single_path_shortcut: bool = True,
) -> dict[tuple[int, ...], int]:
    """Mine every itemset with support >= min_support and its exact count.

    Returns a canonically ordered mapping from ascending item-id tuples to
    counts. Header items are visited in reverse frequency order; with
    threads > 1 the top-level items are mined concurrently (their
    conditional bases are disjoint) and merged back into the same
    canonical order, so output does not depend on scheduling. The
    single-prefix-path shortcut enumerates chain subsets directly and can
    be disabled to cross-check results.
    """
    if threads < 1:
        raise ValueError(f"threads must be >= 1, got {threads}")
    min_count = config.min_count_for(db.n)
    tree = build_fptree(db, min_count)
    name_of = db.name_of
    max_size = config.max_itemset_size
    results: dict[tuple[int, ...], int] = {}
    if threads == 1:
        _mine_tree(tree, (), min_count, name_of, max_size, single_path_shortcut, results)
    else:
        def mine_item(item: int) -> dict[tuple[int, ...], int]:
            local: dict[tuple[int, ...], int] = {}
            local[(item,)] = tree.header[item].count
            if max_size is not None and max_size == 1:
                return local
            paths = _raw_prefix_paths(tree, item)
            if paths and sum(weight for _, weight in paths) >= min_count:
                conditional = _tree_from_paths(paths, min_count, name_of)
                if conditional.header:
                    _mine_tree(conditional, (item,), min_count, name_of, max_size,
                               single_path_shortcut, local)
            return local

        top_items = list(reversed(tree.order))
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for partial in pool.map(mine_item, top_items):
                results.update(partial)
    return canonical_counts(results)
