"""Level-wise Apriori baseline and a brute-force mining oracle.

Both exist as correctness cross-checks for the pattern-growth miner and
as the slow side of the runtime comparison. The Apriori implementation
is deliberately plain: per-level candidate generation, downward-closure
pruning, and one full pass over the database per level.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Mapping, Sequence

from .txdb import MiningConfig, TransactionDatabase, item_frequencies

BRUTE_FORCE_ITEM_LIMIT = 20


@dataclass(frozen=True)
class FrequentItemset:
    """An itemset (ascending item ids) with its absolute occurrence count."""

    items: tuple[int, ...]
    count: int

    def __post_init__(self):
        if not self.items:
            raise ValueError("itemset may not be empty")
        if tuple(sorted(set(self.items))) != self.items:
            raise ValueError(f"items must be sorted and duplicate-free, got {self.items}")
        if self.count < 1:
            raise ValueError(f"count must be positive, got {self.count}")


def canonical_counts(counts: Mapping[tuple[int, ...], int]) -> dict[tuple[int, ...], int]:
    """Order an itemset->count mapping by (size, item ids)."""
    return dict(sorted(counts.items(), key=lambda kv: (len(kv[0]), kv[0])))


def as_itemsets(counts: Mapping[tuple[int, ...], int]) -> list[FrequentItemset]:
    return [FrequentItemset(items, count) for items, count in canonical_counts(counts).items()]


def join_candidates(level: Sequence[tuple[int, ...]]) -> list[tuple[int, ...]]:
    """Merge same-size itemsets agreeing on all but the last item.

    Classic F(k) x F(k) join; inputs must be canonically sorted tuples of
    one shared size. Output is duplicate-free and sorted.
    """
    if not level:
        return []
    sizes = {len(t) for t in level}
    if len(sizes) != 1:
        raise ValueError(f"join needs itemsets of one size, got sizes {sorted(sizes)}")
    for t in level:
        if tuple(sorted(set(t))) != t:
            raise ValueError(f"itemset {t} is not canonically sorted")
    ordered = sorted(set(level))
    joined = []
    for i, left in enumerate(ordered):
        for right in ordered[i + 1:]:
            if left[:-1] != right[:-1]:
                break  # sorted input keeps shared prefixes contiguous
            joined.append(left + (right[-1],))
    return joined


def prune_candidates(
    candidates: Sequence[tuple[int, ...]],
    level: Sequence[tuple[int, ...]],
) -> list[tuple[int, ...]]:
    """Keep a candidate only if every one-smaller subset is frequent."""
    known = set(level)
    kept = []
    for candidate in candidates:
        if all(candidate[:i] + candidate[i + 1:] in known for i in range(len(candidate))):
            kept.append(candidate)
    return kept


def count_support(
    db: TransactionDatabase,
    candidates: Sequence[tuple[int, ...]],
    strategy: str | None = None,
) -> list[tuple[tuple[int, ...], int]]:
    """Count superset transactions per candidate in one pass over the database.

    Two plain counting strategies exist: testing each candidate against each
    transaction, or enumerating each transaction's size-k subsets against a
    candidate lookup. By default the cheaper one (estimated from candidate
    count and average transaction length) is used; both visit the data once.
    """
    ordered = [tuple(c) for c in candidates]
    if not ordered:
        return []
    counts = [0] * len(ordered)
    sizes = {len(c) for c in ordered}
    uniform_k = sizes.pop() if len(sizes) == 1 else None
    if strategy is None:
        if uniform_k is None:
            strategy = "iterate"
        else:
            average_len = round(db.total_items / db.n) if db.n else 0
            enum_cost = db.n * math.comb(max(average_len, uniform_k), uniform_k)
            iter_cost = db.n * len(ordered)
            strategy = "enumerate" if enum_cost < iter_cost else "iterate"
    if strategy == "enumerate":
        if uniform_k is None:
            raise ValueError("subset enumeration needs candidates of one size")
        position = {c: i for i, c in enumerate(ordered)}
        k = uniform_k
        for t in db.scan():
            if len(t.items) < k:
                continue
            for combo in combinations(sorted(t.items), k):
                slot = position.get(combo)
                if slot is not None:
                    counts[slot] += 1
    elif strategy == "iterate":
        candidate_sets = [frozenset(c) for c in ordered]
        for t in db.scan():
            present = t.items
            for slot, candidate in enumerate(candidate_sets):
                if candidate <= present:
                    counts[slot] += 1
    else:
        raise ValueError(f"unknown counting strategy {strategy!r}")
    return list(zip(ordered, counts))


def mine_apriori(
    db: TransactionDatabase,
    config: MiningConfig,
    strategy: str | None = None,
) -> dict[tuple[int, ...], int]:
    """Level-wise mining: join, prune, count, filter until nothing survives.

    Returns the same canonical itemset->count mapping as the
    pattern-growth miner.
    """
    min_count = config.min_count_for(db.n)
    first_pass = item_frequencies(db)
    level = sorted((item,) for item, count in first_pass.items() if count >= min_count)
    results: dict[tuple[int, ...], int] = {t: first_pass[t[0]] for t in level}
    size = 1
    while level:
        if config.max_itemset_size is not None and size >= config.max_itemset_size:
            break
        candidates = prune_candidates(join_candidates(level), level)
        if not candidates:
            break
        counted = count_support(db, candidates, strategy)
        level = sorted(items for items, count in counted if count >= min_count)
        for items, count in counted:
            if count >= min_count:
                results[items] = count
        size += 1
    return canonical_counts(results)


def mine_bruteforce(
    db: TransactionDatabase,
    config: MiningConfig,
) -> dict[tuple[int, ...], int]:
    """Exhaustively count every non-empty catalog subset, then filter.

    Deliberately dumb, used as the independent oracle. Guarded to small
    catalogs because the enumeration is exponential.
    """
    n_items = len(db.items)
    if n_items > BRUTE_FORCE_ITEM_LIMIT:
        raise ValueError(
            f"brute force is limited to {BRUTE_FORCE_ITEM_LIMIT} items, catalog has {n_items}"
        )
    min_count = config.min_count_for(db.n)
    largest = n_items if config.max_itemset_size is None else min(n_items, config.max_itemset_size)
    transaction_sets = [t.items for t in db.transactions]
    results: dict[tuple[int, ...], int] = {}
    for size in range(1, largest + 1):
        for combo in combinations(range(n_items), size):
            members = frozenset(combo)
            count = sum(1 for t in transaction_sets if members <= t)
            if count >= min_count:
                results[combo] = count
    return canonical_counts(results)
