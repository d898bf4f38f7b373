"""Transaction database for equipment-inspection records.

An item is one failed inspection item (by name); names are interned to
dense integer ids. A transaction is the set of items that failed for one
sampled device. The database is immutable once built and counts full
passes over its transactions so mining code can prove how often it
scanned the data.
"""

from __future__ import annotations

import csv
import io
import json
import random
import warnings
from dataclasses import dataclass
from decimal import Decimal, InvalidOperation
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

CSV_HEADER = ("device_number", "failed_items")
ITEM_SEPARATOR = ";"


class ParseError(ValueError):
    """Malformed input data; carries a 1-based line number when known."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class GenerationError(ValueError):
    """A synthetic-data request cannot be satisfied at the required accuracy."""


class DuplicateDeviceWarning(UserWarning):
    """A device number occurred on more than one CSV line."""


def normalize_name(name: str) -> str:
    """Trim and collapse internal whitespace runs to single spaces; keep case."""
    return " ".join(name.split())


@dataclass(frozen=True)
class Item:
    id: int
    name: str


@dataclass(frozen=True)
class Transaction:
    source_id: str
    items: frozenset[int]


@dataclass(frozen=True)
class MiningConfig:
    """Thresholds for frequent-itemset and rule mining.

    min_support and min_confidence are fractions in [0, 1];
    max_itemset_size, when set, caps the size of mined itemsets.
    """

    min_support: float
    min_confidence: float
    max_itemset_size: int | None = None

    def __post_init__(self) -> None:
        if not 0.0 <= self.min_support <= 1.0:
            raise ValueError(f"min_support must be in [0, 1], got {self.min_support}")
        if not 0.0 <= self.min_confidence <= 1.0:
            raise ValueError(f"min_confidence must be in [0, 1], got {self.min_confidence}")
        if self.max_itemset_size is not None and self.max_itemset_size < 1:
            raise ValueError(f"max_itemset_size must be positive, got {self.max_itemset_size}")

    def min_count_for(self, n_transactions: int) -> int:
        """Smallest count c with c / n >= min_support, clamped to at least 1.

        The threshold is taken at its decimal face value and compared with
        exact rational arithmetic, so e.g. 0.01 over 300 transactions gives
        3, not the 4 a float product would suggest.
        """
        frac = Fraction(Decimal(str(self.min_support)))
        c = -((-frac.numerator * n_transactions) // frac.denominator)
        return max(1, c)


class TransactionDatabase:
    """Immutable ordered transactions over an interned item catalog.

    Safe for concurrent reads after construction. ``scan()`` yields the
    transactions and bumps ``scan_count`` each time a pass runs to
    completion; the counter is instrumentation, not data.
    """

    def __init__(self, items: Sequence[Item], transactions: Sequence[Transaction]):
        self._items = tuple(items)
        self._transactions = tuple(transactions)
        names_seen: dict[str, int] = {}
        for index, item in enumerate(self._items):
            if item.id != index:
                raise ValueError(f"item ids must be contiguous from 0; id {item.id} at position {index}")
            if not item.name:
                raise ValueError(f"item {item.id} has an empty name")
            if item.name in names_seen:
                raise ValueError(f"duplicate item name {item.name!r}")
            names_seen[item.name] = item.id
        self._id_by_name = names_seen
        n_items = len(self._items)
        total = 0
        for t in self._transactions:
            for item_id in t.items:
                if not 0 <= item_id < n_items:
                    raise ValueError(f"transaction {t.source_id!r} references unknown item id {item_id}")
            total += len(t.items)
        self._total_items = total
        self._scan_count = 0

    @classmethod
    def build(cls, records: Iterable[tuple[str, Iterable[str]]]) -> "TransactionDatabase":
        """Intern item names in first-appearance order and freeze the database."""
        interner: dict[str, int] = {}
        transactions = []
        for source_id, names in records:
            ids = set()
            for raw in names:
                name = normalize_name(raw)
                if not name:
                    raise ValueError(f"empty item name in record {source_id!r}")
                if name not in interner:
                    interner[name] = len(interner)
                ids.add(interner[name])
            transactions.append(Transaction(source_id, frozenset(ids)))
        items = [Item(item_id, name) for name, item_id in interner.items()]
        return cls(items, transactions)

    @property
    def items(self) -> tuple[Item, ...]:
        return self._items

    @property
    def item_names(self) -> tuple[str, ...]:
        return tuple(item.name for item in self._items)

    @property
    def transactions(self) -> tuple[Transaction, ...]:
        return self._transactions

    @property
    def n(self) -> int:
        return len(self._transactions)

    @property
    def total_items(self) -> int:
        """Sum of transaction sizes (with duplicates already collapsed)."""
        return self._total_items

    def name_of(self, item_id: int) -> str:
        return self._items[item_id].name

    def id_of(self, name: str) -> int:
        return self._id_by_name[normalize_name(name)]

    def __contains__(self, name: str) -> bool:
        return normalize_name(name) in self._id_by_name

    def scan(self) -> Iterator[Transaction]:
        """Yield every transaction; completing the pass increments scan_count."""
        for t in self._transactions:
            yield t
        self._scan_count += 1

    @property
    def scan_count(self) -> int:
        return self._scan_count


def parse_transactions_csv(text: str) -> TransactionDatabase:
    """Parse the transactions CSV format into a database.

    The first line is a header and is skipped. Each following non-blank
    line is ``device_number,failed_items`` with item names separated by
    ';'. A repeated device number is legal (each line is its own
    transaction) but emits a DuplicateDeviceWarning.
    """
    lines = text.splitlines()
    records: list[tuple[str, list[str]]] = []
    seen_devices: set[str] = set()
    for line_no, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        try:
            row = next(csv.reader([line]))
        except csv.Error as err:
            raise ParseError(f"bad CSV syntax: {err}", line_no) from err
        if len(row) < 2:
            raise ParseError(f"expected 2 fields, got {len(row)}", line_no)
        if len(row) > 2:
            raise ParseError(f"expected 2 fields, got {len(row)} (quote item lists containing commas)", line_no)
        device, items_field = row
        if device in seen_devices:
            warnings.warn(
                f"duplicate device number {device!r} on line {line_no}",
                DuplicateDeviceWarning,
                stacklevel=2,
            )
        seen_devices.add(device)
        if items_field.strip():
            names = []
            for raw in items_field.split(ITEM_SEPARATOR):
                name = normalize_name(raw)
                if not name:
                    raise ParseError("empty item name between separators", line_no)
                names.append(name)
        else:
            names = []
        records.append((device, names))
    return TransactionDatabase.build(records)


def serialize_transactions_csv(db: TransactionDatabase) -> str:
    """Render the database in the transactions CSV format (LF line endings)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for t in db.transactions:
        names = [db.name_of(i) for i in sorted(t.items)]
        writer.writerow([t.source_id, ITEM_SEPARATOR.join(names)])
    return buf.getvalue()


def item_frequencies(db: TransactionDatabase) -> dict[int, int]:
    """Count, per catalog item, the transactions containing it (0 if none)."""
    counts = dict.fromkeys(range(len(db.items)), 0)
    for t in db.scan():
        for item_id in t.items:
            counts[item_id] += 1
    return counts


def order_from_frequencies(
    counts: dict[int, int], min_count: int, name_of
) -> list[int]:
    """Items with count >= min_count, most frequent first, name ascending on ties."""
    kept = [item_id for item_id, c in counts.items() if c >= min_count]
    kept.sort(key=lambda item_id: (-counts[item_id], name_of(item_id)))
    return kept


def frequency_order(db: TransactionDatabase, min_count: int) -> list[int]:
    """Canonical insertion order for prefix-tree construction.

    Descending transaction count, ties broken by ascending normalized name.
    """
    if min_count < 0:
        raise ValueError("min_count must be >= 0")
    return order_from_frequencies(item_frequencies(db), min_count, db.name_of)


# ---------------------------------------------------------------------------
# Synthetic data generation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PlantedRule:
    """Target metrics for one rule to embed in a synthetic database."""

    antecedent: tuple[str, ...]
    consequent: tuple[str, ...]
    support: float
    confidence: float


def parse_planted_rules_json(text: str) -> list[PlantedRule]:
    """Parse a JSON array of {antecedent, consequent, support, confidence}."""
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as err:
        raise ParseError(f"invalid JSON: {err}") from err
    if not isinstance(payload, list):
        raise ParseError("expected a JSON array of rule objects")
    rules = []
    for pos, entry in enumerate(payload):
        if not isinstance(entry, dict):
            raise ParseError(f"rule {pos}: expected an object")
        try:
            antecedent = entry["antecedent"]
            consequent = entry["consequent"]
            support = entry["support"]
            confidence = entry["confidence"]
        except KeyError as err:
            raise ParseError(f"rule {pos}: missing field {err.args[0]!r}") from err
        if not isinstance(antecedent, list) or not isinstance(consequent, list):
            raise ParseError(f"rule {pos}: antecedent and consequent must be arrays of names")
        rules.append(
            PlantedRule(
                antecedent=tuple(str(x) for x in antecedent),
                consequent=tuple(str(x) for x in consequent),
                support=float(support),
                confidence=float(confidence),
            )
        )
    return rules


def _half_up(value: Fraction) -> int:
    # round-half-up for non-negative rationals; Python's round() would
    # send exact .5 cases to the even neighbour
    return (2 * value.numerator + value.denominator) // (2 * value.denominator)


def _exact_fraction(value: float, label: str) -> Fraction:
    try:
        return Fraction(Decimal(str(value)))
    except (InvalidOperation, ValueError) as err:
        raise ValueError(f"{label} is not a finite number: {value!r}") from err


class _PlannedRule:
    __slots__ = ("spec", "antecedent_ids", "pair_ids", "pair_count", "antecedent_count")

    def __init__(self, spec, antecedent_ids, pair_ids, pair_count, antecedent_count):
        self.spec = spec
        self.antecedent_ids = antecedent_ids
        self.pair_ids = pair_ids
        self.pair_count = pair_count
        self.antecedent_count = antecedent_count


METRIC_TOLERANCE = 0.005


def generate_synthetic(
    rules: Sequence[PlantedRule],
    n: int,
    noise_items: int = 0,
    seed: int = 0,
) -> TransactionDatabase:
    """Build a database whose mined metrics hit the planted targets exactly.

    For each rule, round(support * n) transactions contain the full
    antecedent-plus-consequent itemset and the antecedent occurs in
    round(support * n / confidence) transactions overall; memberships for
    different rules are packed into shared transactions so the whole plan
    fits in n rows. Leftover empty transactions are filled from
    noise_items extra items that never touch planted ones. Deterministic
    under a fixed seed. Raises GenerationError when the targets are
    jointly unsatisfiable within +/-0.005.
    """
    if n <= 0:
        raise ValueError(f"n must be positive, got {n}")
    if noise_items < 0:
        raise ValueError(f"noise_items must be >= 0, got {noise_items}")

    interner: dict[str, int] = {}

    def intern(name: str) -> int:
        clean = normalize_name(name)
        if not clean:
            raise ValueError("planted rules may not contain empty item names")
        if clean not in interner:
            interner[clean] = len(interner)
        return interner[clean]

    planned: list[_PlannedRule] = []
    for spec in rules:
        if not spec.antecedent or not spec.consequent:
            raise ValueError("planted rules need a non-empty antecedent and consequent")
        support = _exact_fraction(spec.support, "support")
        confidence = _exact_fraction(spec.confidence, "confidence")
        if not 0 < support <= 1:
            raise ValueError(f"target support must be in (0, 1], got {spec.support}")
        if not 0 < confidence <= 1:
            raise ValueError(f"target confidence must be in (0, 1], got {spec.confidence}")
        if support > confidence:
            raise ValueError(
                f"target support {spec.support} exceeds target confidence {spec.confidence}"
            )
        antecedent_ids = frozenset(intern(x) for x in spec.antecedent)
        consequent_ids = frozenset(intern(x) for x in spec.consequent)
        if antecedent_ids & consequent_ids:
            raise ValueError(f"rule {spec.antecedent} => {spec.consequent} overlaps itself")
        pair_count = _half_up(support * n)
        antecedent_count = _half_up(support * n / confidence)
        if pair_count < 1:
            raise GenerationError(
                f"support {spec.support} rounds to zero transactions at n={n}"
            )
        planned.append(
            _PlannedRule(spec, antecedent_ids, antecedent_ids | consequent_ids,
                         pair_count, antecedent_count)
        )

    # rules sharing an antecedent itemset must agree on its total frequency
    groups: dict[frozenset[int], list[_PlannedRule]] = {}
    for plan in planned:
        groups.setdefault(plan.antecedent_ids, []).append(plan)
    for antecedent_ids, members in groups.items():
        first = members[0]
        for other in members[1:]:
            if other.antecedent_count != first.antecedent_count:
                raise GenerationError(
                    "rules sharing antecedent "
                    f"{sorted(other.spec.antecedent)} need conflicting antecedent "
                    f"frequencies ({first.antecedent_count} vs {other.antecedent_count}); "
                    "give the rules distinct antecedent names"
                )
        committed = sum(m.pair_count for m in members)
        if committed > first.antecedent_count:
            raise GenerationError(
                f"antecedent {sorted(first.spec.antecedent)} is over-committed: "
                f"{committed} co-occurrence rows exceed its total of {first.antecedent_count}"
            )
        if first.antecedent_count > n:
            raise GenerationError(
                f"antecedent {sorted(first.spec.antecedent)} needs "
                f"{first.antecedent_count} rows but n={n}"
            )

    rng = random.Random(seed)
    slots: list[set[int]] = [set() for _ in range(n)]
    all_pairs = [plan.pair_ids for plan in planned]

    def completes_foreign_pair(current: set[int], added: frozenset[int], own) -> bool:
        merged = current | added
        for pair in all_pairs:
            if pair is own:
                continue
            if pair <= merged and not pair <= current:
                return True
        return False

    group_state: dict[frozenset[int], tuple[list[int], set[int]]] = {}
    for antecedent_ids in groups:
        order = list(range(n))
        rng.shuffle(order)
        group_state[antecedent_ids] = (order, set())

    def take(antecedent_ids, count, added, own) -> list[int]:
        order, used = group_state[antecedent_ids]
        chosen = []
        for slot in order:
            if len(chosen) == count:
                break
            if slot in used:
                continue
            if completes_foreign_pair(slots[slot], added, own):
                continue
            chosen.append(slot)
        if len(chosen) < count:
            raise GenerationError(
                f"could not place {count} rows for items {sorted(added)}; "
                "the planted rules are too dense for this n"
            )
        used.update(chosen)
        return chosen

    for antecedent_ids, members in groups.items():
        for plan in members:
            for slot in take(antecedent_ids, plan.pair_count, plan.pair_ids, plan.pair_ids):
                slots[slot].update(plan.pair_ids)
    for antecedent_ids, members in groups.items():
        remainder = members[0].antecedent_count - sum(m.pair_count for m in members)
        for slot in take(antecedent_ids, remainder, antecedent_ids, None):
            slots[slot].update(antecedent_ids)

    noise_ids = [intern(f"Noise item {k:02d}") for k in range(1, noise_items + 1)]
    for slot in range(n):
        if slots[slot] or not noise_ids:
            continue
        k = rng.randint(1, min(3, len(noise_ids)))
        slots[slot].update(rng.sample(noise_ids, k))

    for plan in planned:
        pair_hits = sum(1 for s in slots if plan.pair_ids <= s)
        antecedent_hits = sum(1 for s in slots if plan.antecedent_ids <= s)
        achieved_support = pair_hits / n
        achieved_confidence = pair_hits / antecedent_hits if antecedent_hits else 0.0
        if (
            abs(achieved_support - plan.spec.support) > METRIC_TOLERANCE
            or abs(achieved_confidence - plan.spec.confidence) > METRIC_TOLERANCE
        ):
            raise GenerationError(
                f"rule {plan.spec.antecedent} => {plan.spec.consequent} landed at "
                f"support {achieved_support:.4f} / confidence {achieved_confidence:.4f}, "
                f"outside the +/-{METRIC_TOLERANCE} window around "
                f"{plan.spec.support} / {plan.spec.confidence}"
            )

    items = [Item(item_id, name) for name, item_id in interner.items()]
    transactions = [
        Transaction(f"SYN-{index + 1:06d}", frozenset(slot))
        for index, slot in enumerate(slots)
    ]
    return TransactionDatabase(items, transactions)


def generate_random(n: int, n_items: int, mean_len: float, seed: int = 0) -> TransactionDatabase:
    """Dense random benchmark data: skewed item popularity, ~mean_len items per row.

    Item popularity follows a Zipf-like curve, mirroring how inspection
    failures concentrate on a few recurring items; the resulting
    co-occurrence structure is rich in long frequent patterns.
    """
    if n <= 0 or n_items <= 0:
        raise ValueError("n and n_items must be positive")
    if mean_len <= 0 or mean_len > n_items:
        raise ValueError("mean_len must be in (0, n_items]")
    rng = random.Random(seed)
    population = list(range(n_items))
    weights = [1.0 / (rank + 1) ** 1.25 for rank in population]
    items = [Item(i, f"Inspection item {i + 1:02d}") for i in population]
    transactions = []
    for index in range(n):
        length = max(1, min(n_items, round(rng.gauss(mean_len, mean_len / 4))))
        chosen: set[int] = set()
        while len(chosen) < length:
            chosen.update(rng.choices(population, weights, k=length - len(chosen)))
        transactions.append(Transaction(f"RND-{index + 1:06d}", frozenset(chosen)))
    return TransactionDatabase(items, transactions)
