"""Association-rule metrics and strong-rule derivation.

Support is the fraction of transactions containing antecedent and
consequent together; confidence is the fraction of antecedent
transactions that also contain the consequent; lift is confidence over
the consequent's support (1.0 means independence). Rules keep the exact
integer counts and only turn into decimals when rendered.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Mapping, Sequence

from .apriori import join_candidates, prune_candidates
from .txdb import MiningConfig, ParseError

RELATED_ITEMS_RELATION = "Related items"


def support(count_ab: int, n: int) -> float:
    """Fraction of the n transactions containing the full itemset."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if not 0 <= count_ab <= n:
        raise ValueError(f"count_ab must be in [0, {n}], got {count_ab}")
    return count_ab / n


def confidence(count_ab: int, count_a: int) -> float:
    """Conditional probability of the consequent given the antecedent."""
    if count_a < 1:
        raise ValueError(f"count_a must be >= 1, got {count_a}")
    if not 0 <= count_ab <= count_a:
        raise ValueError(f"count_ab must be in [0, {count_a}], got {count_ab}")
    return count_ab / count_a


def lift(confidence_ab: float, support_b: float) -> float:
    """Confidence over consequent support; symmetric under A/B exchange."""
    if support_b <= 0:
        raise ValueError(f"support_b must be positive, got {support_b}")
    return confidence_ab / support_b


@dataclass(frozen=True)
class AssociationRule:
    """A directed rule between disjoint named itemsets with exact counts."""

    antecedent: tuple[str, ...]
    consequent: tuple[str, ...]
    count_ab: int
    count_a: int
    count_b: int
    n: int

    def __post_init__(self):
        if not self.antecedent or not self.consequent:
            raise ValueError("rule sides may not be empty")
        if set(self.antecedent) & set(self.consequent):
            raise ValueError(f"rule sides overlap: {self.antecedent} => {self.consequent}")
        if not 0 < self.count_ab <= min(self.count_a, self.count_b) <= self.n:
            raise ValueError(
                f"inconsistent counts: ab={self.count_ab} a={self.count_a} "
                f"b={self.count_b} n={self.n}"
            )

    @property
    def support(self) -> float:
        return self.count_ab / self.n

    @property
    def confidence(self) -> float:
        return self.count_ab / self.count_a

    @property
    def lift(self) -> float:
        # confidence / support(B), rearranged to one division so the
        # value is bitwise identical when A and B are exchanged
        return (self.count_ab * self.n) / (self.count_a * self.count_b)


@dataclass(frozen=True)
class RuleRecord:
    """A rule read back from a rules file; lift may be unknown."""

    antecedent: tuple[str, ...]
    consequent: tuple[str, ...]
    support: float
    confidence: float
    lift: float | None = None


def derive_rules(
    frequent: Mapping[tuple[int, ...], int],
    config: MiningConfig,
    n: int,
    names: Sequence[str],
) -> list[AssociationRule]:
    """Derive every strong rule from a downward-closed frequent-itemset map.

    For each itemset of size >= 2, consequents grow level-wise: a failing
    consequent never spawns larger ones, which is sound because shrinking
    the antecedent can only lower confidence. Raises ValueError when a
    required subset count is missing (the input was not downward-closed).
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    lookup = dict(frequent)

    def count_of(items: tuple[int, ...]) -> int:
        try:
            return lookup[items]
        except KeyError:
            raise ValueError(
                f"frequent itemsets are not downward-closed: no count for {items}"
            ) from None

    def named(ids: tuple[int, ...]) -> tuple[str, ...]:
        return tuple(sorted(names[i] for i in ids))

    rules: list[AssociationRule] = []
    for itemset in sorted(lookup, key=lambda t: (len(t), t)):
        if len(itemset) < 2:
            continue
        count_all = lookup[itemset]
        members = set(itemset)

        def emit(consequent_ids: tuple[int, ...]) -> bool:
            antecedent_ids = tuple(i for i in itemset if i not in set(consequent_ids))
            count_a = count_of(antecedent_ids)
            if count_all / count_a < config.min_confidence:
                return False
            rules.append(
                AssociationRule(
                    antecedent=named(antecedent_ids),
                    consequent=named(consequent_ids),
                    count_ab=count_all,
                    count_a=count_a,
                    count_b=count_of(consequent_ids),
                    n=n,
                )
            )
            return True

        level = [(item,) for item in itemset if emit((item,))]
        size = 1
        while level and size + 1 < len(itemset):
            candidates = prune_candidates(join_candidates(level), level)
            level = [c for c in candidates if emit(c)]
            size += 1
    return rules


def rank_rules(rules: Sequence[AssociationRule]) -> list[AssociationRule]:
    """Presentation order: confidence desc, support desc, then names."""
    return sorted(
        rules,
        key=lambda r: (-r.confidence, -r.support, r.antecedent, r.consequent),
    )


def filter_by_rule_size(rules: Sequence[AssociationRule], max_size: int) -> list[AssociationRule]:
    """Keep rules whose sides each have at most max_size items."""
    if max_size < 1:
        raise ValueError(f"max_size must be >= 1, got {max_size}")
    return [r for r in rules if len(r.antecedent) <= max_size and len(r.consequent) <= max_size]


def rules_to_json(rules: Sequence[AssociationRule]) -> str:
    payload = [
        {
            "antecedent": list(r.antecedent),
            "consequent": list(r.consequent),
            "support": r.support,
            "confidence": r.confidence,
            "lift": r.lift,
            "count_ab": r.count_ab,
            "count_a": r.count_a,
            "n": r.n,
        }
        for r in rules
    ]
    return json.dumps(payload, indent=2, ensure_ascii=False) + "\n"


def parse_rules_json(text: str) -> list[RuleRecord]:
    """Read a rules file back as records (counts are not required)."""
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as err:
        raise ParseError(f"invalid JSON: {err}") from err
    if not isinstance(payload, list):
        raise ParseError("expected a JSON array of rule objects")
    records = []
    for pos, entry in enumerate(payload):
        if not isinstance(entry, dict):
            raise ParseError(f"rule {pos}: expected an object")
        try:
            antecedent = entry["antecedent"]
            consequent = entry["consequent"]
            support_value = float(entry["support"])
            confidence_value = float(entry["confidence"])
        except (KeyError, TypeError, ValueError) as err:
            raise ParseError(f"rule {pos}: {err}") from err
        if not isinstance(antecedent, list) or not isinstance(consequent, list):
            raise ParseError(f"rule {pos}: antecedent and consequent must be arrays")
        lift_value = entry.get("lift")
        records.append(
            RuleRecord(
                antecedent=tuple(str(x) for x in antecedent),
                consequent=tuple(str(x) for x in consequent),
                support=support_value,
                confidence=confidence_value,
                lift=None if lift_value is None else float(lift_value),
            )
        )
    return records


def render_rules_table(rules: Sequence[AssociationRule]) -> str:
    """Aligned text table with percent columns at two decimals."""
    header = ("Antecedent", "Consequent", "Support", "Confidence", "Lift")
    rows = [
        (
            " + ".join(r.antecedent),
            " + ".join(r.consequent),
            f"{r.support * 100:.2f}%",
            f"{r.confidence * 100:.2f}%",
            f"{r.lift:.2f}",
        )
        for r in rules
    ]
    widths = [
        max(len(header[col]), *(len(row[col]) for row in rows)) if rows else len(header[col])
        for col in range(len(header))
    ]

    def fmt(row):
        return "  ".join(cell.ljust(widths[col]) for col, cell in enumerate(row)).rstrip()

    lines = [fmt(header), fmt(tuple("-" * w for w in widths))]
    lines.extend(fmt(row) for row in rows)
    return "\n".join(lines) + "\n"
