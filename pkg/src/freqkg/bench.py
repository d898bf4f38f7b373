"""Wall-clock comparison of the two miners with a correctness gate.

A report only exists when both algorithms returned identical
itemset-to-count mappings; otherwise the run aborts, since timing a
wrong answer is meaningless. Times are the minimum over repetitions
after one warm-up run, which suppresses scheduler noise better than the
mean.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass

from .apriori import mine_apriori
from .fpgrowth import mine_fpgrowth
from .rules import derive_rules
from .txdb import MiningConfig, TransactionDatabase


class ResultMismatchError(RuntimeError):
    """The miners disagreed; correctness precedes performance."""


@dataclass(frozen=True)
class BenchReport:
    n_transactions: int
    n_items: int
    avg_transaction_len: float
    fpgrowth_seconds: float
    apriori_seconds: float
    speedup: float
    results_equal: bool
    itemset_count: int
    rule_count: int

    def __post_init__(self):
        if not self.results_equal:
            raise ValueError("a benchmark report requires equal mining results")
        if self.fpgrowth_seconds <= 0 or self.apriori_seconds <= 0:
            raise ValueError("recorded times must be positive")

    def to_text(self) -> str:
        rows = [
            ("transactions", f"{self.n_transactions}"),
            ("items", f"{self.n_items}"),
            ("avg transaction length", f"{self.avg_transaction_len:.2f}"),
            ("fp-growth time (s)", f"{self.fpgrowth_seconds:.4f}"),
            ("apriori time (s)", f"{self.apriori_seconds:.4f}"),
            ("speedup (apriori / fp-growth)", f"{self.speedup:.2f}"),
            ("results equal", "yes" if self.results_equal else "no"),
            ("frequent itemsets", f"{self.itemset_count}"),
            ("strong rules", f"{self.rule_count}"),
        ]
        width = max(len(label) for label, _ in rows)
        return "\n".join(f"{label.ljust(width)}  {value}" for label, value in rows) + "\n"

    def to_json(self) -> str:
        payload = {
            "n_transactions": self.n_transactions,
            "n_items": self.n_items,
            "avg_transaction_len": self.avg_transaction_len,
            "fpgrowth_seconds": self.fpgrowth_seconds,
            "apriori_seconds": self.apriori_seconds,
            "speedup": self.speedup,
            "results_equal": self.results_equal,
            "itemset_count": self.itemset_count,
            "rule_count": self.rule_count,
        }
        return json.dumps(payload, indent=2) + "\n"


def _best_time(run, repetitions: int):
    result = run()  # warm-up, also the result we keep
    best = float("inf")
    for _ in range(repetitions):
        started = time.perf_counter()
        run()
        best = min(best, time.perf_counter() - started)
    return max(best, 1e-9), result


def run_benchmark(
    db: TransactionDatabase,
    config: MiningConfig,
    repetitions: int = 3,
) -> BenchReport:
    """Time both miners on the same data and verify they agree exactly.

    Raises ResultMismatchError when the itemset->count mappings differ and
    ValueError for an empty database or non-positive repetitions.
    """
    if db.n == 0:
        raise ValueError("cannot benchmark an empty database")
    if repetitions < 1:
        raise ValueError(f"repetitions must be >= 1, got {repetitions}")

    fp_seconds, fp_result = _best_time(lambda: mine_fpgrowth(db, config), repetitions)
    ap_seconds, ap_result = _best_time(lambda: mine_apriori(db, config), repetitions)

    if fp_result != ap_result:
        only_fp = set(fp_result) - set(ap_result)
        only_ap = set(ap_result) - set(fp_result)
        differing = {
            k for k in set(fp_result) & set(ap_result) if fp_result[k] != ap_result[k]
        }
        raise ResultMismatchError(
            "miners disagree: "
            f"{len(only_fp)} itemsets only in fp-growth, "
            f"{len(only_ap)} only in apriori, {len(differing)} with different counts"
        )

    rules = derive_rules(fp_result, config, db.n, db.item_names)
    return BenchReport(
        n_transactions=db.n,
        n_items=len(db.items),
        avg_transaction_len=db.total_items / db.n,
        fpgrowth_seconds=fp_seconds,
        apriori_seconds=ap_seconds,
        speedup=ap_seconds / fp_seconds,
        results_equal=True,
        itemset_count=len(fp_result),
        rule_count=len(rules),
    )
