"""Bundled example datasets for distribution-transformer inspection analytics.

Files:
  sample_transactions.csv  small hand-written failed-inspection records
  planted_rules.json       15-rule generator spec for synthetic benchmarks;
                           antecedents carry "(series N)" qualifiers because
                           several published rule rows reuse an antecedent
                           with frequency requirements no single item could
                           satisfy at once
  reference_rules.json     the same 15 rules with their plain display names,
                           for knowledge-graph ingestion
  inspection_triples.tsv   curated triples describing one transformer
                           inspection chain
"""

from __future__ import annotations

from importlib.resources import files
from pathlib import Path


def read_text(name: str) -> str:
    return files(__package__).joinpath(name).read_text(encoding="utf-8")


def path(name: str) -> Path:
    return Path(str(files(__package__).joinpath(name)))
