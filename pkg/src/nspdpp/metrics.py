"""Evaluation metrics for a selected pattern subset."""
from __future__ import annotations

from typing import Sequence

import numpy as np

from .core import Pattern, SequenceDatabase


class UndefinedMetric(ValueError):
    pass


def _require(S):
    if not S:
        raise UndefinedMetric("metric is undefined for an empty subset")


def coverage_mask(S: Sequence[Pattern], db: SequenceDatabase) -> np.ndarray:
    hit = np.zeros(len(db), dtype=bool)
    for p in S:
        hit |= db.index.contains(p.elements)
    return hit


def sequence_coverage(S: Sequence[Pattern], db: SequenceDatabase) -> float:
    """Fraction of sequences containing at least one pattern of ``S``."""
    if not S:
        return 0.0
    return float(coverage_mask(S, db).mean())


def item_coverage(S: Sequence[Pattern], db: SequenceDatabase) -> float:
    """Share of the database's items mentioned (with either polarity) by ``S``."""
    present = db.items_present()
    if not S or not present:
        return 0.0
    mentioned = frozenset().union(*(p.items() for p in S))
    return len(mentioned & present) / len(present)


def avg_item_frequency(S: Sequence[Pattern], db: SequenceDatabase | None = None) -> float:
    """Mean over mentioned items of the share of patterns mentioning them."""
    _require(S)
    counts: dict[int, int] = {}
    for p in S:
        for i in p.items():
            counts[i] = counts.get(i, 0) + 1
    return sum(c / len(S) for c in counts.values()) / len(counts)


def avg_pattern_size(S: Sequence[Pattern]) -> float:
    _require(S)
    return float(np.mean([len(p) for p in S]))


def avg_irs(S: Sequence[Pattern], model) -> float:
    """Mean implicit pattern quality over ``S``."""
    _require(S)
    from .implicit import implicit_quality

    return float(np.mean([implicit_quality(p, model) for p in S]))


METRIC_NAMES = ("SC", "IC", "AF", "avg_size", "avg_IRS")


def evaluate(S: Sequence[Pattern], db: SequenceDatabase, model=None) -> dict[str, float]:
    out = {
        "SC": sequence_coverage(S, db),
        "IC": item_coverage(S, db),
        "AF": avg_item_frequency(S, db),
        "avg_size": avg_pattern_size(S),
    }
    out["avg_IRS"] = avg_irs(S, model) if model is not None else float("nan")
    return out
