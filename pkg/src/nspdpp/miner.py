"""Level-wise positive and negative sequential pattern mining.

Positive patterns grow one item per level (GSP style) with apriori pruning;
negative candidates come from negating non-adjacent element subsets of each
frequent positive pattern, so every negative pattern has a frequent
positive partner.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import Element, Itemset, Pattern, SequenceDatabase

log = logging.getLogger(__name__)

DEFAULT_MAX_LEN = 8
_EPS = 1e-12

Key = tuple[Itemset, ...]


@dataclass
class PatternCollection:
    """Canonically ordered, duplicate-free patterns; ids are list positions."""

    patterns: list[Pattern]
    supports: list[float]
    source_min_sup: float
    _ids: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if len(self.patterns) != len(self.supports):
            raise ValueError("one support per pattern required")
        self._ids = {p: i for i, p in enumerate(self.patterns)}
        if len(self._ids) != len(self.patterns):
            raise ValueError("duplicate patterns in collection")

    @classmethod
    def build(cls, patterns: Sequence[Pattern], db: SequenceDatabase, min_sup: float,
              known: Sequence[float | None] | None = None) -> "PatternCollection":
        """Deduplicate, sort canonically and fill in supports missing from ``known``."""
        sup: dict[Pattern, float] = {}
        known = known or [None] * len(patterns)
        for p, s in zip(patterns, known):
            if p not in sup:
                sup[p] = float(db.index.contains(p.elements).mean()) if s is None else float(s)
        ordered = sorted(sup, key=Pattern.sort_key)
        return cls(ordered, [sup[p] for p in ordered], float(min_sup))

    def __len__(self):
        return len(self.patterns)

    def __iter__(self):
        return iter(self.patterns)

    def __getitem__(self, pid: int) -> Pattern:
        return self.patterns[pid]

    def id_of(self, p: Pattern) -> int:
        return self._ids[p]

    def subset(self, ids: Sequence[int]) -> "PatternCollection":
        ps = [self.patterns[i] for i in ids]
        order = sorted(range(len(ps)), key=lambda i: ps[i].sort_key())
        return PatternCollection([ps[i] for i in order],
                                 [self.supports[ids[i]] for i in order], self.source_min_sup)


def _key(p: Pattern) -> Key:
    return tuple(e.items for e in p.elements)


def _subpatterns(key: Key):
    """All patterns with one item removed (elements that empty out vanish)."""
    for j, items in enumerate(key):
        for drop in range(len(items)):
            rest = items[:drop] + items[drop + 1:]
            yield key[:j] + ((rest,) if rest else ()) + key[j + 1:]


def _check_min_sup(min_sup: float):
    if not 0 < min_sup <= 1:
        raise ValueError(f"min_sup must lie in (0, 1], got {min_sup}")


def _positive_level_wise(db: SequenceDatabase, min_sup: float, max_len: int):
    """Return ``{key: containment vector}`` for all frequent positive patterns."""
    idx = db.index
    n = idx.n_seq
    need = min_sup * n - _EPS * n
    width = idx.width

    frequent_items = [i for i in range(1, db.universe_size + 1)
                      if idx.element_occurs((i,)).sum() >= need]
    # key -> (end of full match, end of match without the last element)
    level: dict[Key, tuple[np.ndarray, np.ndarray]] = {}
    start = np.full(n, -1, dtype=np.int32)
    for i in frequent_items:
        level[((i,),)] = (idx.match_end([(i,)]), start)

    found: dict[Key, np.ndarray] = {}
    while level:
        for key, (end, _) in level.items():
            found[key] = end < width
        nxt: dict[Key, tuple[np.ndarray, np.ndarray]] = {}
        for key, (end, prefix_end) in level.items():
            last = key[-1]
            for i in frequent_items:
                cands = []
                if len(key) < max_len:
                    cands.append((key + ((i,),), end, (i,)))
                if i > last[-1]:
                    cands.append((key[:-1] + (last + (i,),), prefix_end, last + (i,)))
                for ckey, base, tail in cands:
                    if any(sub not in level for sub in _subpatterns(ckey)):
                        continue
                    cend = idx.match_end([tail], base)
                    if np.count_nonzero(cend < width) >= need:
                        nxt[ckey] = (cend, base)
        log.debug("level with %d patterns -> %d candidates kept", len(level), len(nxt))
        level = nxt
    return found


def _as_pattern(key: Key, negated=()) -> Pattern:
    return Pattern(tuple(Element(items, j in negated) for j, items in enumerate(key)))


def mine_psp(db: SequenceDatabase, min_sup: float,
             max_len: int = DEFAULT_MAX_LEN) -> PatternCollection:
    """All positive sequential patterns with support >= ``min_sup``."""
    _check_min_sup(min_sup)
    found = _positive_level_wise(db, min_sup, max_len)
    pats = [_as_pattern(k) for k in found]
    sups = [float(v.mean()) for v in found.values()]
    return PatternCollection.build(pats, db, min_sup, known=sups)


def negation_sets(m: int):
    """Non-empty sets of pairwise non-adjacent positions that leave a positive one."""
    for r in range(1, (m + 1) // 2 + 1):
        for combo in itertools.combinations(range(m), r):
            if r == m:
                continue
            if all(b - a > 1 for a, b in zip(combo, combo[1:])):
                yield combo


def mine_nsp(db: SequenceDatabase, min_sup: float,
             max_len: int = DEFAULT_MAX_LEN) -> PatternCollection:
    """Positive and negative patterns with support >= ``min_sup``.

    Negative candidates negate elements of frequent positive patterns; the
    positive skeleton and the exclusion patterns are sub-patterns of that
    frequent pattern, so their containment vectors are already known.
    """
    _check_min_sup(min_sup)
    found = _positive_level_wise(db, min_sup, max_len)
    n = db.index.n_seq
    need = min_sup * n - _EPS * n

    pats, sups = [], []
    for key, hit in found.items():
        pats.append(_as_pattern(key))
        sups.append(float(hit.mean()))
        for neg in negation_sets(len(key)):
            mps = tuple(items for j, items in enumerate(key) if j not in neg)
            cover = found[mps].copy()
            for j in neg:
                partner = tuple(items for t, items in enumerate(key) if t == j or t not in neg)
                cover &= ~found[partner]
            count = np.count_nonzero(cover)
            if count >= need:
                pats.append(_as_pattern(key, set(neg)))
                sups.append(count / n)
    log.info("mined %d patterns (%d positive) at min_sup=%g", len(pats), len(found), min_sup)
    return PatternCollection.build(pats, db, min_sup, known=sups)
