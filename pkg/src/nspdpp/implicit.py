"""Implicit relations: iNEMI, dependent itemsets, CIRS/IRS and the implicit kernel.

Probabilities here are per-sequence item presences: an itemset "occurs" in
a sequence when each of its items appears somewhere in it, not
necessarily in the same element.
"""
from __future__ import annotations

import itertools
import logging
from typing import Iterable, Sequence

import numpy as np

from .core import Pattern, SequenceDatabase
from .explicit import DualKernel, unit
from .graph import nemi
from .miner import PatternCollection

log = logging.getLogger(__name__)

Itemset = tuple[int, ...]


def mine_link_universe(db: SequenceDatabase, min_link_sup: float,
                       max_size: int = 2) -> list[Itemset]:
    """Itemsets up to ``max_size`` present in at least ``min_link_sup`` of the sequences."""
    if not 0 < min_link_sup <= 1:
        raise ValueError("min_link_sup must lie in (0, 1]")
    pres = db.index.presence
    n = pres.shape[0]
    need = min_link_sup * n - 1e-12 * n
    level = {(i,): pres[:, i] for i in range(1, db.universe_size + 1)
             if pres[:, i].sum() >= need}
    out = list(level)
    size = 1
    while level and size < max_size:
        nxt = {}
        keys = sorted(level)
        for a, b in itertools.combinations(keys, 2):
            if a[:-1] != b[:-1]:
                continue
            cand = a + (b[-1],)
            if any(sub not in level for sub in itertools.combinations(cand, size)):
                continue
            hit = level[a] & pres[:, b[-1]]
            if hit.sum() >= need:
                nxt[cand] = hit
        out.extend(nxt)
        level = nxt
        size += 1
    return sorted(out, key=lambda s: (len(s), s))


def inemi(i: int, Z: Iterable[int], db: SequenceDatabase) -> float:
    Z = tuple(Z)
    if i in Z:
        raise ValueError("item must not belong to the link itemset")
    idx = db.index
    xi = idx.presence[:, i]
    xz = idx.itemset_present(Z)
    return float(nemi(xi.mean(), xz.mean(), (xi & xz).mean()))


def flatten(p: Pattern) -> Itemset:
    """Item ids of every element, polarity stripped."""
    return tuple(sorted(p.items()))


class ImplicitModel:
    """Item-to-link-itemset dependencies and per-pattern implicit features.

    ``table[i, h]`` is iNEMI between item ``i`` and link itemset ``h``
    (NaN where the itemset contains the item); ``depends[i, h]`` marks
    membership of ``h`` in the dependent group of ``i``.
    """

    def __init__(self, db: SequenceDatabase, link_universe: Sequence[Itemset],
                 epsilon: float = 0.0):
        if epsilon > 0:
            log.warning("epsilon=%g is above the documented bound of 0", epsilon)
        self.db = db
        self.epsilon = float(epsilon)
        self.link_universe = [tuple(h) for h in link_universe]
        pres = db.index.presence.astype(float)
        n_items = pres.shape[1]
        if self.link_universe:
            zpres = np.stack([db.index.itemset_present(h) for h in self.link_universe],
                             axis=1).astype(float)
        else:
            zpres = np.zeros((pres.shape[0], 0))
        n = pres.shape[0]
        p_item = pres.mean(axis=0)
        p_link = zpres.mean(axis=0)
        joint = pres.T @ zpres / n
        table = nemi(p_item[:, None], p_link[None, :], joint)
        table = np.atleast_2d(table).reshape(n_items, len(self.link_universe))
        inside = np.zeros_like(table, dtype=bool)
        for h, items in enumerate(self.link_universe):
            inside[list(items), h] = True
        self.table = np.where(inside, np.nan, table)
        self.depends = ~inside & (table > self.epsilon)
        self.depends[0, :] = False
        self._irs: dict[Itemset, float] = {}

    def dependents(self, i: int) -> set[int]:
        return set(np.flatnonzero(self.depends[i]).tolist())

    def link_group(self, items: Iterable[int]) -> np.ndarray:
        """Boolean mask over the link universe: intersection of the dependent groups."""
        items = list(items)
        if not items:
            return np.zeros(len(self.link_universe), dtype=bool)
        return self.depends[items].all(axis=0)

    def cirs(self, items: Iterable[int], h: int) -> float:
        items = list(items)
        if set(items) & set(self.link_universe[h]):
            raise ValueError("link itemset must be disjoint from the itemset")
        return float(np.min(self.table[items, h]))

    def irs(self, items: Iterable[int]) -> float:
        key = tuple(sorted(set(items)))
        val = self._irs.get(key)
        if val is None:
            group = self.link_group(key)
            if group.any():
                val = float(self.table[np.ix_(list(key), group)].min(axis=0).mean())
            else:
                val = 0.0
            self._irs[key] = val
        return val

    def quality(self, flat: Itemset) -> float:
        """Max IRS over the largest implicitly related subsets of ``flat``.

        Implicitly related itemsets have at least two items and IRS > 0. A
        subset with a non-empty link group lies inside the dependent items
        of one of its link itemsets, so only those restrictions are searched.
        """
        flat = list(flat)
        if len(flat) < 2 or not self.link_universe:
            return 0.0
        sub = self.depends[flat]
        sub = sub[:, sub.sum(axis=0) >= 2]
        if not sub.shape[1]:
            return 0.0
        # link itemsets with the same dependent members give the same candidate
        groups = [tuple(flat[r] for r in np.flatnonzero(col))
                  for col in np.unique(sub.T, axis=0)]
        top = max(len(g) for g in groups)
        for size in range(top, 1, -1):
            cands = set()
            for members in groups:
                if len(members) == size:
                    cands.add(members)
                elif len(members) > size:
                    cands.update(itertools.combinations(members, size))
            best = max((v for v in map(self.irs, cands) if v > 0), default=None)
            if best is not None:
                return best
        return 0.0

    def diversity_raw(self, flat: Itemset) -> np.ndarray:
        out = np.zeros(len(self.link_universe))
        flat = list(flat)
        if not flat:
            return out
        group = self.link_group(flat)
        if group.any():
            out[group] = self.table[np.ix_(flat, group)].min(axis=0)
        return out

    def diversity(self, flat: Itemset) -> np.ndarray:
        return unit(self.diversity_raw(flat))


def dependent_itemsets(i: int, universe: Sequence[Itemset], db: SequenceDatabase,
                       epsilon: float = 0.0) -> set[int]:
    return ImplicitModel(db, universe, epsilon).dependents(i)


def implicit_quality(p: Pattern, model: ImplicitModel) -> float:
    return model.quality(flatten(p))


def implicit_diversity(p: Pattern, model: ImplicitModel) -> np.ndarray:
    return model.diversity(flatten(p))


def build_implicit_kernel(coll: PatternCollection, model: ImplicitModel):
    """Return ``(kernel, q_impl)`` with kernel columns ``q_impl * phi_impl``."""
    flats = [flatten(p) for p in coll]
    quality = np.array([model.quality(f) for f in flats])
    if model.link_universe:
        diversity = np.stack([model.diversity(f) for f in flats], axis=1)
    else:
        diversity = np.zeros((0, len(flats)))
    return DualKernel.from_factors(quality, diversity), quality


def write_implicit_csv(coll: PatternCollection, model: ImplicitModel, q_impl, path,
                       labels) -> None:
    import csv

    def name(items):
        return "{" + " ".join(labels[i - 1] for i in items) + "}"

    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["pattern", "q_impl", "link_group_size", "top_links"])
        for pid, p in enumerate(coll):
            flat = list(flatten(p))
            group = model.link_group(flat)
            top = []
            if group.any():
                strength = model.table[np.ix_(flat, group)].min(axis=0)
                hs = np.flatnonzero(group)[np.argsort(-strength, kind="stable")[:3]]
                top = [name(model.link_universe[h]) for h in hs]
            w.writerow([pid, f"{q_impl[pid]:.6g}", int(group.sum()), ";".join(top)])
