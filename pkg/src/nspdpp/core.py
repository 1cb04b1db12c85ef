"""Items, elements, sequences and negative-containment semantics.

Every probability in the package is a per-sequence frequency over a
:class:`SequenceDatabase`. Containment of a pattern with negative elements
follows the usual e-NSP reading: the positive skeleton of the pattern must
occur, and for each negated element the skeleton with that element restored
must *not* occur.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

Itemset = tuple[int, ...]
DataSequence = tuple[Itemset, ...]


@dataclass(frozen=True, order=True)
class Element:
    """A polarity-tagged itemset. ``negative`` negates the whole set."""

    items: Itemset
    negative: bool = False

    def __post_init__(self):
        items = tuple(int(i) for i in self.items)
        if not items:
            raise ValueError("element must contain at least one item")
        if any(i < 1 for i in items):
            raise ValueError(f"item ids must be >= 1, got {items}")
        if any(a >= b for a, b in zip(items, items[1:])):
            raise ValueError(f"element items must be strictly increasing, got {items}")
        object.__setattr__(self, "items", items)

    @classmethod
    def of(cls, *items: int, negative: bool = False) -> "Element":
        return cls(tuple(sorted(set(items))), negative)

    def positive(self) -> "Element":
        return Element(self.items, False) if self.negative else self

    def __str__(self):
        body = "(" + ",".join(map(str, self.items)) + ")"
        return "¬" + body if self.negative else body


@dataclass(frozen=True)
class Pattern:
    """An ordered list of elements satisfying the NSP format constraints.

    At least one positive element, and no two negative elements in a row.
    """

    elements: tuple[Element, ...]

    def __post_init__(self):
        elements = tuple(self.elements)
        object.__setattr__(self, "elements", elements)
        if not elements:
            raise ValueError("pattern must have at least one element")
        if all(e.negative for e in elements):
            raise ValueError("pattern needs at least one positive element")
        for a, b in zip(elements, elements[1:]):
            if a.negative and b.negative:
                raise ValueError("pattern has two consecutive negative elements")

    @classmethod
    def of(cls, *elements: Element | Iterable[int]) -> "Pattern":
        out = []
        for e in elements:
            out.append(e if isinstance(e, Element) else Element.of(*e))
        return cls(tuple(out))

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    @property
    def has_negative(self) -> bool:
        return any(e.negative for e in self.elements)

    def mps(self) -> tuple[Element, ...]:
        """Maximum positive subsequence: the pattern with negatives deleted."""
        return tuple(e for e in self.elements if not e.negative)

    def positive_partner(self) -> tuple[Element, ...]:
        return tuple(e.positive() for e in self.elements)

    def items(self) -> frozenset[int]:
        return frozenset(i for e in self.elements for i in e.items)

    def sort_key(self):
        return (len(self.elements), tuple((e.items, e.negative) for e in self.elements))

    def __str__(self):
        return "<" + ",".join(str(e) for e in self.elements) + ">"


def exclusion_checks(elements: Sequence[Element]) -> list[tuple[Element, ...]]:
    """Positive patterns that must be absent for ``elements`` to be contained.

    One per negative element: the positive skeleton with that element put
    back at its original position.
    """
    out = []
    for j, e in enumerate(elements):
        if e.negative:
            out.append(tuple(x.positive() for k, x in enumerate(elements)
                             if k == j or not x.negative))
    return out


# -- scalar reference semantics ----------------------------------------------

def contains_positive(s: DataSequence, p: Sequence[Itemset]) -> bool:
    """True iff ``p`` embeds into ``s`` at strictly increasing positions."""
    if not p:
        raise ValueError("pattern must be nonempty")
    j = 0
    want = set(p[0])
    for itemset in s:
        if want.issubset(itemset):
            j += 1
            if j == len(p):
                return True
            want = set(p[j])
    return False


def contains_negative(s: DataSequence, p: Sequence[Element]) -> bool:
    """Negative containment of an element list in a data sequence.

    Accepts any element list, including fragments with no positive element
    (an empty skeleton is trivially contained).
    """
    mps = [e.items for e in p if not e.negative]
    if mps and not contains_positive(s, mps):
        return False
    return not any(contains_positive(s, [e.items for e in check])
                   for check in exclusion_checks(p))


# -- database ------------------------------------------------------------------

@dataclass(frozen=True)
class SequenceDatabase:
    """Immutable corpus of positive data sequences over items ``1..universe_size``.

    ``labels[i - 1]`` is the external label of dense item ``i``.
    """

    sequences: tuple[DataSequence, ...]
    universe_size: int
    labels: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        seqs = tuple(tuple(tuple(int(i) for i in el) for el in s) for s in self.sequences)
        object.__setattr__(self, "sequences", seqs)
        if not seqs:
            raise ValueError("database must contain at least one sequence")
        for s in seqs:
            if not s:
                raise ValueError("empty data sequence")
            for el in s:
                if not el:
                    raise ValueError("empty itemset in data sequence")
                if min(el) < 1 or max(el) > self.universe_size:
                    raise ValueError(f"item outside universe 1..{self.universe_size}: {el}")
        if not self.labels:
            object.__setattr__(self, "labels",
                               tuple(str(i) for i in range(1, self.universe_size + 1)))
        elif len(self.labels) != self.universe_size:
            raise ValueError("labels must cover the whole universe")

    @classmethod
    def from_lists(cls, sequences, universe_size: int | None = None) -> "SequenceDatabase":
        seqs = tuple(tuple(tuple(sorted(set(el))) for el in s) for s in sequences)
        if universe_size is None:
            universe_size = max(max(el) for s in seqs for el in s)
        return cls(seqs, universe_size)

    def __len__(self):
        return len(self.sequences)

    @cached_property
    def index(self) -> "SequenceIndex":
        return SequenceIndex(self)

    def items_present(self) -> frozenset[int]:
        return frozenset(i for s in self.sequences for el in s for i in el)


class SequenceIndex:
    """Dense occurrence tensor plus vectorised containment over all sequences.

    ``occ[s, p, i]`` is True when item ``i`` occurs in element ``p`` of
    sequence ``s``. Containment uses leftmost greedy matching, which is
    exact for subsequence embedding.
    """

    def __init__(self, db: SequenceDatabase):
        self.n_seq = len(db)
        self.width = max(len(s) for s in db.sequences)
        self.occ = np.zeros((self.n_seq, self.width, db.universe_size + 1), dtype=bool)
        for si, s in enumerate(db.sequences):
            for pi, el in enumerate(s):
                self.occ[si, pi, list(el)] = True
        self.presence = self.occ.any(axis=1)
        self._next: dict[Itemset, np.ndarray] = {}
        self._rows = np.arange(self.n_seq)

    def element_mask(self, items: Itemset) -> np.ndarray:
        """``(n_seq, width)`` mask of positions whose itemset contains ``items``."""
        return self.occ[:, :, list(items)].all(axis=2)

    def next_match(self, items: Itemset) -> np.ndarray:
        """``nxt[s, p]``: first position >= p matching ``items``; ``width`` if none."""
        nxt = self._next.get(items)
        if nxt is None:
            w = self.width
            idx = np.where(self.element_mask(items), np.arange(w), w)
            nxt = np.empty((self.n_seq, w + 1), dtype=np.int32)
            nxt[:, :w] = np.minimum.accumulate(idx[:, ::-1], axis=1)[:, ::-1]
            nxt[:, w] = w
            self._next[items] = nxt
        return nxt

    def match_end(self, itemsets: Sequence[Itemset], start: np.ndarray | None = None) -> np.ndarray:
        """Position where a greedy embedding of ``itemsets`` ends, per sequence.

        ``start`` holds the end position of an already matched prefix (-1 for
        none). Returns ``width`` for sequences without an embedding.
        """
        pos = np.full(self.n_seq, -1, dtype=np.int32) if start is None else start
        for items in itemsets:
            nxt = self.next_match(items)
            pos = nxt[self._rows, np.minimum(pos + 1, self.width)]
        return pos

    def contains_positive(self, itemsets: Sequence[Itemset]) -> np.ndarray:
        if not itemsets:
            return np.ones(self.n_seq, dtype=bool)
        return self.match_end(itemsets) < self.width

    def contains(self, elements: Sequence[Element]) -> np.ndarray:
        """Vectorised :func:`contains_negative` over every sequence."""
        hit = self.contains_positive([e.items for e in elements if not e.negative])
        for check in exclusion_checks(elements):
            hit &= ~self.contains_positive([e.items for e in check])
        return hit

    def element_occurs(self, items: Itemset) -> np.ndarray:
        """Per-sequence flag: ``items`` lies within a single data element."""
        return self.next_match(items)[:, 0] < self.width

    def itemset_present(self, items: Iterable[int]) -> np.ndarray:
        """Per-sequence flag: every item occurs somewhere in the sequence."""
        return self.presence[:, list(items)].all(axis=1)


def support(p: Pattern | Sequence[Element], db: SequenceDatabase) -> float:
    """Fraction of sequences of ``db`` that contain ``p``."""
    elements = p.elements if isinstance(p, Pattern) else tuple(p)
    return float(db.index.contains(elements).mean())
