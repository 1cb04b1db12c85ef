"""NSP graph construction and element-level statistics (quality, eNEMI)."""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .core import Element, Pattern, SequenceDatabase
from .miner import PatternCollection


@dataclass(frozen=True)
class NspGraph:
    """Directed graph whose nodes are the distinct elements of a collection.

    ``edges`` counts how often element ``v`` directly follows ``u``;
    ``paths[pid]`` is pattern ``pid`` as a tuple of node ids.
    """

    nodes: tuple[Element, ...]
    edges: dict[tuple[int, int], int]
    paths: tuple[tuple[int, ...], ...]

    @cached_property
    def node_id(self) -> dict[Element, int]:
        return {e: i for i, e in enumerate(self.nodes)}

    def __len__(self):
        return len(self.nodes)


def _node_key(e: Element):
    return (e.items, e.negative)


def build_graph(coll: PatternCollection | list[Pattern]) -> NspGraph:
    patterns = list(coll)
    if not patterns:
        raise ValueError("cannot build a graph from an empty collection")
    nodes = tuple(sorted({e for p in patterns for e in p}, key=_node_key))
    ids = {e: i for i, e in enumerate(nodes)}
    paths = tuple(tuple(ids[e] for e in p) for p in patterns)
    edges = Counter((a, b) for path in paths for a, b in zip(path, path[1:]))
    return NspGraph(nodes, dict(sorted(edges.items())), paths)


def element_occurrence(e: Element, db: SequenceDatabase) -> np.ndarray:
    """Per-sequence truth of the element condition (complemented if negative)."""
    hit = db.index.element_occurs(e.items)
    return ~hit if e.negative else hit


def element_probability(e: Element, db: SequenceDatabase) -> float:
    return float(element_occurrence(e, db).mean())


def nemi(px, py, pxy):
    """Normalised pointwise mutual information with limit handling.

    Vectorised over numpy inputs. Returns +1 when all three probabilities
    are 1, 0 when a marginal is 0 or 1, -1 when the pair never co-occurs,
    else ``(h(x) + h(y) - h(x,y)) / h(x,y)`` with ``h = -log p``.
    """
    px, py, pxy = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (px, py, pxy)))
    out = np.zeros(px.shape)
    regular = (px > 0) & (px < 1) & (py > 0) & (py < 1)
    never = regular & (pxy <= 0)
    both_full = (px >= 1) & (py >= 1) & (pxy >= 1)
    ok = regular & (pxy > 0) & (pxy < 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        hx, hy, hxy = -np.log(px[ok]), -np.log(py[ok]), -np.log(pxy[ok])
        out[ok] = (hx + hy - hxy) / hxy
    out[never] = -1.0
    out[both_full] = 1.0
    np.clip(out, -1.0, 1.0, out=out)
    return out if out.ndim else float(out)


def enemi(x: Element, y: Element, db: SequenceDatabase) -> float:
    ox, oy = element_occurrence(x, db), element_occurrence(y, db)
    return float(nemi(ox.mean(), oy.mean(), (ox & oy).mean()))


class ElementStats:
    """Element and pair qualities plus the |E| x |E| eNEMI table of a graph."""

    def __init__(self, graph: NspGraph, db: SequenceDatabase):
        self.graph = graph
        occ = np.stack([element_occurrence(e, db) for e in graph.nodes]).astype(float)
        n = occ.shape[1]
        self.p_elem = occ.mean(axis=1)
        self.p_joint = (occ @ occ.T) / n
        self.q_elem = self.p_elem.copy()
        idx = db.index
        self.q_pair = {}
        for (u, v) in graph.edges:
            pair = (graph.nodes[u], graph.nodes[v])
            self.q_pair[(u, v)] = float(idx.contains(pair).mean())

    @cached_property
    def enemi_table(self) -> np.ndarray:
        p = self.p_elem
        return nemi(p[:, None], p[None, :], self.p_joint)

    def diversity_vector(self, node: int) -> np.ndarray:
        """Unnormalised eNEMI of ``node`` against every node of the graph."""
        return self.enemi_table[node]


def element_diversity_vector(e: Element, graph: NspGraph, db: SequenceDatabase) -> np.ndarray:
    if e not in graph.node_id:
        raise KeyError(f"{e} is not a node of the graph")
    x = element_occurrence(e, db)
    px = x.mean()
    out = np.empty(len(graph.nodes))
    for k, other in enumerate(graph.nodes):
        y = element_occurrence(other, db)
        out[k] = nemi(px, y.mean(), (x & y).mean())
    return out


def write_graph_csv(graph: NspGraph, stats: ElementStats, path, labels) -> None:
    import csv

    def name(e: Element):
        body = " ".join(labels[i - 1] for i in e.items)
        return "!" + body if e.negative else body

    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["kind", "source", "target", "element", "count", "q"])
        for i, e in enumerate(graph.nodes):
            w.writerow(["node", i, "", name(e), "", f"{stats.q_elem[i]:.6g}"])
        for (u, v), count in graph.edges.items():
            w.writerow(["edge", u, v, "", count, f"{stats.q_pair[(u, v)]:.6g}"])
