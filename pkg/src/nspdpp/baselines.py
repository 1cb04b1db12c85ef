"""Reference selectors: Top-k, SAPNSP contribution, k-means clustering, k-SDPP."""
from __future__ import annotations

import numpy as np

from .core import SequenceDatabase
from .explicit import DualKernel
from .miner import PatternCollection
from .sampler import EXPLICIT_ONLY, SelectionResult, select_subset

MAX_ITER = 100
SHIFT_TOL = 1e-6


def _check_k(k, coll):
    if not 0 <= k <= len(coll):
        raise ValueError(f"k={k} outside 0..{len(coll)}")


def _by_support(coll: PatternCollection) -> list[int]:
    return sorted(range(len(coll)), key=lambda i: (-coll.supports[i], i))


def top_k(coll: PatternCollection, k: int) -> SelectionResult:
    _check_k(k, coll)
    return SelectionResult(tuple(_by_support(coll)[:k]), None, None, "topk")


def contributions(coll: PatternCollection, db: SequenceDatabase) -> list[float]:
    """``sup(P) * lift(prefix, last)``; length-1 patterns score their support.

    A zero denominator (possible for negative fragments) counts as lift 1.
    """
    cache: dict = {}

    def sup(elements):
        if elements not in cache:
            cache[elements] = float(db.index.contains(elements).mean())
        return cache[elements]

    out = []
    for pid, p in enumerate(coll):
        s = coll.supports[pid]
        if len(p) == 1:
            out.append(s)
            continue
        denom = sup(p.elements[:-1]) * sup(p.elements[-1:])
        out.append(s * (s / denom) if denom > 0 else s)
    return out


def sapnsp_select(coll: PatternCollection, db: SequenceDatabase, k: int) -> SelectionResult:
    _check_k(k, coll)
    contrib = contributions(coll, db)
    order = sorted(range(len(coll)), key=lambda i: (-contrib[i], -coll.supports[i], i))
    return SelectionResult(tuple(order[:k]), None, None, "sapnsp",
                           {"contribution": [contrib[i] for i in order[:k]]})


def _kmeans_pp(X: np.ndarray, k: int, rng) -> np.ndarray:
    n = X.shape[0]
    centers = [X[rng.integers(n)]]
    d2 = ((X - centers[0]) ** 2).sum(axis=1)
    for _ in range(1, k):
        total = d2.sum()
        j = rng.integers(n) if total <= 0 else rng.choice(n, p=d2 / total)
        centers.append(X[j])
        d2 = np.minimum(d2, ((X - X[j]) ** 2).sum(axis=1))
    return np.array(centers)


def kmeans(X: np.ndarray, k: int, rng) -> tuple[np.ndarray, int]:
    """Lloyd iterations from k-means++ seeds; returns (labels, iterations)."""
    centers = _kmeans_pp(X, k, rng)
    labels = np.zeros(X.shape[0], dtype=int)
    for it in range(1, MAX_ITER + 1):
        d2 = (centers ** 2).sum(axis=1)[None, :] - 2 * X @ centers.T
        labels = np.argmin(d2, axis=1)
        new = centers.copy()
        for c in range(k):
            members = labels == c
            if members.any():
                new[c] = X[members].mean(axis=0)
        shift = np.sqrt(((new - centers) ** 2).sum(axis=1)).max()
        centers = new
        if shift < SHIFT_TOL:
            break
    return labels, it


def kmeans_select(coll: PatternCollection, explicit: DualKernel, k: int,
                  seed: int | None = None, rng=None) -> SelectionResult:
    """Cluster the unit explicit diversity vectors and keep each cluster's most frequent pattern."""
    _check_k(k, coll)
    rng = rng if rng is not None else np.random.default_rng(seed)
    if k == 0:
        return SelectionResult((), seed, None, "kmeans")
    X = explicit.diversity.T
    labels, iters = kmeans(X, k, rng)
    ranked = _by_support(coll)
    chosen, empty = [], 0
    for c in range(k):
        members = [i for i in ranked if labels[i] == c and i not in chosen]
        if members:
            chosen.append(members[0])
        else:
            empty += 1
    for i in ranked:
        if len(chosen) == k:
            break
        if i not in chosen:
            chosen.append(i)
    return SelectionResult(tuple(chosen), seed, None, "kmeans",
                           {"iterations": iters, "refilled": empty})


def ksdpp_select(kernels: tuple[DualKernel, DualKernel], k: int,
                 seed: int | None = None, rng=None) -> SelectionResult:
    res = select_subset(kernels, EXPLICIT_ONLY, k, seed=seed, rng=rng)
    res.mode = "ksdpp"
    return res
