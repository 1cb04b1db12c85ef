"""Dual kernels, elementary symmetric polynomials and explicit k-DPP scoring."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import Pattern
from .graph import ElementStats, NspGraph
from .miner import PatternCollection

RANK_TOL = 1e-10


class ConfigurationError(ValueError):
    pass


@dataclass
class DualKernel:
    """Feature matrix ``B`` (features x patterns), dual ``C = B B^T`` and its spectrum.

    ``L = B^T B`` is never formed; eigenpairs of ``C`` are sorted by
    decreasing eigenvalue and ``rank`` counts eigenvalues above ``RANK_TOL``.
    """

    features: np.ndarray
    quality: np.ndarray = field(repr=False)
    diversity: np.ndarray = field(repr=False)
    dual: np.ndarray = field(init=False, repr=False)
    eigenvalues: np.ndarray = field(init=False)
    eigenvectors: np.ndarray = field(init=False, repr=False)
    rank: int = field(init=False)

    def __post_init__(self):
        B = self.features
        self.dual = B @ B.T
        if B.shape[0] == 0:
            vals, vecs = np.zeros(0), np.zeros((0, 0))
        else:
            vals, vecs = np.linalg.eigh(self.dual)
        order = np.argsort(vals)[::-1]
        vals = np.clip(vals[order], 0.0, None)
        self.eigenvalues = vals
        self.eigenvectors = vecs[:, order]
        self.rank = int(np.count_nonzero(vals > RANK_TOL))

    @classmethod
    def from_factors(cls, quality: np.ndarray, diversity: np.ndarray) -> "DualKernel":
        """``diversity`` is (features x patterns) with unit (or zero) columns."""
        quality = np.asarray(quality, dtype=float)
        diversity = np.asarray(diversity, dtype=float)
        return cls(diversity * quality[None, :], quality, diversity)

    @property
    def n_items(self) -> int:
        return self.features.shape[1]

    @property
    def positive_eigenvalues(self) -> np.ndarray:
        return self.eigenvalues[:self.rank]

    def primal(self, ids: Sequence[int] | None = None) -> np.ndarray:
        B = self.features if ids is None else self.features[:, list(ids)]
        return B.T @ B

    def log_normalizer(self, k: int) -> float:
        return log_esp(self.positive_eigenvalues, k)

    def subset_prob(self, ids: Sequence[int], k: int) -> float:
        return explicit_subset_prob(ids, self, k)


def esp(eigenvalues: Sequence[float], k: int) -> np.ndarray:
    """Table ``e[l, n]``: l-th elementary symmetric polynomial of the first n values."""
    if k < 0:
        raise ValueError("k must be non-negative")
    lam = np.asarray(eigenvalues, dtype=float)
    n = lam.size
    e = np.zeros((k + 1, n + 1))
    e[0, :] = 1.0
    for m in range(1, n + 1):
        e[1:, m] = e[1:, m - 1] + lam[m - 1] * e[:-1, m - 1]
    return e


def log_esp(eigenvalues: Sequence[float], k: int) -> float:
    """``log e_k`` of the values, rescaled so large spectra do not overflow."""
    lam = np.asarray(eigenvalues, dtype=float)
    if k == 0:
        return 0.0
    if lam.size < k or np.count_nonzero(lam > 0) < k:
        return -math.inf
    top = np.sort(lam)[::-1][:k]
    scale = float(np.exp(np.log(top).mean()))
    return k * math.log(scale) + math.log(esp(lam / scale, k)[k, -1])


def pattern_quality_explicit(path: Sequence[int], stats: ElementStats) -> float:
    """``exp(sum of element qualities + sum of adjacent pair qualities)``."""
    try:
        total = sum(stats.q_elem[n] for n in path)
        total += sum(stats.q_pair[(a, b)] for a, b in zip(path, path[1:]))
    except (KeyError, IndexError) as exc:
        raise ConfigurationError(f"no statistics for {exc.args[0]!r}") from None
    return math.exp(total)


def unit(v: np.ndarray) -> np.ndarray:
    norm = np.linalg.norm(v)
    return v / norm if norm > 0 else np.zeros_like(v)


def pattern_diversity_explicit(path: Sequence[int], stats: ElementStats) -> np.ndarray:
    """Normalised sum of the element eNEMI rows; all-zero sums stay zero."""
    return unit(stats.enemi_table[list(path)].sum(axis=0))


def build_explicit_kernel(coll: PatternCollection, graph: NspGraph,
                          stats: ElementStats) -> DualKernel:
    if len(coll) == 0:
        raise ValueError("empty pattern collection")
    quality = np.array([pattern_quality_explicit(path, stats) for path in graph.paths])
    table = stats.enemi_table
    raw = np.stack([table[list(path)].sum(axis=0) for path in graph.paths], axis=1)
    norms = np.linalg.norm(raw, axis=0)
    diversity = np.divide(raw, norms, out=np.zeros_like(raw), where=norms > 0)
    return DualKernel.from_factors(quality, diversity)


def explicit_subset_prob(ids: Sequence[int], kernel: DualKernel, k: int) -> float:
    """``det(L_Y) / e_k`` for a k-subset ``Y`` of pattern ids."""
    ids = list(ids)
    if len(ids) != k or len(set(ids)) != k:
        raise ValueError(f"subset must contain exactly k={k} distinct ids")
    if k > kernel.rank:
        raise ValueError(f"k={k} exceeds kernel rank {kernel.rank}")
    sign, logdet = np.linalg.slogdet(kernel.primal(ids))
    if sign <= 0:
        return 0.0
    return float(math.exp(logdet - kernel.log_normalizer(k)))


def write_kernel_csv(kernel: DualKernel, path) -> None:
    import csv

    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["kind", "index", "value", "diversity_norm"])
        for n, lam in enumerate(kernel.eigenvalues):
            w.writerow(["eigenvalue", n, f"{lam:.10g}", ""])
        norms = np.linalg.norm(kernel.diversity, axis=0)
        for pid, (q, nv) in enumerate(zip(kernel.quality, norms)):
            w.writerow(["pattern", pid, f"{q:.10g}", f"{nv:.6g}"])
