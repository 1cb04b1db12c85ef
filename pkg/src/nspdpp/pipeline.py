"""Selection context shared by every selector, plus the selector registry."""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import baselines
from .core import SequenceDatabase
from .explicit import DualKernel, build_explicit_kernel
from .graph import ElementStats, NspGraph, build_graph
from .implicit import ImplicitModel, build_implicit_kernel, mine_link_universe
from .metrics import evaluate
from .miner import PatternCollection
from .sampler import ALGORITHM1, EXACT, MixWeights, SelectionResult, mix_weights, select_subset

log = logging.getLogger(__name__)

MODES = ("topk", "sapnsp", "kmeans", "ksdpp", "einsp")
ALL_MODES = MODES + ("exact",)


@dataclass(frozen=True)
class ModelParams:
    epsilon: float = 0.0
    min_link_sup: float | None = None  # defaults to half the mining threshold
    max_link_size: int = 2


def link_min_sup(db: SequenceDatabase, coll: PatternCollection, params: ModelParams) -> float:
    if params.min_link_sup is not None:
        return params.min_link_sup
    base = coll.source_min_sup or min(coll.supports)
    return max(base / 2, 1.0 / len(db))


def implicit_model(db: SequenceDatabase, coll: PatternCollection,
                   params: ModelParams = ModelParams()) -> ImplicitModel:
    universe = mine_link_universe(db, link_min_sup(db, coll, params), params.max_link_size)
    return ImplicitModel(db, universe, params.epsilon)


class SelectionContext:
    """Lazily built graph, statistics, kernels and weights for one collection."""

    def __init__(self, coll: PatternCollection, db: SequenceDatabase,
                 params: ModelParams = ModelParams()):
        if len(coll) == 0:
            raise ValueError("empty pattern collection")
        self.coll = coll
        self.db = db
        self.params = params

    @cached_property
    def graph(self) -> NspGraph:
        return build_graph(self.coll)

    @cached_property
    def stats(self) -> ElementStats:
        return ElementStats(self.graph, self.db)

    @cached_property
    def explicit(self) -> DualKernel:
        return build_explicit_kernel(self.coll, self.graph, self.stats)

    @cached_property
    def model(self) -> ImplicitModel:
        return implicit_model(self.db, self.coll, self.params)

    @cached_property
    def _implicit(self):
        return build_implicit_kernel(self.coll, self.model)

    @property
    def implicit(self) -> DualKernel:
        return self._implicit[0]

    @property
    def q_impl(self) -> np.ndarray:
        return self._implicit[1]

    @property
    def kernels(self) -> tuple[DualKernel, DualKernel]:
        return (self.explicit, self.implicit)

    @cached_property
    def weights(self) -> MixWeights:
        return mix_weights(self.coll.supports, self.q_impl)

    def prepare(self, modes=MODES) -> None:
        """Build everything the requested modes need (for timing and reuse)."""
        if set(modes) & {"kmeans", "ksdpp", "einsp", "exact"}:
            self.explicit
        if set(modes) & {"einsp", "exact"}:
            self.weights

    def select(self, mode: str, k: int, seed: int | None = None) -> SelectionResult:
        if mode == "topk":
            return baselines.top_k(self.coll, k)
        if mode == "sapnsp":
            return baselines.sapnsp_select(self.coll, self.db, k)
        if mode == "kmeans":
            return baselines.kmeans_select(self.coll, self.explicit, k, seed)
        if mode == "ksdpp":
            return baselines.ksdpp_select(self.kernels, k, seed)
        if mode == "einsp":
            res = select_subset(self.kernels, self.weights, k, seed, ALGORITHM1)
            res.mode = "einsp"
            return res
        if mode == "exact":
            res = select_subset(self.kernels, self.weights, k, seed, EXACT)
            res.mode = "exact"
            return res
        raise ValueError(f"unknown selector {mode!r}")

    def evaluate(self, res: SelectionResult) -> dict[str, float]:
        return evaluate([self.coll[i] for i in res.chosen], self.db, self.model)


def run_modes(ctx: SelectionContext, modes, k: int, seed: int) -> list[dict]:
    """Select and evaluate with each mode; one metrics row per mode."""
    rows = []
    for mode in modes:
        t0 = time.perf_counter()
        res = ctx.select(mode, k, seed)
        elapsed = time.perf_counter() - t0
        row = {"selector": mode, "k": k, "seed": seed}
        row.update(ctx.evaluate(res))
        row["wall_time"] = elapsed
        row["_result"] = res
        rows.append(row)
    return rows
