"""Seedable IBM-style synthetic sequence generator.

A small pool of "maximal potential sequences" is drawn over a Zipf-weighted
item universe; every output sequence is spliced together from randomly
chosen pool members, with per-item corruption and resampled element sizes.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .core import SequenceDatabase

RNG_ALGORITHM = "numpy.PCG64/SeedSequence"
CORRUPTION = 0.25
ZIPF_EXPONENT = 1.0


@dataclass(frozen=True)
class DataFactors:
    C: float = 10  # mean elements per sequence
    T: float = 6  # mean items per element
    S: float = 8  # mean length of potential sequences
    I: float = 8  # mean items per element of potential sequences
    DB: int = 10_000
    N: int = 100
    seed: int = 0

    def __post_init__(self):
        for name in ("C", "T", "S", "I", "DB", "N"):
            if not getattr(self, name) > 0:
                raise ValueError(f"factor {name} must be positive")
        if self.N < 2:
            raise ValueError("N must be at least 2")
        if int(self.DB) != self.DB or int(self.N) != self.N:
            raise ValueError("DB and N must be integers")
        if self.T > self.N:
            raise ValueError(f"T={self.T} exceeds the item universe N={self.N}")

    @property
    def name(self) -> str:
        def fmt(v):
            return f"{v:g}"
        db = f"{self.DB / 1000:g}k" if self.DB >= 1000 else f"{self.DB}"
        return (f"C{fmt(self.C)}_T{fmt(self.T)}_S{fmt(self.S)}_I{fmt(self.I)}"
                f"_DB{db}_N{self.N / 1000:g}k")

    @property
    def pool_size(self) -> int:
        return max(1, round(self.N / 10))


BASE_FACTORS = DataFactors()


def _poisson_at_least_one(rng, lam, upper=None) -> int:
    v = max(1, int(rng.poisson(lam)))
    return min(v, upper) if upper else v


def _draw_items(rng, n: int, k: int, p=None) -> list[int]:
    return (rng.choice(n, size=k, replace=False, p=p) + 1).tolist()


def _potential_pool(f: DataFactors, rng, weights) -> list[list[list[int]]]:
    pool = []
    for _ in range(f.pool_size):
        length = _poisson_at_least_one(rng, f.S)
        pool.append([_draw_items(rng, f.N, _poisson_at_least_one(rng, f.I, f.N), weights)
                     for _ in range(length)])
    return pool


def _one_sequence(f: DataFactors, rng, pool) -> tuple[tuple[int, ...], ...]:
    n_el = _poisson_at_least_one(rng, f.C)
    out = []
    while len(out) < n_el:
        source = pool[rng.integers(len(pool))]
        for potential in source:
            if len(out) == n_el:
                break
            items = set()
            for it in potential:
                items.add(int(rng.integers(1, f.N + 1)) if rng.random() < CORRUPTION else it)
            target = _poisson_at_least_one(rng, f.T, f.N)
            items = sorted(items)
            if len(items) > target:
                items = sorted(rng.choice(items, size=target, replace=False).tolist())
            while len(items) < target:
                extra = int(rng.integers(1, f.N + 1))
                if extra not in items:
                    items.append(extra)
            out.append(tuple(sorted(items)))
    return tuple(out)


def generate(f: DataFactors) -> SequenceDatabase:
    """Generate ``f.DB`` sequences over items ``1..f.N``; deterministic per ``f.seed``.

    Each sequence draws from its own spawned seed, so the first ``m``
    sequences do not depend on ``f.DB``.
    """
    root = np.random.SeedSequence(f.seed)
    pool_seed, seq_root = root.spawn(2)
    pool_rng = np.random.Generator(np.random.PCG64(pool_seed))
    ranks = pool_rng.permutation(f.N) + 1
    weights = 1.0 / ranks.astype(float) ** ZIPF_EXPONENT
    weights /= weights.sum()
    pool = _potential_pool(f, pool_rng, weights)
    seqs = tuple(_one_sequence(f, np.random.Generator(np.random.PCG64(s)), pool)
                 for s in seq_root.spawn(int(f.DB)))
    return SequenceDatabase(seqs, int(f.N))


def metadata(f: DataFactors) -> dict:
    return {
        "factors": asdict(f),
        "name": f.name,
        "rng": RNG_ALGORITHM,
        "pool_size": f.pool_size,
        "corruption": CORRUPTION,
        "zipf_exponent": ZIPF_EXPONENT,
    }


def write_dataset(db: SequenceDatabase, f: DataFactors, out) -> Path:
    """Write the sequence file and its ``.meta.json`` sidecar; returns the sidecar path."""
    from .formats import write_sequences

    out = Path(out)
    write_sequences(db, out)
    meta = out.with_name(out.name + ".meta.json")
    meta.write_text(json.dumps(metadata(f), indent=2, sort_keys=True) + "\n")
    return meta
