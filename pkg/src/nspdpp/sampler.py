"""Two-phase mixed k-DPP selection over the explicit and implicit kernels."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .explicit import DualKernel, esp

log = logging.getLogger(__name__)

DEGENERATE_MASS = 1e-12
ALGORITHM1 = "algorithm1"
EXACT = "exact-mixture"


class InfeasibleK(ValueError):
    """k exceeds the usable rank of an active kernel, or the collection size."""


@dataclass(frozen=True)
class MixWeights:
    w_e: float
    w_i: float

    def __post_init__(self):
        if self.w_e < 0 or self.w_i < 0 or abs(self.w_e + self.w_i - 1) > 1e-9:
            raise ValueError(f"weights must be non-negative and sum to 1: {self}")

    def __iter__(self):
        return iter((self.w_e, self.w_i))


EXPLICIT_ONLY = MixWeights(1.0, 0.0)


@dataclass
class SelectionResult:
    chosen: tuple[int, ...]
    seed: int | None
    weights: MixWeights | None
    mode: str
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(set(self.chosen)) != len(self.chosen):
            raise ValueError("selection contains duplicate ids")


def mix_weights(supports: Sequence[float], q_impl: Sequence[float]) -> MixWeights:
    """Balance the two kernels by mean pattern support vs mean implicit quality."""
    if len(supports) == 0:
        raise ValueError("empty collection")
    f = float(np.mean(supports))
    r = float(np.mean(q_impl)) if len(q_impl) else 0.0
    if f + r <= 0:
        return MixWeights(0.5, 0.5)
    return MixWeights(f / (f + r), r / (f + r))


def _draw_index(weights: np.ndarray, rng) -> int:
    """Index drawn proportionally to non-negative ``weights`` (inverse CDF)."""
    cdf = np.cumsum(weights)
    j = int(np.searchsorted(cdf, rng.random() * cdf[-1], side="right"))
    return min(j, weights.size - 1)


def _check_feasible(k, kernels, w):
    for kern, wd in zip(kernels, w):
        if wd > 0 and k > kern.rank:
            raise InfeasibleK(f"k={k} exceeds kernel rank {kern.rank}")


def _scaled_table(lam: np.ndarray, k: int, size: int) -> np.ndarray:
    """ESP table of ``lam`` zero-padded to ``size``; scaling leaves the ratios intact."""
    padded = np.zeros(size)
    padded[:lam.size] = lam
    top = np.sort(lam)[::-1][:k]
    top = top[top > 0]
    scale = float(np.exp(np.log(top).mean())) if top.size else 1.0
    return esp(padded / scale, k), padded / scale


def sample_index_subset(k: int, eig_e, eig_i, w: MixWeights, rng) -> list[int]:
    """Draw ``J`` (0-based, sorted) with the mixed k-DPP index recursion.

    Iterates ``n`` from the last index down; index ``n`` is accepted with
    probability ``sum_d w_d lam_n e_{r-1,n-1} / e_{r,n}``, ``r`` being the
    number still to pick. Only positive eigenvalues are used; both lists
    must be sorted in decreasing order.
    """
    comps = []
    for lam, wd in ((eig_e, w.w_e), (eig_i, w.w_i)):
        lam = np.asarray(lam, dtype=float)
        lam = lam[lam > 1e-10]
        if wd > 0:
            if k > lam.size:
                raise InfeasibleK(f"k={k} exceeds usable rank {lam.size}")
            comps.append((lam, wd))
    if k == 0:
        return []
    size = max(lam.size for lam, _ in comps)
    tables = []
    for lam, wd in comps:
        table, scaled = _scaled_table(lam, k, size)
        tables.append((scaled, table, wd))
    J = []
    r = k
    for n in range(size, 0, -1):
        if n == r:
            J.extend(range(n))
            break
        p = 0.0
        for lam, table, wd in tables:
            denom = table[r, n]
            if denom > 0:
                p += wd * lam[n - 1] * table[r - 1, n - 1] / denom
        if rng.random() < p:
            J.append(n - 1)
            r -= 1
            if r == 0:
                break
    return sorted(J)


class _Basis:
    """One component's selected eigen-directions: dual preimages plus primal image."""

    def __init__(self, kernel: DualKernel, J: Sequence[int], weight: float):
        cols = [n for n in J if n < kernel.rank]
        lam = kernel.eigenvalues[cols]
        # B^T v / sqrt(lambda) has unit norm in pattern space
        self.V = kernel.eigenvectors[:, cols] / np.sqrt(lam)[None, :]
        self.U = kernel.features.T @ self.V
        self.weight = weight

    @property
    def size(self) -> int:
        return self.V.shape[1]

    def probs(self) -> np.ndarray:
        return (self.U ** 2).sum(axis=1) / self.size

    def reduce(self, j: int) -> bool:
        """Restrict to the subspace orthogonal to pattern ``j``; True if degenerate."""
        a = self.U[j]
        m = int(np.argmax(np.abs(a)))
        degenerate = float(a @ a) / self.size < DEGENERATE_MASS
        keep = [c for c in range(self.size) if c != m]
        if degenerate:
            V, U = self.V[:, keep], self.U[:, keep]
        else:
            coef = a[keep] / a[m]
            V = self.V[:, keep] - np.outer(self.V[:, m], coef)
            U = self.U[:, keep] - np.outer(self.U[:, m], coef)
        if U.shape[1]:
            # Gram matrix of the primal images equals V^T C V
            q, r = np.linalg.qr(U)
            fix = np.linalg.solve(r, np.eye(r.shape[0]))
            V, U = V @ fix, U @ fix
        self.V, self.U = V, U
        return degenerate


def _algorithm1(kernels, w: MixWeights, k: int, rng) -> tuple[list[int], dict]:
    J = sample_index_subset(k, kernels[0].eigenvalues, kernels[1].eigenvalues, w, rng)
    bases = [_Basis(kern, J, wd) for kern, wd in zip(kernels, w) if wd > 0]
    n_items = kernels[0].n_items
    sizes = [b.size for b in bases]
    chosen: list[int] = []
    steps = []
    for _ in range(k):
        raw = np.zeros(n_items)
        live = [b for b in bases if b.size]
        for b in live:
            raw += b.weight * b.probs()
        total = float(raw.sum())
        raw[chosen] = 0.0
        mass = float(raw.sum())
        fallback = mass <= 0 or not np.isfinite(mass)
        if fallback:
            log.warning("selection mass vanished; choosing uniformly among the rest")
            raw = np.ones(n_items)
            raw[chosen] = 0.0
            mass = float(raw.sum())
        p = raw / mass
        j = _draw_index(p, rng)
        degenerate = [bool(b.reduce(j)) for b in live]
        chosen.append(j)
        steps.append({"pattern": j, "prob": float(p[j]), "prenorm_sum": total,
                      "degenerate": degenerate, "fallback": fallback})
    diag = {"index_subset": J, "basis_sizes": sizes, "steps": steps}
    return chosen, diag


def _gram_schmidt(V: np.ndarray) -> np.ndarray:
    Q = np.empty_like(V)
    for c in range(V.shape[1]):
        v = V[:, c] - Q[:, :c] @ (Q[:, :c].T @ V[:, c])
        Q[:, c] = v / np.sqrt(v @ v)
    return Q


class PrimalKDPP:
    """Textbook k-DPP on the full ``L = B^T B`` (validation path).

    The eigendecomposition and ESP table are computed once, so repeated
    draws only pay for the two sampling phases.
    """

    def __init__(self, kernel: DualKernel, k: int):
        vals, vecs = np.linalg.eigh(kernel.primal())
        vals = np.where(vals > 1e-10, vals, 0.0)
        if np.count_nonzero(vals) < k:
            raise InfeasibleK(f"k={k} exceeds the rank of L")
        self.k = k
        self.vecs = vecs
        self.vals = (vals / vals.max()).tolist() if vals.max() > 0 else vals.tolist()
        self.table = esp(self.vals, k).tolist()

    def draw(self, rng) -> list[int]:
        vals, E = self.vals, self.table
        N = len(vals)
        picked = []
        l = self.k
        for n in range(N, 0, -1):
            if l == 0:
                break
            if n == l or rng.random() < vals[n - 1] * E[l - 1][n - 1] / E[l][n]:
                picked.append(n - 1)
                l -= 1
        V = self.vecs[:, picked]
        out = []
        while V.shape[1]:
            p = (V * V).sum(axis=1)
            p[out] = 0
            j = _draw_index(p, rng)
            out.append(j)
            m = int(np.argmax(np.abs(V[j])))
            Vm = V[:, m]
            keep = [c for c in range(V.shape[1]) if c != m]
            V = V[:, keep] - np.outer(Vm, V[j, keep] / Vm[j])
            # one column needs no orthonormalising: its weights are renormalised
            if V.shape[1] > 1:
                V = _gram_schmidt(V)
        return out


class ExactMixture:
    """Pick a component by weight, then draw an exact k-DPP sample from it."""

    def __init__(self, kernels: tuple[DualKernel, DualKernel], w: MixWeights, k: int):
        _check_feasible(k, kernels, w)
        self.w = w
        self.k = k
        self.parts = [PrimalKDPP(kern, k) if wd > 0 and k else None
                      for kern, wd in zip(kernels, w)]

    def draw(self, rng) -> tuple[list[int], int]:
        d = 0 if rng.random() < self.w.w_e else 1
        part = self.parts[d]
        return (part.draw(rng) if part is not None else []), d


def select_subset(kernels: tuple[DualKernel, DualKernel], w: MixWeights, k: int,
                  seed: int | None = None, mode: str = ALGORITHM1,
                  rng=None) -> SelectionResult:
    """Select ``k`` distinct pattern ids.

    ``algorithm1`` mixes the two components at each step of both sampling
    phases; ``exact-mixture`` picks one component by weight and draws an
    exact k-DPP sample from it.
    """
    n_items = kernels[0].n_items
    if k < 0 or k > n_items:
        raise InfeasibleK(f"k={k} outside 0..{n_items}")
    _check_feasible(k, kernels, w)
    rng = rng if rng is not None else np.random.default_rng(seed)
    if mode == ALGORITHM1:
        chosen, diag = _algorithm1(kernels, w, k, rng)
    elif mode == EXACT:
        chosen, d = ExactMixture(kernels, w, k).draw(rng)
        diag = {"component": ("explicit", "implicit")[d]}
    else:
        raise ValueError(f"unknown sampling mode {mode!r}")
    diag["ranks"] = [kern.rank for kern in kernels]
    return SelectionResult(tuple(chosen), seed, w, mode, diag)
