import itertools
import math
from types import SimpleNamespace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from nspdpp.core import SequenceDatabase
from nspdpp.explicit import (ConfigurationError, DualKernel, build_explicit_kernel, esp,
                             explicit_subset_prob, log_esp, pattern_diversity_explicit,
                             pattern_quality_explicit, write_kernel_csv)
from nspdpp.graph import ElementStats, build_graph
from nspdpp.miner import mine_nsp


def test_esp_examples():
    assert esp([1, 2, 3], 1)[1, 3] == 6
    assert esp([1, 2, 3], 3)[3, 3] == 6
    assert np.all(esp([4, 5], 0)[0] == 1)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(0, 5, allow_nan=False), min_size=0, max_size=10), st.integers(0, 10))
def test_esp_matches_enumeration(values, k):
    table = esp(values, k)
    for l in range(k + 1):
        assert table[l, -1] == pytest.approx(oracles.esp_brute(values, l), rel=1e-9, abs=1e-9)


def test_log_esp_survives_large_spectra():
    lam = np.full(40, 1e120)
    assert log_esp(lam, 30) == pytest.approx(math.log(math.comb(40, 30)) + 30 * math.log(1e120))
    assert log_esp([1.0, 2.0], 3) == -math.inf


def _stub(q_elem, q_pair=None):
    return SimpleNamespace(q_elem=np.asarray(q_elem, float), q_pair=q_pair or {})


def test_quality_examples():
    assert pattern_quality_explicit([0], _stub([0.5])) == pytest.approx(1.64872, abs=1e-5)
    assert pattern_quality_explicit([0, 1], _stub([0.0, 0.0], {(0, 1): 0.0})) == 1.0
    q = pattern_quality_explicit([0, 1], _stub([0.5, 0.5], {(0, 1): 0.2}))
    assert q == pytest.approx(3.32012, abs=1e-5)
    with pytest.raises(ConfigurationError):
        pattern_quality_explicit([0, 1], _stub([0.5, 0.5]))


def test_hand_kernel():
    kern = DualKernel.from_factors(np.array([2.0]), np.array([[1.0], [0.0]]))
    assert np.allclose(kern.dual, [[4, 0], [0, 0]])
    assert np.allclose(kern.eigenvalues, [4, 0])
    assert kern.rank == 1
    ortho = DualKernel.from_factors(np.array([1.0, 3.0]), np.eye(2))
    assert np.allclose(ortho.dual, np.diag([1.0, 9.0]))


def test_diagonal_subset_probability():
    kern = DualKernel.from_factors(np.sqrt([1.0, 2.0, 3.0]), np.eye(3))
    assert explicit_subset_prob([0, 1], kern, 2) == pytest.approx(2 / 11)
    ident = DualKernel.from_factors(np.ones(4), np.eye(4))
    assert all(explicit_subset_prob([i], ident, 1) == pytest.approx(0.25) for i in range(4))


def _random_kernel(rng, n=8, d=6):
    q = rng.uniform(0.2, 3.0, n)
    phi = rng.normal(size=(d, n))
    phi /= np.linalg.norm(phi, axis=0)
    return DualKernel.from_factors(q, phi)


@pytest.mark.parametrize("seed", range(5))
def test_subset_probabilities_sum_to_one(seed):
    rng = np.random.default_rng(seed)
    kern = _random_kernel(rng, n=int(rng.integers(4, 11)))
    for k in (1, 2, 3):
        total = sum(explicit_subset_prob(Y, kern, k)
                    for Y in itertools.combinations(range(kern.n_items), k))
        assert total == pytest.approx(1.0, abs=1e-9)


def test_duplicate_pattern_has_zero_probability():
    rng = np.random.default_rng(9)
    kern = _random_kernel(rng)
    B = np.concatenate([kern.features, kern.features[:, :1]], axis=1)
    dup = DualKernel(B, np.ones(B.shape[1]), B)
    assert explicit_subset_prob([0, 3, 8], dup, 3) == pytest.approx(0.0, abs=1e-9)


def test_quality_scaling_leaves_probabilities_unchanged():
    rng = np.random.default_rng(4)
    kern = _random_kernel(rng)
    scaled = DualKernel.from_factors(kern.quality * 7.0, kern.diversity)
    Y = [1, 4, 6]
    det = np.linalg.det(kern.primal(Y))
    assert np.linalg.det(scaled.primal(Y)) == pytest.approx(det * 7.0 ** 6, rel=1e-9)
    assert scaled.subset_prob(Y, 3) == pytest.approx(kern.subset_prob(Y, 3), rel=1e-9)


def test_dual_and_primal_spectra_agree():
    rng = np.random.default_rng(2)
    kern = _random_kernel(rng, n=10, d=6)
    primal = np.sort(np.linalg.eigvalsh(kern.primal()))[::-1][:kern.rank]
    assert np.allclose(primal, kern.positive_eigenvalues, rtol=1e-8, atol=1e-8)


def test_kernel_from_mined_collection(tmp_path):
    rng = np.random.default_rng(0)
    db = SequenceDatabase.from_lists(oracles.random_micro_db(rng, 40, 5, 5), 5)
    coll = mine_nsp(db, 0.3, max_len=3)
    g = build_graph(coll)
    stats = ElementStats(g, db)
    kern = build_explicit_kernel(coll, g, stats)
    assert kern.features.shape == (len(g.nodes), len(coll))
    norms = np.linalg.norm(kern.diversity, axis=0)
    assert np.all((np.abs(norms - 1) < 1e-9) | (norms == 0))
    for pid, path in enumerate(g.paths[:20]):
        assert np.allclose(kern.diversity[:, pid], pattern_diversity_explicit(path, stats))
        assert kern.quality[pid] == pytest.approx(pattern_quality_explicit(path, stats))
    write_kernel_csv(kern, tmp_path / "k.csv")
    rows = (tmp_path / "k.csv").read_text().splitlines()
    assert len(rows) == 1 + len(g.nodes) + len(coll)
