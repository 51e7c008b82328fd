import math
from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vclust.kmeans import (
    Dissimilarity,
    InitialSet,
    cosine_dissimilarity,
    distinct_rows,
    entropy,
    enumerate_initial_sets,
    euclidean,
    kmeans,
    pairwise,
    sample_initial_sets,
    top_entropy_fraction,
    with_entropy,
)
from vclust.relation import Partition

from conftest import load


def test_euclidean_values():
    assert euclidean((0, 0), (3, 4)) == 5.0
    assert euclidean((1, 2), (1, 2)) == 0.0
    pts = load("iris_relation_50_embedding")
    assert euclidean(pts[0], pts[1]) == pytest.approx(math.sqrt(0.577**2 + 1), abs=1e-12)
    with pytest.raises(ValueError):
        euclidean((1, 2), (1, 2, 3))


def test_cosine_values():
    assert cosine_dissimilarity((1, 2), (2, 4)) == pytest.approx(0.0)
    assert cosine_dissimilarity((1, 0), (0, 3)) == pytest.approx(1.0)
    assert cosine_dissimilarity((1, -2), (-1, 2)) == pytest.approx(0.0)
    assert cosine_dissimilarity((0, 0), (1, 1)) == 1.0
    with pytest.raises(ValueError):
        cosine_dissimilarity((1, 2), (1,))


def test_pairwise_agrees_with_scalar():
    rng = np.random.default_rng(1)
    x, y = rng.normal(size=(5, 3)), rng.normal(size=(4, 3))
    for kind, fn in (("euclidean", euclidean), ("cosine", cosine_dissimilarity)):
        d = pairwise(x, y, kind)
        for i in range(5):
            for j in range(4):
                assert d[i, j] == pytest.approx(fn(x[i], y[j]), abs=1e-12)


def test_dissimilarity_coerce():
    assert Dissimilarity.coerce("E") is Dissimilarity.EUCLIDEAN
    assert Dissimilarity.coerce("cosine") is Dissimilarity.COSINE
    with pytest.raises(ValueError):
        Dissimilarity.coerce("manhattan")


def test_relation_embedding_one_round():
    part = kmeans(load("iris_relation_50_embedding"), (0, 1))
    assert part.clusters() == [[0, 2, 3], [1]]
    assert part.provenance["iterations"] == 1
    assert part.provenance["converged"]
    assert part.provenance["objective"] == [pytest.approx(0.0, abs=1e-24)]


def test_pc_points_every_pair():
    pts = load("iris_pc_points")
    for pair in combinations(range(4), 2):
        assert kmeans(pts, pair).clusters() == [[0, 2, 3], [1]]


def test_single_cluster():
    part = kmeans(np.random.default_rng(0).normal(size=(6, 2)), (3,))
    assert part.labels == (0,) * 6


def test_identical_initial_points_repaired():
    pts = np.array([[0.0, 0.0], [0.0, 0.0], [5.0, 5.0]])
    part = kmeans(pts, (0, 1))
    assert part.clusters() == [[0, 1], [2]]


def test_rejects_too_many_clusters():
    pts = np.array([[0.0], [0.0], [1.0]])
    with pytest.raises(ValueError, match="distinct"):
        kmeans(pts, (0, 1, 2))
    with pytest.raises(ValueError):
        kmeans(pts, (0, 5))


def test_iteration_cap_flags_non_convergence():
    rng = np.random.default_rng(2)
    pts = rng.normal(size=(40, 2))
    part = kmeans(pts, (0, 1, 2), max_iter=1)
    assert part.provenance["iterations"] == 1
    full = kmeans(pts, (0, 1, 2))
    assert full.provenance["converged"]
    if full.provenance["iterations"] > 1:
        assert not part.provenance["converged"]


def test_initial_set_sorted_and_distinct():
    assert InitialSet((3, 1, 2)).indices == (1, 2, 3)
    with pytest.raises(ValueError):
        InitialSet((1, 1))


def test_enumeration():
    sets = enumerate_initial_sets(4, 2)
    assert [s.indices for s in sets] == [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
    assert len(enumerate_initial_sets(9, 4)) == 126
    assert len(enumerate_initial_sets(5, 5)) == 1
    with pytest.raises(ValueError):
        enumerate_initial_sets(3, 4)


def test_sampling():
    a = sample_initial_sets(123, 7, 300, seed=5)
    b = sample_initial_sets(123, 7, 300, seed=5)
    assert len(a) == 300
    assert all(len(set(s.indices)) == 7 for s in a)
    assert [s.indices for s in a] == [s.indices for s in b]
    assert [s.indices for s in sample_initial_sets(123, 7, 300, seed=6)] != [s.indices for s in a]
    with pytest.raises(ValueError, match="enumerate"):
        sample_initial_sets(5, 5, 10, seed=0)


def test_entropy_direct_summation_oracle():
    pts = load("iris_pc_points")
    dists = [math.dist(pts[i], pts[j]) for i, j in combinations(range(4), 2)]
    total = sum(dists)
    oracle = -sum(d / total * math.log(d / total) for d in dists)
    assert entropy(pts, (0, 1, 2, 3)) == pytest.approx(oracle, abs=1e-12)


def test_entropy_edge_cases():
    assert entropy(np.zeros((3, 2)), (0, 1, 2)) == 0.0
    with pytest.raises(ValueError):
        entropy(np.eye(3), (0,))


def test_top_entropy_fraction():
    pts = load("houses_pc_table").T
    sets = with_entropy(pts, enumerate_initial_sets(9, 4))
    top = top_entropy_fraction(sets, 40 / 126)
    assert len(top) == 40
    cut = top[-1].entropy
    assert all(s.entropy <= cut for s in sets if s not in top)
    assert len(top_entropy_fraction(sets, 1.0)) == 126
    pts12 = np.random.default_rng(0).normal(size=(12, 3))
    sampled = with_entropy(pts12, sample_initial_sets(12, 5, 300, seed=1))
    assert len(top_entropy_fraction(sampled, 1 / 3)) == 100
    with pytest.raises(ValueError):
        top_entropy_fraction([], 0.5)
    with pytest.raises(ValueError):
        top_entropy_fraction(enumerate_initial_sets(4, 2), 0.5)


def test_top_entropy_ties_by_index():
    sets = [InitialSet((2, 3), 1.0), InitialSet((0, 1), 1.0), InitialSet((1, 2), 0.5)]
    assert [s.indices for s in top_entropy_fraction(sets, 1 / 3)] == [(0, 1)]


def test_distinct_rows():
    assert distinct_rows(load("iris_relation_50_embedding")) == [0, 1]


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 6), st.floats(0.1, 50))
def test_entropy_scale_and_motion_invariant(seed, k, scale):
    rng = np.random.default_rng(seed)
    pts = rng.normal(size=(8, 3))
    idx = tuple(range(k))
    q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    moved = pts @ q + rng.normal(size=3)
    e = entropy(pts, idx)
    assert entropy(pts * scale, idx) == pytest.approx(e, abs=1e-9)
    assert entropy(moved, idx) == pytest.approx(e, abs=1e-9)
    assert entropy(pts * scale, idx, "cosine") == pytest.approx(entropy(pts, idx, "cosine"), abs=1e-9)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_cosine_normalization_invariant(seed):
    rng = np.random.default_rng(seed)
    a, b = rng.normal(size=(2, 4))
    assert cosine_dissimilarity(a, b) == pytest.approx(
        cosine_dissimilarity(a / np.linalg.norm(a), b / np.linalg.norm(b)), abs=1e-12
    )


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from(["euclidean", "cosine"]))
def test_permutation_invariance(seed, kind):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(4, 15))
    k = int(rng.integers(1, 4))
    pts = rng.normal(size=(n, 2))
    init = rng.choice(n, size=k, replace=False)
    perm = rng.permutation(n)
    inv = np.argsort(perm)
    a = kmeans(pts, init, kind)
    b = kmeans(pts[perm], inv[init], kind)
    back = Partition(tuple(b.labels[inv[i]] for i in range(n)))
    # labels may differ, the grouping may not
    assert back == a


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_cosine_terminates(seed):
    rng = np.random.default_rng(seed)
    pts = rng.normal(size=(20, 3))
    part = kmeans(pts, (0, 1, 2), "cosine")
    prov = part.provenance
    # either a fixed point or a detected cycle, well before the cap
    assert prov["converged"] != prov["cycled"]
    assert prov["iterations"] < 1000
    assert part.k <= 3


def test_cosine_cycle_flagged():
    pts = np.random.default_rng(0).normal(size=(20, 3))
    part = kmeans(pts, (0, 1, 2), "cosine")
    assert part.provenance["cycled"] and not part.provenance["converged"]
