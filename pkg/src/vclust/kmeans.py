"""k-means over embeddings with Euclidean or cosine dissimilarity, plus initial-set tools.

Initial sets are plain index tuples into the embedding rows. They can be
enumerated exhaustively, sampled with a seed, and ranked by the entropy of
the pairwise dissimilarities among their points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum
from itertools import combinations

import numpy as np

from .relation import Partition
from .spectral import Embedding

__all__ = [
    "Dissimilarity",
    "InitialSet",
    "euclidean",
    "cosine_dissimilarity",
    "pairwise",
    "kmeans",
    "enumerate_initial_sets",
    "sample_initial_sets",
    "entropy",
    "with_entropy",
    "top_entropy_fraction",
    "distinct_rows",
]

MAX_ITER = 1000
NORM_TOL = 1e-12
DISTINCT_TOL = 1e-6


class Dissimilarity(str, Enum):
    EUCLIDEAN = "euclidean"
    COSINE = "cosine"

    @classmethod
    def coerce(cls, value) -> "Dissimilarity":
        if isinstance(value, cls):
            return value
        key = str(value).lower()
        aliases = {"e": "euclidean", "c": "cosine"}
        return cls(aliases.get(key, key))


@dataclass(frozen=True)
class InitialSet:
    indices: tuple[int, ...]
    entropy: float | None = None

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        if len(set(idx)) != len(idx):
            raise ValueError(f"initial points must be pairwise distinct, got {idx}")
        object.__setattr__(self, "indices", tuple(sorted(idx)))

    def __len__(self) -> int:
        return len(self.indices)


def _points(points) -> np.ndarray:
    return points.points if isinstance(points, Embedding) else np.asarray(points, dtype=float)


def euclidean(a, b) -> float:
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return float(np.sqrt(np.sum((a - b) ** 2)))


def cosine_dissimilarity(a, b) -> float:
    """``1 - cos^2(a, b)``; a zero vector is maximally dissimilar to everything."""
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na <= NORM_TOL or nb <= NORM_TOL:
        return 1.0
    cos = float(a @ b) / (na * nb)
    return float(min(1.0, max(0.0, 1.0 - cos * cos)))


def pairwise(x, y, kind) -> np.ndarray:
    """Dissimilarity between every row of ``x`` and every row of ``y``."""
    kind = Dissimilarity.coerce(kind)
    x, y = np.atleast_2d(x), np.atleast_2d(y)
    if kind is Dissimilarity.EUCLIDEAN:
        diff = x[:, None, :] - y[None, :, :]
        return np.sqrt(np.sum(diff * diff, axis=2))
    nx = np.linalg.norm(x, axis=1)
    ny = np.linalg.norm(y, axis=1)
    zero = (nx[:, None] <= NORM_TOL) | (ny[None, :] <= NORM_TOL)
    denom = np.where(zero, 1.0, nx[:, None] * ny[None, :])
    cos = (x @ y.T) / denom
    d = np.clip(1.0 - cos * cos, 0.0, 1.0)
    d[zero] = 1.0
    return d


def distinct_rows(points, tol: float = DISTINCT_TOL) -> list[int]:
    """Index of the first occurrence of every distinct row (rows closer than ``tol`` coincide)."""
    x = _points(points)
    reps: list[int] = []
    for i, row in enumerate(x):
        if not any(np.linalg.norm(row - x[j]) <= tol for j in reps):
            reps.append(i)
    return reps


def _objective(x, labels, centroids, kind) -> float:
    d = pairwise(x, centroids, kind)[np.arange(len(x)), labels]
    if kind is Dissimilarity.EUCLIDEAN:
        return float(np.sum(d * d))
    return float(np.sum(d))


def _repair_empty(x, labels, centroids, kind) -> None:
    k = len(centroids)
    for j in range(k):
        if np.any(labels == j):
            continue
        sizes = np.bincount(labels, minlength=k)
        own = pairwise(x, centroids, kind)[np.arange(len(x)), labels]
        own[sizes[labels] <= 1] = -np.inf
        far = int(np.argmax(own))
        labels[far] = j
        centroids[j] = x[far]


def kmeans(points, init, diss="euclidean", max_iter: int = MAX_ITER) -> Partition:
    """Lloyd iteration started from the rows listed in ``init``.

    Each point goes to the centroid with the smallest dissimilarity (ties to
    the lower centroid index); centroids are arithmetic means. A cluster
    that empties is re-seeded with the point farthest from its own centroid.
    The returned partition's provenance records ``iterations`` (assignment
    rounds that changed labels), ``converged``, ``cycled`` and the
    ``objective`` after each update (squared distances for Euclidean, plain
    dissimilarities for cosine). Mean centroids do not always decrease the
    cosine objective, so assignments can cycle; a revisited assignment stops
    the run early with ``converged`` false and ``cycled`` true.
    """
    kind = Dissimilarity.coerce(diss)
    x = _points(points)
    idx = init.indices if isinstance(init, InitialSet) else tuple(sorted(int(i) for i in init))
    if not np.all(np.isfinite(x)):
        raise ValueError("points must be finite")
    k = len(idx)
    if k < 1:
        raise ValueError("need at least one initial point")
    if len(set(idx)) != k or min(idx) < 0 or max(idx) >= len(x):
        raise ValueError(f"invalid initial indices {idx} for {len(x)} points")
    if k > len(distinct_rows(x)):
        raise ValueError(f"k={k} exceeds the number of distinct points")

    centroids = x[list(idx)].copy()
    labels = None
    history: list[float] = []
    iterations = 0
    converged = False
    cycled = False
    seen: set[bytes] = set()
    for _ in range(max_iter):
        new = np.argmin(pairwise(x, centroids, kind), axis=1)
        _repair_empty(x, new, centroids, kind)
        if labels is not None and np.array_equal(new, labels):
            converged = True
            break
        key = new.tobytes()
        if key in seen:
            # the update is deterministic, so a repeated assignment loops forever
            cycled = True
            break
        seen.add(key)
        labels = new
        iterations += 1
        for j in range(k):
            centroids[j] = x[labels == j].mean(axis=0)
        history.append(_objective(x, labels, centroids, kind))
    else:
        # cap reached: check whether the last update already settled
        new = np.argmin(pairwise(x, centroids, kind), axis=1)
        converged = bool(np.array_equal(new, labels))

    return Partition(
        tuple(int(v) for v in labels),
        {
            "initial_set": list(idx),
            "dissimilarity": kind.value,
            "iterations": iterations,
            "converged": bool(converged),
            "cycled": cycled,
            "objective": history,
        },
    )


def enumerate_initial_sets(c: int, k: int) -> list[InitialSet]:
    """All ``C(c, k)`` index sets, lexicographic."""
    if not 1 <= k <= c:
        raise ValueError(f"need 1 <= k <= c, got k={k}, c={c}")
    return [InitialSet(t) for t in combinations(range(c), k)]


def sample_initial_sets(c: int, k: int, m: int, seed: int) -> list[InitialSet]:
    """``m`` uniformly drawn ``k``-subsets of ``range(c)``; repeats across draws are allowed."""
    if m < 1:
        raise ValueError("m must be at least 1")
    if not 1 <= k <= c:
        raise ValueError(f"need 1 <= k <= c, got k={k}, c={c}")
    if math.comb(c, k) <= m:
        raise ValueError(
            f"C({c},{k}) = {math.comb(c, k)} <= {m}: enumerate the initial sets instead of sampling"
        )
    rng = np.random.default_rng(seed)
    return [InitialSet(rng.choice(c, size=k, replace=False)) for _ in range(m)]


def entropy(points, init, diss="euclidean") -> float:
    """Shannon entropy (natural log) of the normalized pairwise dissimilarities of the set."""
    kind = Dissimilarity.coerce(diss)
    x = _points(points)
    idx = list(init.indices if isinstance(init, InitialSet) else init)
    if len(idx) < 2:
        raise ValueError("entropy needs at least two points")
    sub = x[idx]
    d = pairwise(sub, sub, kind)[np.tril_indices(len(idx), -1)]
    total = float(np.sum(d))
    if total <= 0.0:
        return 0.0
    p = d / total
    p = p[p > 0]
    return float(-np.sum(p * np.log(p)))


def with_entropy(points, sets, diss="euclidean") -> list[InitialSet]:
    return [replace(s, entropy=entropy(points, s, diss)) for s in sets]


def top_entropy_fraction(sets, fraction: float) -> list[InitialSet]:
    """The ``ceil(fraction * len(sets))`` sets of largest entropy.

    Ties are ordered by the index tuples, so the cut is deterministic. The
    result is ranked, highest entropy first.
    """
    sets = list(sets)
    if not sets:
        raise ValueError("no initial sets given")
    if not 0.0 < fraction <= 1.0:
        raise ValueError(f"fraction must lie in (0, 1], got {fraction}")
    if any(s.entropy is None for s in sets):
        raise ValueError("entropies must be filled in first (see with_entropy)")
    keep = min(len(sets), math.ceil(fraction * len(sets) - 1e-9))
    ranked = sorted(sets, key=lambda s: (-s.entropy, s.indices))
    return ranked[:keep]
