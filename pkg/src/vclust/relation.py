"""Threshold relations on similarity matrices and their connected components."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .matrix import as_symmetric

__all__ = [
    "RelationMatrix",
    "Partition",
    "SweepPoint",
    "build_relation",
    "is_transitive",
    "classify_relation",
    "connected_components",
    "epsilon_sweep",
    "epsilon_grid",
]

EQUIVALENCE = "equivalence"
SIMILARITY = "similarity"


@dataclass(frozen=True)
class RelationMatrix:
    """Reflexive, symmetric binary relation stored as a 0/1 matrix."""

    bits: np.ndarray
    epsilon: float | None = None

    def __post_init__(self):
        b = np.array(self.bits)
        if b.ndim != 2 or b.shape[0] != b.shape[1]:
            raise ValueError(f"relation must be square, got shape {b.shape}")
        if not np.all((b == 0) | (b == 1)):
            raise ValueError("relation entries must be 0 or 1")
        b = b.astype(np.uint8)
        if not np.all(np.diag(b) == 1):
            raise ValueError("relation must be reflexive (unit diagonal)")
        if not np.array_equal(b, b.T):
            raise ValueError("relation must be symmetric")
        b.setflags(write=False)
        object.__setattr__(self, "bits", b)

    @property
    def order(self) -> int:
        return self.bits.shape[0]

    def edges(self) -> set[tuple[int, int]]:
        return {(int(i), int(j)) for i, j in zip(*np.nonzero(np.triu(self.bits, 1)))}


@dataclass(frozen=True)
class Partition:
    """Assignment of ``c`` variables to clusters ``0..k-1``.

    Labels are canonical: clusters are numbered by their smallest member,
    so two equal groupings always compare equal.
    """

    labels: tuple[int, ...]
    provenance: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "labels", _canonical(self.labels))

    @property
    def k(self) -> int:
        return max(self.labels) + 1 if self.labels else 0

    @property
    def order(self) -> int:
        return len(self.labels)

    def clusters(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.k)]
        for i, lab in enumerate(self.labels):
            out[lab].append(i)
        return out

    @classmethod
    def from_clusters(cls, clusters, order: int | None = None, provenance=None) -> "Partition":
        """Build from an iterable of member-index groups; every index must appear once."""
        groups = [list(g) for g in clusters]
        n = order if order is not None else sum(len(g) for g in groups)
        labels = [-1] * n
        for lab, g in enumerate(groups):
            for i in g:
                if labels[i] != -1:
                    raise ValueError(f"index {i} appears in more than one cluster")
                labels[i] = lab
        if -1 in labels:
            raise ValueError(f"index {labels.index(-1)} is not assigned to a cluster")
        return cls(tuple(labels), provenance or {})


def _canonical(labels) -> tuple[int, ...]:
    seen: dict = {}
    out = []
    for lab in labels:
        if lab not in seen:
            seen[lab] = len(seen)
        out.append(seen[lab])
    return tuple(out)


def build_relation(s, epsilon: float) -> RelationMatrix:
    """Relate every pair whose similarity is not less than ``epsilon``."""
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError(f"epsilon must lie in [0, 1], got {epsilon}")
    m = as_symmetric(s)
    if np.any(m < -1e-12) or np.any(m > 1.0 + 1e-12):
        raise ValueError("similarity entries must lie in [0, 1]")
    bits = (m >= epsilon).astype(np.uint8)
    np.fill_diagonal(bits, 1)
    return RelationMatrix(bits, float(epsilon))


def is_transitive(r: RelationMatrix) -> bool:
    # R * R <= R under Boolean multiplication
    b = r.bits.astype(np.int64)
    two_step = (b @ b) > 0
    return not np.any(two_step & (b == 0))


def classify_relation(r: RelationMatrix) -> str:
    return EQUIVALENCE if is_transitive(r) else SIMILARITY


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            # smaller index stays the root
            lo, hi = min(ra, rb), max(ra, rb)
            self.parent[hi] = lo


def connected_components(r: RelationMatrix) -> Partition:
    uf = _UnionFind(r.order)
    for i, j in zip(*np.nonzero(np.triu(r.bits, 1))):
        uf.union(int(i), int(j))
    roots = [uf.find(i) for i in range(r.order)]
    return Partition(tuple(roots), {"epsilon": r.epsilon, "source": "components"})


class SweepPoint(NamedTuple):
    epsilon: float
    components: int
    kind: str


def epsilon_grid(lo: float, hi: float, step: float) -> list[float]:
    """Thresholds ``lo, lo+step, ...`` up to ``hi``, rounded to kill float drift."""
    if not 0.0 <= lo <= hi <= 1.0:
        raise ValueError(f"need 0 <= lo <= hi <= 1, got lo={lo}, hi={hi}")
    if step <= 0:
        raise ValueError("step must be positive")
    count = int(np.floor((hi - lo) / step + 1e-9)) + 1
    return [round(lo + i * step, 10) for i in range(count)]


def epsilon_sweep(s, lo: float, hi: float, step: float = 0.001) -> list[SweepPoint]:
    """Component count and relation kind for each threshold on the grid."""
    m = as_symmetric(s)
    out = []
    for eps in epsilon_grid(lo, hi, step):
        r = build_relation(m, eps)
        out.append(SweepPoint(eps, connected_components(r).k, classify_relation(r)))
    return out
