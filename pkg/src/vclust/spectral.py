"""Degree matrices, Laplacians and spectral embeddings of similarity matrices."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .matrix import as_symmetric, jacobi_eigen

__all__ = [
    "Embedding",
    "degree_matrix",
    "laplacian",
    "normalized_laplacian",
    "spectral_embedding",
    "normalize_rows",
]

ZERO_ROW_TOL = 1e-12


@dataclass(frozen=True)
class Embedding:
    """Clustering points, one row per variable.

    ``source`` is one of ``"laplacian"``, ``"normalized-laplacian"`` or
    ``"pc-table"``; ``provenance`` carries anything else worth reporting
    (eigenvalues used, zero rows left after normalization, ...).
    """

    points: np.ndarray
    source: str
    row_normalized: bool = False
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim != 2:
            raise ValueError("embedding points must be a 2-D array")
        if not np.all(np.isfinite(pts)):
            raise ValueError("embedding contains non-finite entries")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def shape(self) -> tuple[int, int]:
        return self.points.shape

    def normalized(self) -> "Embedding":
        pts, zero = normalize_rows(self.points)
        prov = dict(self.provenance)
        prov["zero_rows"] = zero
        return Embedding(pts, self.source, True, prov)


def normalize_rows(points) -> tuple[np.ndarray, list[int]]:
    """Scale every row to unit Euclidean length; zero rows stay zero and are reported."""
    pts = np.array(points, dtype=float)
    norms = np.linalg.norm(pts, axis=1)
    zero = [int(i) for i in np.flatnonzero(norms <= ZERO_ROW_TOL)]
    safe = np.where(norms <= ZERO_ROW_TOL, 1.0, norms)
    pts = pts / safe[:, None]
    pts[zero] = 0.0
    return pts, zero


def _nonnegative(s) -> np.ndarray:
    m = as_symmetric(s)
    if np.any(m < 0):
        i, j = np.argwhere(m < 0)[0]
        raise ValueError(f"similarity entries must be non-negative, s[{i},{j}] = {m[i, j]}")
    return m


def degree_matrix(s) -> np.ndarray:
    """Node degrees ``D[i,i] = sum_j s[i,j]``, self-similarity included; returned as a vector."""
    return _nonnegative(s).sum(axis=1)


def laplacian(s) -> np.ndarray:
    m = _nonnegative(s)
    lap = np.diag(m.sum(axis=1)) - m
    return as_symmetric(lap)


def normalized_laplacian(s) -> np.ndarray:
    """Symmetric normalized Laplacian ``I - D^{-1/2} S D^{-1/2}``."""
    m = _nonnegative(s)
    deg = m.sum(axis=1)
    if np.any(deg <= 0):
        node = int(np.flatnonzero(deg <= 0)[0])
        raise ValueError(f"node {node} has zero degree; normalized Laplacian undefined")
    inv = 1.0 / np.sqrt(deg)
    lap = np.eye(len(m)) - inv[:, None] * m * inv[None, :]
    return as_symmetric(lap, tol=1e-12)


def spectral_embedding(lap, k: int, normalize_rows: bool = False, source: str | None = None) -> Embedding:
    """Embed variables with the eigenvectors of the ``k`` smallest Laplacian eigenvalues.

    Columns are ordered by ascending eigenvalue. When ``normalize_rows`` is
    set each row is scaled to unit length (normalized-Laplacian convention);
    rows that are numerically zero stay zero and are listed under
    ``provenance["zero_rows"]``.
    """
    m = as_symmetric(lap)
    c = m.shape[0]
    if not 1 <= k <= c:
        raise ValueError(f"k must be in [1, {c}], got {k}")
    dec = jacobi_eigen(m)
    cols = list(range(c - 1, c - 1 - k, -1))
    pts = dec.eigenvectors[:, cols]
    prov = {"eigenvalues": [float(x) for x in dec.eigenvalues[cols]]}
    if source is None:
        source = "normalized-laplacian" if normalize_rows else "laplacian"
    emb = Embedding(pts, source, False, prov)
    return emb.normalized() if normalize_rows else emb
