"""Correlation, determination and principal-component similarity tables."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .matrix import as_symmetric, jacobi_eigen
from .spectral import Embedding

__all__ = [
    "ObservationTable",
    "PcSimilarityTable",
    "correlation_matrix",
    "determination_matrix",
    "pc_similarity",
    "pc_cluster_points",
]

PSD_TOL = 1e-9


@dataclass(frozen=True)
class ObservationTable:
    """``n`` observations (rows) of ``c`` named variables (columns)."""

    values: np.ndarray
    names: tuple[str, ...] = field(default=())

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 2:
            raise ValueError("observations must be a 2-D table")
        n, c = v.shape
        if n < 3 or c < 2:
            raise ValueError(f"need at least 3 rows and 2 columns, got {n}x{c}")
        if not np.all(np.isfinite(v)):
            raise ValueError("observations contain non-finite values")
        names = tuple(self.names) or tuple(f"V{i + 1}" for i in range(c))
        if len(names) != c:
            raise ValueError(f"{len(names)} names for {c} columns")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "names", names)

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape


def correlation_matrix(data) -> np.ndarray:
    """Pearson correlation between the columns of ``data``.

    Raises ``ValueError`` naming the first column with zero variance.
    """
    if not isinstance(data, ObservationTable):
        data = ObservationTable(data)
    x = data.values - data.values.mean(axis=0)
    ss = np.sum(x * x, axis=0)
    flat = np.flatnonzero(ss <= 0)
    if flat.size:
        raise ValueError(f"column {data.names[flat[0]]!r} has zero variance")
    z = x / np.sqrt(ss)
    r = np.clip(z.T @ z, -1.0, 1.0)
    np.fill_diagonal(r, 1.0)
    return as_symmetric(r)


def determination_matrix(corr) -> np.ndarray:
    """Element-wise square of a correlation matrix (shared variance of each pair)."""
    r = as_symmetric(corr)
    if np.any(np.abs(r) > 1.0 + 1e-12):
        raise ValueError("correlation entries must lie in [-1, 1]")
    s = np.clip(r * r, 0.0, 1.0)
    np.fill_diagonal(s, 1.0)
    return as_symmetric(s)


@dataclass(frozen=True)
class PcSimilarityTable:
    """Determination between principal components (rows) and primary variables (columns).

    ``det[j, i] = lambda_j * v[i, j]**2``; each column sums to one and row
    ``j`` sums to ``eigenvalues[j]``.
    """

    det: np.ndarray
    eigenvalues: np.ndarray

    @property
    def cumulative_variance(self) -> np.ndarray:
        """Running share of total variance, in percent."""
        lam = np.clip(self.eigenvalues, 0.0, None)
        return 100.0 * np.cumsum(lam) / len(lam)

    @property
    def explained_variance(self) -> np.ndarray:
        lam = np.clip(self.eigenvalues, 0.0, None)
        return 100.0 * lam / len(lam)


def pc_similarity(corr, psd_tol: float = PSD_TOL) -> PcSimilarityTable:
    """Principal-component similarity table of a correlation matrix.

    Negative eigenvalues down to ``-psd_tol`` are treated as zero; anything
    more negative means ``corr`` is not a correlation matrix and raises.
    Matrices transcribed with two decimals are often slightly indefinite, so
    callers feeding rounded tables may need a looser ``psd_tol``.
    """
    r = as_symmetric(corr)
    dec = jacobi_eigen(r)
    lam = dec.eigenvalues.copy()
    if lam[-1] < -psd_tol:
        raise ValueError(
            f"matrix is not positive semidefinite: smallest eigenvalue {lam[-1]:.3g} < -{psd_tol:g}"
        )
    lam = np.clip(lam, 0.0, None)
    det = lam[:, None] * (dec.eigenvectors.T ** 2)
    det.setflags(write=False)
    lam.setflags(write=False)
    return PcSimilarityTable(det, lam)


def pc_cluster_points(table, k: int) -> Embedding:
    """Points for clustering by similarity to the first ``k`` principal components.

    ``table`` is a :class:`PcSimilarityTable` or any array whose rows are
    PC-to-variable determination coefficients (e.g. a table read from disk).
    """
    det = np.asarray(table.det if isinstance(table, PcSimilarityTable) else table, dtype=float)
    if det.ndim != 2:
        raise ValueError("determination table must be 2-D")
    c = det.shape[1]
    if not 1 <= k <= min(c, det.shape[0]):
        raise ValueError(f"k must be in [1, {min(c, det.shape[0])}], got {k}")
    return Embedding(det[:k].T.copy(), "pc-table", False, {"components": k})
