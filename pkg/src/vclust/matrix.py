"""Dense symmetric matrices and a cyclic Jacobi eigensolver.

Everything downstream (correlation, determination, Laplacians) is held as a
plain float ``ndarray`` that passed :func:`as_symmetric`; the returned arrays
are read-only so they can be shared between workers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "ConvergenceError",
    "EigenDecomposition",
    "as_symmetric",
    "jacobi_eigen",
    "count_zero_eigenvalues",
]

SYMMETRY_TOL = 1e-9
MAX_SWEEPS = 100


class ConvergenceError(RuntimeError):
    """Raised when Jacobi sweeps fail to drive the off-diagonal mass to zero."""

    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def as_symmetric(a, tol: float = SYMMETRY_TOL) -> np.ndarray:
    """Validate ``a`` as a finite square symmetric matrix.

    Entries may disagree with their transpose by at most ``tol``; the result
    is the exact average of both triangles, so ``out[i, j] == out[j, i]``
    holds bit-for-bit.
    """
    m = np.array(a, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise ValueError(f"expected a non-empty square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix contains non-finite entries")
    asym = np.abs(m - m.T)
    if asym.size and asym.max() > tol:
        i, j = np.unravel_index(np.argmax(asym), asym.shape)
        raise ValueError(
            f"matrix is not symmetric: |a[{i},{j}] - a[{j},{i}]| = {asym[i, j]:.3g}"
        )
    return _frozen((m + m.T) / 2.0)


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenvalues sorted non-ascending; column ``j`` of ``eigenvectors`` pairs with ``eigenvalues[j]``."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    sweeps: int = 0

    @property
    def order(self) -> int:
        return len(self.eigenvalues)

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.T


def _off_norm(a: np.ndarray) -> float:
    upper = np.triu(a, 1)
    return float(np.sqrt(2.0 * np.sum(upper * upper)))


def _rotate(a: np.ndarray, v: np.ndarray, p: int, q: int) -> None:
    # zero a[p, q] with a single Givens rotation, updating a and v in place
    apq = a[p, q]
    h = a[q, q] - a[p, p]
    if abs(h) + 100.0 * abs(apq) == abs(h):
        # pivot negligible against the diagonal gap: theta would overflow
        t = apq / h
    else:
        theta = 0.5 * h / apq
        t = 1.0 / (abs(theta) + np.sqrt(theta * theta + 1.0))
        if theta < 0.0:
            t = -t
    c = 1.0 / np.sqrt(t * t + 1.0)
    s = t * c

    col_p = a[:, p].copy()
    col_q = a[:, q].copy()
    a[:, p] = c * col_p - s * col_q
    a[:, q] = s * col_p + c * col_q
    row_p = a[p, :].copy()
    row_q = a[q, :].copy()
    a[p, :] = c * row_p - s * row_q
    a[q, :] = s * row_p + c * row_q
    a[p, q] = a[q, p] = 0.0

    vp = v[:, p].copy()
    vq = v[:, q].copy()
    v[:, p] = c * vp - s * vq
    v[:, q] = s * vp + c * vq


def _sorted_order(w: np.ndarray) -> np.ndarray:
    """Non-ascending order that keeps original column order inside groups of equal values."""
    order = list(np.argsort(-w, kind="stable"))
    out: list[int] = []
    group = [order[0]]
    for idx in order[1:]:
        ref = w[group[0]]
        if abs(w[idx] - ref) <= 1e-9 * max(1.0, abs(ref)):
            group.append(idx)
        else:
            out.extend(sorted(group))
            group = [idx]
    out.extend(sorted(group))
    return np.array(out, dtype=int)


def _normalize_signs(v: np.ndarray) -> np.ndarray:
    for j in range(v.shape[1]):
        mag = np.abs(v[:, j])
        top = np.flatnonzero(np.isclose(mag, mag.max(), rtol=1e-9, atol=0.0))[0]
        if v[top, j] < 0:
            v[:, j] = -v[:, j]
    return v


def jacobi_eigen(a, tol: float = 1e-12, max_sweeps: int = MAX_SWEEPS) -> EigenDecomposition:
    """Eigen-decompose a symmetric matrix by cyclic-by-row Jacobi rotations.

    Parameters
    ----------
    a : array_like
        Symmetric matrix of order ``c``.
    tol : float
        Sweeps stop once the off-diagonal Frobenius norm drops below
        ``tol * max(1, ||a||_F)``.
    max_sweeps : int
        Hard cap; exceeding it raises :class:`ConvergenceError`.

    Returns
    -------
    EigenDecomposition
        Eigenvalues non-ascending, eigenvectors orthonormal and sign-normalized
        so that the largest-magnitude entry of each column is positive.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    work = np.array(as_symmetric(a), dtype=float)
    n = work.shape[0]
    vecs = np.eye(n)
    scale = max(1.0, float(np.linalg.norm(work)))

    sweeps = 0
    off = _off_norm(work)
    while off > tol * scale:
        if sweeps >= max_sweeps:
            raise ConvergenceError(
                f"Jacobi did not converge in {max_sweeps} sweeps (off-diagonal norm {off:.3g})",
                residual=off,
            )
        sweeps += 1
        # early sweeps skip small pivots; later sweeps only skip negligible ones
        thresh = 0.2 * off / (n * n) if sweeps < 4 else 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = work[p, q]
                if apq == 0.0:
                    continue
                small = 100.0 * abs(apq)
                if sweeps > 4 and abs(work[p, p]) + small == abs(work[p, p]) \
                        and abs(work[q, q]) + small == abs(work[q, q]):
                    work[p, q] = work[q, p] = 0.0
                    continue
                if abs(apq) <= thresh:
                    continue
                _rotate(work, vecs, p, q)
        off = _off_norm(work)

    w = np.diag(work).copy()
    order = _sorted_order(w)
    w = w[order]
    vecs = _normalize_signs(vecs[:, order])
    return EigenDecomposition(_frozen(w), _frozen(vecs), sweeps)


def count_zero_eigenvalues(d, zero_tol: float | None = None) -> int:
    """Number of eigenvalues with ``|lambda| <= zero_tol``.

    ``d`` may be an :class:`EigenDecomposition` or a plain sequence of
    eigenvalues. The default tolerance is ``1e-8 * max(1, lambda_max)``.
    """
    w = np.asarray(getattr(d, "eigenvalues", d), dtype=float)
    if zero_tol is None:
        zero_tol = 1e-8 * max(1.0, float(w.max()) if w.size else 1.0)
    if zero_tol <= 0:
        raise ValueError("zero_tol must be positive")
    return int(np.count_nonzero(np.abs(w) <= zero_tol))
