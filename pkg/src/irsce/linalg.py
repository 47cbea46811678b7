"""Thin contracts over the dense complex factorizations the estimator uses.

All routines delegate to LAPACK through numpy; the wrappers pin down the
shapes, orderings and failure behaviour the rest of the package relies on.
"""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class TruncatedSVD:
    """Rank-r truncated SVD of a matrix M ≈ U diag(S) V^H.

    ``spectrum`` keeps the full singular spectrum (length min(m, n)) for
    model-order selection.
    """

    u: np.ndarray          # (m, r)
    s: np.ndarray          # (r,) descending, nonnegative
    v: np.ndarray          # (n, r)
    spectrum: np.ndarray   # (min(m, n),)


@dataclass(frozen=True)
class EigenPairs:
    """Eigenvalues and the matching eigenvector columns; no ordering implied."""

    values: np.ndarray    # (r,)
    vectors: np.ndarray   # (r, r), column u pairs with values[u]


class FactorizationError(RuntimeError):
    """A factorization failed to converge or its input is malformed."""


def truncated_svd(m, r):
    """Best rank-r approximation factors of ``m``, plus the full spectrum."""
    m = np.asarray(m)
    if r < 1 or r > min(m.shape):
        raise ValueError(f"rank {r} out of range for shape {m.shape}")
    u, s, vh = np.linalg.svd(m, full_matrices=False)
    return TruncatedSVD(u=u[:, :r], s=s[:r], v=vh[:r].conj().T, spectrum=s)


def pseudo_inverse(m, tol=None):
    """Moore-Penrose pseudo-inverse.

    Singular values below ``tol * max(S)`` are treated as zero; the
    default tol is max(rows, cols) * machine epsilon.
    """
    m = np.asarray(m)
    if tol is None:
        tol = max(m.shape) * np.finfo(np.float64).eps
    return np.linalg.pinv(m, rcond=tol)


def eig_general(m):
    """Eigendecomposition of a general (non-normal) square complex matrix."""
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"eig_general expects a square matrix, got {m.shape}")
    try:
        values, vectors = np.linalg.eig(m)
    except np.linalg.LinAlgError as exc:
        raise FactorizationError(f"eigendecomposition failed: {exc}") from exc
    return EigenPairs(values=values, vectors=vectors)
