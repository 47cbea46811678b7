"""Dense complex third-order tensor algebra.

A third-order tensor is a complex ndarray of shape (d1, d2, d3).  The
binding layout convention used throughout this package:

    mode-1 unfolding Y1 has shape (d1, d2*d3) and the column holding
    slice entry (j, k) is k*d2 + j (0-based), i.e. the second index
    varies fastest.

Under this convention, for a tensor with CP factors A (d1 x U),
B (d2 x U), C (d3 x U):

    mode1_unfold(T).T == khatri_rao(C, B) @ A.T
"""

import numpy as np


def mode1_unfold(t):
    """Mode-1 unfolding of a (d1, d2, d3) tensor into a (d1, d2*d3) matrix.

    Column k*d2 + j holds the fiber entries t[:, j, k].
    """
    t = np.asarray(t)
    if t.ndim != 3:
        raise ValueError(f"expected a third-order tensor, got ndim={t.ndim}")
    d1, d2, d3 = t.shape
    return np.transpose(t, (0, 2, 1)).reshape(d1, d2 * d3)


def fold_mode1(m, dims):
    """Inverse of :func:`mode1_unfold` for the given (d1, d2, d3) dims."""
    d1, d2, d3 = dims
    m = np.asarray(m)
    if m.shape != (d1, d2 * d3):
        raise ValueError(f"matrix shape {m.shape} incompatible with dims {dims}")
    return np.transpose(m.reshape(d1, d3, d2), (0, 2, 1))


def khatri_rao(x, y):
    """Column-wise Kronecker (Khatri-Rao) product.

    Column u of the result is kron(x[:, u], y[:, u]); the row index of
    ``x`` varies slowest, consistent with :func:`mode1_unfold`.
    """
    x = np.asarray(x)
    y = np.asarray(y)
    if x.ndim != 2 or y.ndim != 2:
        raise ValueError("khatri_rao expects two matrices")
    if x.shape[1] != y.shape[1]:
        raise ValueError(
            f"column-count mismatch: {x.shape[1]} vs {y.shape[1]}"
        )
    return (x[:, None, :] * y[None, :, :]).reshape(x.shape[0] * y.shape[0], x.shape[1])


def cpd_synthesize(a, b, c):
    """Build the tensor sum_u a_u ∘ b_u ∘ c_u from factor matrices.

    Factors with zero columns yield the zero tensor.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    c = np.asarray(c)
    if not (a.shape[1] == b.shape[1] == c.shape[1]):
        raise ValueError(
            f"column-count mismatch: {a.shape[1]}, {b.shape[1]}, {c.shape[1]}"
        )
    return np.einsum("iu,ju,ku->ijk", a, b, c)


def frobenius_norm(t):
    """Frobenius norm (square root of the sum of squared moduli)."""
    return float(np.linalg.norm(np.asarray(t).ravel()))
