"""Pure numpy implementations of the hot kernels."""

import numpy as np

BACKEND = "numpy"


def similarity_matrix(values, radius):
    """Pairwise similarity: 1 - |v_i - v_j| where the gap is within `radius`, else 0."""
    v = np.asarray(values, dtype=np.float64)
    gap = np.abs(v[:, None] - v[None, :])
    out = np.where(gap <= radius, 1.0 - gap, 0.0)
    np.fill_diagonal(out, 1.0)
    return out


def row_sums(mat):
    return np.asarray(mat, dtype=np.float64).sum(axis=1)


def intersection_row_sums(a, b):
    """Per-row sums of the elementwise minimum of two relation matrices."""
    return np.minimum(a, b).sum(axis=1)


def pairwise_min_totals(stack):
    """All-pairs totals of sum(min(A_p, A_b)) over a (d, n, n) stack.

    Returns a symmetric (d, d) matrix whose diagonal holds the plain totals
    sum(A_p). This is the dominant cost of the redundancy table.
    """
    stack = np.asarray(stack, dtype=np.float64)
    d = stack.shape[0]
    out = np.empty((d, d), dtype=np.float64)
    for p in range(d):
        out[p, p] = stack[p].sum()
        for b in range(p + 1, d):
            t = np.minimum(stack[p], stack[b]).sum()
            out[p, b] = t
            out[b, p] = t
    return out
