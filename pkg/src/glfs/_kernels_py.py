"""Pure-NumPy versions of the hot kernels.

Used when the compiled extension is missing, or when ``GLFS_PURE_PYTHON=1``.
Every function here must return exactly what its twin in ``_kernels.pyx``
returns (floating point results up to summation order).
"""

import numpy as np
from scipy.spatial.distance import cdist, pdist, squareform


def sq_dists(Xt):
    """Squared Euclidean distances between the rows of ``Xt`` (n x d)."""
    if Xt.shape[0] < 2:
        return np.zeros((Xt.shape[0], Xt.shape[0]))
    return squareform(pdist(Xt, "sqeuclidean"))


def knn_mask(D2, k):
    n = D2.shape[0]
    mask = np.zeros((n, n), dtype=bool)
    for i in range(n):
        row = D2[i].copy()
        row[i] = np.inf
        # stable sort keeps the lower index first among equal distances
        nbrs = np.argsort(row, kind="stable")[:k]
        mask[i, nbrs] = True
    return mask


def nearest_other(D2):
    D = D2.copy()
    np.fill_diagonal(D, np.inf)
    return np.argmin(D, axis=1)


def row_quadratic_forms(X, G):
    """Return ``q[i] = X[i] @ G @ X[i]`` for symmetric ``G``."""
    return np.einsum("ij,ij->i", X @ G, X)


def assign_nearest(Xt, centers):
    """Index of the closest center for every row of ``Xt`` plus the inertia."""
    d2 = cdist(Xt, centers, "sqeuclidean")
    labels = np.argmin(d2, axis=1)
    return labels.astype(np.intp), float(np.sum(d2[np.arange(len(labels)), labels]))
