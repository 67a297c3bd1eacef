"""Reference selectors: Laplacian Score and greedy variance minimization."""

from typing import List

import numpy as np

from .exceptions import InvalidInputError, InvalidParameterError
from .graph import ArrayOrData, SimilarityGraph, as_array


def laplacian_score(X: ArrayOrData, S) -> np.ndarray:
    """Laplacian Score of every feature; smaller means more important.

    For feature ``f_r`` with degree matrix ``D`` and ``L = D - S``::

        f~_r    = f_r - (f_r^T D 1 / 1^T D 1) 1
        score_r = (f~_r^T L f~_r) / (f~_r^T D f~_r)

    Features that are constant after the degree-weighted centering score
    ``+inf``.
    """
    Xv = as_array(X)
    S = S.S if isinstance(S, SimilarityGraph) else np.asarray(S, dtype=np.float64)
    if S.shape != (Xv.shape[1], Xv.shape[1]):
        raise InvalidInputError(f"graph is {S.shape}, data has {Xv.shape[1]} samples")
    deg = S.sum(axis=1)
    total = deg.sum()
    if not total > 0:
        raise InvalidInputError("graph has zero total degree")
    Ft = Xv - ((Xv @ deg) / total)[:, None]
    den = np.einsum("ij,j,ij->i", Ft, deg, Ft)
    # f^T L f = f^T D f - f^T S f
    num = den - np.einsum("ij,jk,ik->i", Ft, S, Ft)
    num = np.maximum(num, 0.0)
    scale = np.einsum("ij,j,ij->i", Xv, deg, Xv)
    degenerate = den <= 1e-14 * np.maximum(scale, np.finfo(float).tiny)
    out = np.full(Xv.shape[0], np.inf)
    ok = ~degenerate
    out[ok] = num[ok] / den[ok]
    return out


def _criterion(Xg, XgL, lambda1, lambda2, criterion):
    Z = Xg @ (Xg + lambda1 * XgL).T + lambda2 * np.eye(Xg.shape[0])
    Z = 0.5 * (Z + Z.T)
    if criterion == "trace":
        return float(np.trace(np.linalg.inv(Z)))
    sign, logdet = np.linalg.slogdet(Z)
    # maximize log det(Z) == minimize its negative
    return -float(logdet)


def greedy_variance_select(
    X: ArrayOrData, L, lambda1: float, lambda2: float, k: int, criterion: str = "trace"
) -> List[int]:
    """Forward selection of ``k`` features on the approximate LapRLS covariance.

    Each round adds the feature that minimizes ``Tr(Z^{-1})`` (``"trace"``)
    or maximizes ``log det Z`` (``"determinant"``) where
    ``Z = Xg Xg^T + lambda1 Xg L Xg^T + lambda2 I`` over the chosen rows.
    Ties go to the lowest feature index.
    """
    Xv = as_array(X)
    L = L.L if hasattr(L, "L") else np.asarray(L, dtype=np.float64)
    d = Xv.shape[0]
    if criterion not in ("trace", "determinant"):
        raise InvalidParameterError(f"criterion must be 'trace' or 'determinant', got {criterion!r}")
    if not 1 <= k <= d:
        raise InvalidParameterError(f"need 1 <= k <= d (d={d}), got k={k}")
    if not lambda2 > 0 or not lambda1 >= 0:
        raise InvalidParameterError("need lambda1 >= 0 and lambda2 > 0")
    XL = Xv @ L
    chosen: List[int] = []
    remaining = np.ones(d, dtype=bool)
    for _ in range(k):
        best, best_val = -1, np.inf
        for j in np.flatnonzero(remaining):
            rows = chosen + [j]
            val = _criterion(Xv[rows], XL[rows], lambda1, lambda2, criterion)
            if val < best_val:
                best, best_val = j, val
        chosen.append(int(best))
        remaining[best] = False
    return chosen
