"""Sample-affinity graph, its Laplacian, and the manifold kernel.

Data matrices follow the feature-major convention used throughout the
package: ``X`` has shape ``(d, n)``, one row per feature and one column
per sample.
"""

from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np
from scipy import linalg

from ._backend import kernels
from .exceptions import InvalidInputError, InvalidParameterError, NumericalError


def _frozen(a):
    a = np.array(a, dtype=np.float64, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class DataMatrix:
    """A ``d x n`` matrix of finite reals; row ``i`` is feature ``f_i``."""

    values: np.ndarray
    feature_ids: Optional[Sequence[str]] = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2:
            raise InvalidInputError(f"data matrix must be 2-D, got shape {v.shape}")
        if v.shape[0] < 1 or v.shape[1] < 2:
            raise InvalidInputError(
                f"need at least 1 feature and 2 samples, got {v.shape[0]}x{v.shape[1]}"
            )
        if not np.all(np.isfinite(v)):
            raise InvalidInputError("data matrix contains non-finite entries")
        if self.feature_ids is not None and len(self.feature_ids) != v.shape[0]:
            raise InvalidInputError("feature_ids length does not match row count")
        object.__setattr__(self, "values", _frozen(v))

    @property
    def d(self) -> int:
        return self.values.shape[0]

    @property
    def n(self) -> int:
        return self.values.shape[1]


ArrayOrData = Union[np.ndarray, DataMatrix]


def as_array(X: ArrayOrData) -> np.ndarray:
    """Validated float64 view of a data matrix."""
    if isinstance(X, DataMatrix):
        return X.values
    return DataMatrix(X).values


@dataclass(frozen=True)
class SimilarityGraph:
    S: np.ndarray
    t: float = float("nan")
    k: int = 0


@dataclass(frozen=True)
class LaplacianOperator:
    D: np.ndarray
    L: np.ndarray

    @property
    def degrees(self) -> np.ndarray:
        return np.diag(self.D)


@dataclass(frozen=True)
class ManifoldKernel:
    M: np.ndarray
    lambda1: float
    lambda2: float


def pairwise_sq_dists(X: ArrayOrData) -> np.ndarray:
    """Squared Euclidean distances between the sample columns of ``X``."""
    Xv = as_array(X)
    return kernels.sq_dists(np.ascontiguousarray(Xv.T))


def build_knn_heat_graph(X: ArrayOrData, k: int = 5, t="auto") -> SimilarityGraph:
    """Heat-kernel weights on the symmetrized k-nearest-neighbor graph.

    Samples ``i`` and ``j`` are joined when either is among the other's
    ``k`` nearest neighbors (ties go to the lower sample index), with weight
    ``exp(-||x_i - x_j||^2 / t)``. ``t="auto"`` uses the mean off-diagonal
    squared distance.
    """
    Xv = as_array(X)
    n = Xv.shape[1]
    if not isinstance(k, (int, np.integer)) or not 1 <= k < n:
        raise InvalidParameterError(f"need 1 <= k < n (n={n}), got k={k}")
    D2 = pairwise_sq_dists(Xv)
    if isinstance(t, str):
        if t != "auto":
            raise InvalidParameterError(f"kernel width must be positive or 'auto', got {t!r}")
        off = D2[~np.eye(n, dtype=bool)]
        t = float(off.mean())
        if t <= 0.0:
            # every sample identical
            t = 1.0
    else:
        t = float(t)
        if not t > 0.0 or not np.isfinite(t):
            raise InvalidParameterError(f"kernel width must be positive, got {t}")
    mask = kernels.knn_mask(D2, int(k))
    mask = mask | mask.T
    S = np.where(mask, np.exp(-D2 / t), 0.0)
    np.fill_diagonal(S, 0.0)
    return SimilarityGraph(S=_frozen(S), t=t, k=int(k))


def laplacian(S) -> LaplacianOperator:
    """``L = D - S`` with ``D`` the diagonal degree matrix."""
    S = S.S if isinstance(S, SimilarityGraph) else np.asarray(S, dtype=np.float64)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise InvalidInputError(f"similarity matrix must be square, got {S.shape}")
    if not np.all(np.isfinite(S)):
        raise InvalidInputError("similarity matrix contains non-finite entries")
    scale = max(float(np.abs(S).max(initial=0.0)), 1.0)
    if np.abs(S - S.T).max(initial=0.0) > 1e-12 * scale:
        raise InvalidInputError("similarity matrix is not symmetric")
    deg = S.sum(axis=1)
    D = np.diag(deg)
    L = D - S
    return LaplacianOperator(D=_frozen(D), L=_frozen(L))


def manifold_kernel(L, lambda1: float, lambda2: float) -> ManifoldKernel:
    """``M = lambda2 * (I + lambda1 * L)^{-1}``, symmetrized after the solve."""
    L = L.L if isinstance(L, LaplacianOperator) else np.asarray(L, dtype=np.float64)
    if not lambda1 >= 0.0:
        raise InvalidParameterError(f"lambda1 must be >= 0, got {lambda1}")
    if not lambda2 > 0.0:
        raise InvalidParameterError(f"lambda2 must be > 0, got {lambda2}")
    n = L.shape[0]
    I = np.eye(n)
    try:
        cf = linalg.cho_factor(I + lambda1 * L)
    except linalg.LinAlgError as exc:
        raise NumericalError(f"I + lambda1*L is not positive definite: {exc}") from exc
    M = lambda2 * linalg.cho_solve(cf, I)
    M = 0.5 * (M + M.T)
    return ManifoldKernel(M=_frozen(M), lambda1=float(lambda1), lambda2=float(lambda2))
