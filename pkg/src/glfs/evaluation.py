"""Experiment harness: simulation, ranking score, clustering and classifiers.

Matrices are feature-major (``d x n``) here as everywhere else in the
package; ``X_selected`` means the rows of the chosen features.
"""

from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg

from ._backend import kernels
from .exceptions import InvalidInputError, InvalidParameterError, NumericalError
from .graph import SimilarityGraph, as_array, build_knn_heat_graph, laplacian, manifold_kernel
from .optimizer import OptimizerConfig, owd_minimize
from .pipeline import GLFSParams, rank_order

# Cluster means on the informative coordinates, one row per cluster. Row c
# is -1 at position c and +1 elsewhere: pairwise Hamming distance 2, every
# coordinate takes both signs, and no two coordinates are parallel.
CODE_TABLE = np.array(
    [
        [-1.0, 1.0, 1.0, 1.0],
        [1.0, -1.0, 1.0, 1.0],
        [1.0, 1.0, -1.0, 1.0],
        [1.0, 1.0, 1.0, -1.0],
    ]
)
N_INFORMATIVE = CODE_TABLE.shape[1]


def _rng(seed, *stream):
    return np.random.default_rng(np.random.SeedSequence([int(seed), *map(int, stream)]))


@dataclass(frozen=True)
class SimulationConfig:
    n_samples: int = 400
    n_informative: int = N_INFORMATIVE
    n_noise: int = 1000
    noise_sigma: float = 0.2
    n_clusters: int = 4
    cluster_mean_scale: float = 1.0
    informative_within_std: float = 0.1

    def __post_init__(self):
        if self.n_informative != N_INFORMATIVE:
            raise InvalidParameterError(f"n_informative is fixed at {N_INFORMATIVE}")
        if not 1 <= self.n_clusters <= CODE_TABLE.shape[0]:
            raise InvalidParameterError(f"n_clusters must lie in [1, {CODE_TABLE.shape[0]}]")
        if self.n_samples < self.n_clusters or self.n_samples < 2:
            raise InvalidParameterError("need n_samples >= max(2, n_clusters)")
        if self.n_noise < 0 or self.noise_sigma < 0 or self.informative_within_std < 0:
            raise InvalidParameterError("counts and standard deviations must be nonnegative")


@dataclass(frozen=True)
class LabeledDataset:
    X: np.ndarray
    labels: np.ndarray
    true_feature_ids: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.labels.shape != (self.X.shape[1],):
            raise InvalidInputError("labels length must equal the number of samples")
        if self.true_feature_ids is not None:
            ids = np.asarray(self.true_feature_ids)
            if ids.size and (ids.min() < 0 or ids.max() >= self.X.shape[0]):
                raise InvalidInputError("true feature ids out of range")


def simulate(cfg: SimulationConfig = SimulationConfig(), seed: int = 0) -> LabeledDataset:
    """Gaussian clusters on 4 informative features buried among noise features.

    Cluster ``c`` has mean ``cluster_mean_scale * CODE_TABLE[c]`` on the
    informative coordinates. Cluster sizes are equal with the remainder
    going to the last cluster. Noise features are i.i.d.
    ``Normal(0, noise_sigma^2)``. Rows are shuffled; ``true_feature_ids[i]``
    is the final position of informative feature ``i``.
    """
    rng = _rng(seed)
    n, K = cfg.n_samples, cfg.n_clusters
    sizes = np.full(K, n // K)
    sizes[-1] += n % K
    labels = np.repeat(np.arange(K), sizes)
    means = cfg.cluster_mean_scale * CODE_TABLE[:K]
    informative = means[labels].T + cfg.informative_within_std * rng.standard_normal((N_INFORMATIVE, n))
    noise = cfg.noise_sigma * rng.standard_normal((cfg.n_noise, n))
    X = np.vstack([informative, noise])
    perm = rng.permutation(X.shape[0])
    X = X[perm]
    where = np.empty_like(perm)
    where[perm] = np.arange(perm.size)
    return LabeledDataset(X=X, labels=labels, true_feature_ids=where[:N_INFORMATIVE])


def _ranks(weights) -> np.ndarray:
    order = rank_order(weights)
    ranks = np.empty(order.size, dtype=np.intp)
    ranks[order] = np.arange(1, order.size + 1)
    return ranks


def ranking_score(weights, true_ids) -> float:
    """``1/4 * sum_i 1 / (max(4, rank_i) - 3)`` over the four planted features.

    Ranks are 1-based positions in decreasing weight order, ties broken
    toward the lower feature index. The score is 1 exactly when the planted
    features occupy the top four places.
    """
    w = np.asarray(weights, dtype=np.float64)
    ids = np.asarray(true_ids, dtype=np.intp)
    if w.size < 4:
        raise InvalidInputError("need at least 4 features to score")
    if ids.shape != (4,) or len(set(ids.tolist())) != 4:
        raise InvalidInputError("need exactly 4 distinct true feature ids")
    if ids.min() < 0 or ids.max() >= w.size:
        raise InvalidInputError("true feature id out of range")
    r = _ranks(w)[ids]
    return float(np.mean(1.0 / (np.maximum(4, r) - 3)))


def top_k_features(weights, k: int) -> np.ndarray:
    w = np.asarray(weights, dtype=np.float64)
    if not 0 <= k <= w.size:
        raise InvalidParameterError(f"need 0 <= k <= {w.size}, got {k}")
    return rank_order(w)[:k]


@dataclass
class KMeansResult:
    labels: np.ndarray
    inertia: float
    restart_inertias: List[float] = field(default_factory=list)


def _lloyd(P, k, rng, max_iter=300):
    n = P.shape[0]
    centers = P[rng.choice(n, size=k, replace=False)].copy()
    labels, inertia = kernels.assign_nearest(P, centers)
    for _ in range(max_iter):
        for c in range(k):
            members = labels == c
            if members.any():
                centers[c] = P[members].mean(axis=0)
            else:
                # reseed from the point farthest from its own center
                far = np.argmax(np.sum((P - centers[labels]) ** 2, axis=1))
                centers[c] = P[far]
                labels[far] = c
        new_labels, inertia = kernels.assign_nearest(P, centers)
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
    return labels, inertia


def kmeans_fit(X_selected, k: int, restarts: int = 10, seed: int = 0) -> KMeansResult:
    """Best of ``restarts`` Lloyd runs by within-cluster sum of squares."""
    P = np.ascontiguousarray(np.atleast_2d(np.asarray(X_selected, dtype=np.float64)).T)
    n = P.shape[0]
    if not 1 <= k <= n:
        raise InvalidParameterError(f"need 1 <= k <= n (n={n}), got k={k}")
    if restarts < 1:
        raise InvalidParameterError("restarts must be >= 1")
    best = None
    inertias = []
    for r in range(restarts):
        labels, inertia = _lloyd(P, k, _rng(seed, r))
        inertias.append(inertia)
        if best is None or inertia < best[1]:
            best = (labels, inertia)
    return KMeansResult(labels=np.asarray(best[0], dtype=np.intp), inertia=best[1], restart_inertias=inertias)


def kmeans(X_selected, k: int, restarts: int = 10, seed: int = 0) -> np.ndarray:
    return kmeans_fit(X_selected, k, restarts, seed).labels


def _entropy(counts):
    p = counts[counts > 0] / counts.sum()
    return float(-np.sum(p * np.log(p)))


def nmi(a, b) -> float:
    """Mutual information over the geometric mean of the two entropies."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape or a.ndim != 1:
        raise InvalidInputError("label vectors must be 1-D and of equal length")
    if a.size == 0:
        raise InvalidInputError("label vectors are empty")
    _, ai = np.unique(a, return_inverse=True)
    _, bi = np.unique(b, return_inverse=True)
    joint = np.zeros((ai.max() + 1, bi.max() + 1))
    np.add.at(joint, (ai, bi), 1.0)
    ha = _entropy(joint.sum(axis=1))
    hb = _entropy(joint.sum(axis=0))
    if ha == 0.0 and hb == 0.0:
        return 1.0
    if ha == 0.0 or hb == 0.0:
        return 0.0
    nz_per_row = np.count_nonzero(joint, axis=1)
    if joint.shape[0] == joint.shape[1] and np.all(nz_per_row == 1) and np.all(np.count_nonzero(joint, axis=0) == 1):
        # a bijection between the labelings; avoid rounding just below 1
        return 1.0
    pj = joint / a.size
    pa = pj.sum(axis=1, keepdims=True)
    pb = pj.sum(axis=0, keepdims=True)
    nz = pj > 0
    mi = float(np.sum(pj[nz] * np.log(pj[nz] / (pa @ pb)[nz])))
    return float(min(max(mi / np.sqrt(ha * hb), 0.0), 1.0))


def spectral_cluster(S, k: int, seed: int = 0, restarts: int = 10) -> np.ndarray:
    """k-means on the row-normalized bottom eigenvectors of ``I - D^-1/2 S D^-1/2``."""
    S = S.S if isinstance(S, SimilarityGraph) else np.asarray(S, dtype=np.float64)
    n = S.shape[0]
    if not 1 <= k <= n:
        raise InvalidParameterError(f"need 1 <= k <= n (n={n}), got k={k}")
    deg = S.sum(axis=1)
    inv_sqrt = np.zeros(n)
    pos = deg > 0
    inv_sqrt[pos] = 1.0 / np.sqrt(deg[pos])
    Lsym = np.eye(n) - inv_sqrt[:, None] * S * inv_sqrt[None, :]
    Lsym = 0.5 * (Lsym + Lsym.T)
    _, vecs = linalg.eigh(Lsym, subset_by_index=[0, k - 1])
    norms = np.linalg.norm(vecs, axis=1, keepdims=True)
    U = np.divide(vecs, norms, out=np.zeros_like(vecs), where=norms > 0)
    return kmeans(U.T, k, restarts=restarts, seed=seed)


def loo_1nn_accuracy(X_selected, labels) -> float:
    """Fraction of samples whose nearest other sample shares their label."""
    P = np.ascontiguousarray(np.atleast_2d(np.asarray(X_selected, dtype=np.float64)).T)
    labels = np.asarray(labels)
    n = P.shape[0]
    if n < 2:
        raise InvalidInputError("leave-one-out needs at least 2 samples")
    if labels.shape != (n,):
        raise InvalidInputError("labels length must equal the number of samples")
    nn = kernels.nearest_other(kernels.sq_dists(P))
    return float(np.mean(labels == labels[nn]))


@dataclass(frozen=True)
class ClassifierModel:
    feature_ids: np.ndarray
    X_train: np.ndarray
    y: np.ndarray
    lambda1: float
    lambda2: float
    L: np.ndarray
    w: np.ndarray


def laprls_fit(X_train_selected, y_train, lambda1: float, lambda2: float, L_train, feature_ids=None) -> ClassifierModel:
    """LapRLS on the selected rows: ``w = Z^{-1} X y`` with
    ``Z = X X^T + lambda1 X L X^T + lambda2 I``."""
    Xg = np.asarray(X_train_selected, dtype=np.float64)
    if Xg.ndim == 1:
        Xg = Xg[None, :]
    y = np.asarray(y_train, dtype=np.float64)
    if not np.all((y == 0) | (y == 1)):
        raise InvalidInputError("training targets must be coded 0/1")
    L = L_train.L if hasattr(L_train, "L") else np.asarray(L_train, dtype=np.float64)
    n = Xg.shape[1]
    if y.shape != (n,) or L.shape != (n, n):
        raise InvalidInputError("training targets and Laplacian must match the sample count")
    if not lambda2 > 0 or not lambda1 >= 0:
        raise InvalidParameterError("need lambda1 >= 0 and lambda2 > 0")
    ids = np.arange(Xg.shape[0]) if feature_ids is None else np.asarray(feature_ids, dtype=np.intp)
    if Xg.shape[0] == 0:
        # no features selected: the regression output is identically 0
        return ClassifierModel(ids, Xg, y, float(lambda1), float(lambda2), L, np.zeros(0))
    Z = Xg @ Xg.T + lambda1 * (Xg @ L @ Xg.T) + lambda2 * np.eye(Xg.shape[0])
    try:
        w = linalg.cho_solve(linalg.cho_factor(0.5 * (Z + Z.T)), Xg @ y)
    except linalg.LinAlgError as exc:
        raise NumericalError(f"LapRLS system is not positive definite: {exc}") from exc
    return ClassifierModel(ids, Xg, y, float(lambda1), float(lambda2), L, w)


def laprls_decision(model: ClassifierModel, X_test_selected) -> np.ndarray:
    Xt = np.asarray(X_test_selected, dtype=np.float64)
    if Xt.ndim == 1:
        Xt = Xt[:, None] if model.w.shape[0] != 1 else Xt[None, :]
    if Xt.shape[0] != model.w.shape[0]:
        raise InvalidInputError(f"test data has {Xt.shape[0]} features, model expects {model.w.shape[0]}")
    return model.w @ Xt


def laprls_predict(model: ClassifierModel, X_test_selected) -> np.ndarray:
    """Class 1 where the regression output is at least 0.5, else class 0."""
    return (laprls_decision(model, X_test_selected) >= 0.5).astype(np.intp)


def fold_assignment(n: int, folds: int, seed: int = 0) -> np.ndarray:
    """Fold id per sample: shuffle, then deal round-robin."""
    if not 1 <= folds <= n:
        raise InvalidParameterError(f"need 1 <= folds <= n (n={n}), got {folds}")
    order = _rng(seed).permutation(n)
    out = np.empty(n, dtype=np.intp)
    out[order] = np.arange(n) % folds
    return out


def _select_and_fit(Xtr, ytr, lam, params, cfg):
    Lop = laplacian(build_knn_heat_graph(Xtr, params.k, params.t))
    M = manifold_kernel(Lop, params.lambda1, params.lambda2)
    support = np.flatnonzero(owd_minimize(Xtr, M, lam, cfg=cfg).beta)
    return laprls_fit(Xtr[support], ytr, params.lambda1, params.lambda2, Lop, feature_ids=support)


def glfs_classify(Xtr, ytr, Xte, lam, params: GLFSParams = GLFSParams(), cfg=None):
    """Unsupervised GLFS selection at ``lam`` on the training samples, then
    LapRLS on the selected features. Returns ``(predictions, model)``."""
    model = _select_and_fit(as_array(Xtr), np.asarray(ytr), lam, params, cfg)
    preds = laprls_predict(model, np.asarray(Xte, dtype=np.float64)[model.feature_ids])
    return preds, model


@dataclass
class CVResult:
    best_lambda: float
    errors: int
    errors_per_lambda: List[int]
    mean_support: List[float]


def kfold_cv(
    dataset: LabeledDataset,
    lambdas: Sequence[float],
    folds: int = 10,
    seed: int = 0,
    params: GLFSParams = GLFSParams(),
    cfg: Optional[OptimizerConfig] = None,
) -> CVResult:
    """Total misclassifications across folds for each penalty in ``lambdas``.

    The best penalty has the fewest errors; ties go to the penalty with the
    smaller mean selected support.
    """
    X = as_array(dataset.X)
    y = np.asarray(dataset.labels)
    if not len(lambdas):
        raise InvalidParameterError("lambda grid is empty")
    fold = fold_assignment(X.shape[1], folds, seed)
    errors, supports = [], []
    for lam in lambdas:
        err, supp = 0, []
        for f in range(folds):
            test = fold == f
            train = ~test
            preds, model = glfs_classify(X[:, train], y[train], X[:, test], lam, params, cfg)
            err += int(np.sum(preds != y[test]))
            supp.append(model.feature_ids.size)
        errors.append(err)
        supports.append(float(np.mean(supp)))
    best = min(range(len(lambdas)), key=lambda i: (errors[i], supports[i]))
    return CVResult(float(lambdas[best]), errors[best], errors, supports)
