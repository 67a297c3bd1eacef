"""Covariance-trace objective over feature weights and its gradient.

With ``A = X^T diag(beta) X`` and ``M = lambda2 (I + lambda1 L)^{-1}`` the
trace of the LapRLS coefficient covariance is, up to the constant
``sigma^2 / lambda2^2``::

    Q(beta) = Tr(A [(M + A)^{-1} M]^2)

Writing ``K = (M + A)^{-1} M`` and ``W = K K^T`` the gradient is

    dQ/dbeta_i = f_i^T (K W + W K^T - W) f_i

which follows from ``(M + A)^{-1} A = I - K``. The commuting-case forms
``Tr(A (M+A)^{-2} M^2)`` and ``f_i^T (M - A)(M + A)^{-3} M^2 f_i`` are kept
as :func:`objective_paper` and :func:`gradient_printed`; they agree with
the exact forms only when ``M`` and ``A`` commute (e.g. ``lambda1 = 0``).
"""

import numpy as np
from scipy import linalg

from ._backend import kernels
from .exceptions import InvalidInputError, NumericalError
from .graph import ArrayOrData, ManifoldKernel, as_array


def _kernel_matrix(M) -> np.ndarray:
    return M.M if isinstance(M, ManifoldKernel) else np.asarray(M, dtype=np.float64)


def _check_beta(beta, d):
    beta = np.asarray(beta, dtype=np.float64)
    if beta.shape != (d,):
        raise InvalidInputError(f"beta must have length {d}, got shape {beta.shape}")
    if not np.all(np.isfinite(beta)):
        raise InvalidInputError("beta contains non-finite entries")
    if np.any(beta < 0):
        raise InvalidInputError("beta must be nonnegative")
    return beta


def _scaled_rows(Xv, beta):
    beta = _check_beta(beta, Xv.shape[0])
    support = np.flatnonzero(beta)
    return np.sqrt(beta[support])[:, None] * Xv[support]


def weighted_gram(X: ArrayOrData, beta) -> np.ndarray:
    """``A = X^T diag(beta) X``, formed as ``Y^T Y`` with ``Y = diag(sqrt(beta)) X``."""
    Y = _scaled_rows(as_array(X), beta)
    return Y.T @ Y


def _factor(M, A):
    MA = M + A
    if not np.all(np.isfinite(MA)):
        raise NumericalError("M + A has non-finite entries")
    try:
        return linalg.cho_factor(MA, check_finite=False)
    except linalg.LinAlgError as exc:
        raise NumericalError(f"M + A is not positive definite: {exc}") from exc


def _k_matrix(M, Y):
    """``K = (M + Y^T Y)^{-1} M`` with one step of iterative refinement.

    ``M + A`` is often badly conditioned for small lambda2; the refinement
    step keeps ``Q`` smooth enough for finite-difference checks.
    """
    cf = _factor(M, Y.T @ Y)
    K = linalg.cho_solve(cf, M)
    R = M - (M @ K + Y.T @ (Y @ K))
    return K + linalg.cho_solve(cf, R)


def _exact_value(Y, K):
    # Tr(A K K) == Tr(A K K^T) == ||Y K||_F^2; the sum of squares avoids cancellation
    return float(np.sum((Y @ K) ** 2))


def _exact_gradient_kernel(K):
    W = K @ K.T
    KW = K @ W
    G = KW + KW.T - W
    return 0.5 * (G + G.T)


def objective_exact(X: ArrayOrData, beta, M) -> float:
    Y = _scaled_rows(as_array(X), beta)
    if Y.shape[0] == 0:
        return 0.0
    return _exact_value(Y, _k_matrix(_kernel_matrix(M), Y))


def objective_paper(X: ArrayOrData, beta, M) -> float:
    Xv = as_array(X)
    Mm = _kernel_matrix(M)
    A = weighted_gram(Xv, beta)
    cf = _factor(Mm, A)
    P2M2 = linalg.cho_solve(cf, linalg.cho_solve(cf, Mm @ Mm))
    return float(np.trace(A @ P2M2))


def gradient_exact(X: ArrayOrData, beta, M) -> np.ndarray:
    """Exact gradient of :func:`objective_exact` with respect to ``beta``."""
    return value_and_gradient(X, beta, M)[1]


def gradient_printed(X: ArrayOrData, beta, M) -> np.ndarray:
    """``f_i^T (M - A)(M + A)^{-3} M^2 f_i`` for every feature ``i``."""
    Xv = as_array(X)
    Mm = _kernel_matrix(M)
    A = weighted_gram(Xv, beta)
    cf = _factor(Mm, A)
    T = Mm @ Mm
    for _ in range(3):
        T = linalg.cho_solve(cf, T)
    G = (Mm - A) @ T
    G = 0.5 * (G + G.T)
    return kernels.row_quadratic_forms(np.ascontiguousarray(Xv), np.ascontiguousarray(G))


def value_and_gradient(X: ArrayOrData, beta, M):
    """``(Q_exact, grad Q_exact)`` sharing one factorization of ``M + A``.

    The n x n kernel costs O(n^3); the d quadratic forms cost O(n^2 d).
    """
    Xv = as_array(X)
    Y = _scaled_rows(Xv, beta)
    K = _k_matrix(_kernel_matrix(M), Y)
    G = _exact_gradient_kernel(K)
    g = kernels.row_quadratic_forms(np.ascontiguousarray(Xv), np.ascontiguousarray(G))
    return _exact_value(Y, K), g


def covariance_trace_oracle(X: ArrayOrData, beta, lambda1, lambda2, L, sigma=1.0) -> float:
    """``Tr(Cov(w))`` of the LapRLS coefficients, built directly in feature space.

    Every row is kept and scaled by ``sqrt(beta_i)``; the d x d system

        Z = Xg Xg^T + lambda1 Xg L Xg^T + lambda2 I

    is solved without any of the sample-space rewriting used by
    :func:`objective_exact`, so the two serve as independent checks.
    """
    Xv = as_array(X)
    beta = _check_beta(beta, Xv.shape[0])
    L = L.L if hasattr(L, "L") else np.asarray(L, dtype=np.float64)
    Xg = np.sqrt(beta)[:, None] * Xv
    C = Xg @ Xg.T
    Z = C + lambda1 * (Xg @ L @ Xg.T) + lambda2 * np.eye(Xv.shape[0])
    Zi_C = np.linalg.solve(Z, C)
    Zi = np.linalg.inv(Z)
    return float(sigma**2 * np.trace(Zi_C @ Zi))


def penalized_objective(X: ArrayOrData, beta, M, lam: float) -> float:
    """``Q_exact(beta) + lam * sum(beta)`` on the nonnegative orthant."""
    if lam < 0:
        raise InvalidInputError(f"penalty must be >= 0, got {lam}")
    beta = np.asarray(beta, dtype=np.float64)
    return objective_exact(X, beta, M) + lam * float(beta.sum())
