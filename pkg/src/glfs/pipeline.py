"""End-to-end GLFS: graph, manifold kernel, then the penalized solve."""

from dataclasses import dataclass
from typing import Optional, TextIO

import numpy as np

from .graph import ArrayOrData, ManifoldKernel, as_array, build_knn_heat_graph, laplacian, manifold_kernel
from .optimizer import (
    LineSearchResult,
    OptimizerConfig,
    PenaltySchedule,
    SolveResult,
    lambda_line_search,
    owd_minimize,
)


@dataclass(frozen=True)
class GLFSParams:
    lambda1: float = 10.0
    lambda2: float = 1.0
    k: int = 5
    t: object = "auto"


def kernel_for(X: ArrayOrData, params: GLFSParams = GLFSParams()) -> ManifoldKernel:
    S = build_knn_heat_graph(X, params.k, params.t)
    return manifold_kernel(laplacian(S), params.lambda1, params.lambda2)


def glfs_select(
    X: ArrayOrData,
    params: GLFSParams = GLFSParams(),
    schedule: Optional[PenaltySchedule] = None,
    cfg: Optional[OptimizerConfig] = None,
    trace: Optional[TextIO] = None,
) -> LineSearchResult:
    """Feature weights with the penalty picked by the halving/growth schedule."""
    Xv = as_array(X)
    return lambda_line_search(Xv, kernel_for(Xv, params), cfg=cfg, schedule=schedule, trace=trace)


def glfs_weights(
    X: ArrayOrData,
    lam: float,
    params: GLFSParams = GLFSParams(),
    cfg: Optional[OptimizerConfig] = None,
    M: Optional[ManifoldKernel] = None,
) -> SolveResult:
    """Feature weights at a fixed penalty ``lam``."""
    Xv = as_array(X)
    if M is None:
        M = kernel_for(Xv, params)
    return owd_minimize(Xv, M, lam, cfg=cfg)


def rank_order(weights) -> np.ndarray:
    """Feature indices by decreasing weight; equal weights keep index order."""
    w = np.asarray(weights, dtype=np.float64)
    return np.lexsort((np.arange(w.size), -w))
