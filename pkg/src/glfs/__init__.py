"""Graph-based Laplacian feature selection."""

__version__ = "0.1.0"

from ._backend import BACKEND
from .baselines import greedy_variance_select, laplacian_score
from .exceptions import (
    EmptySelectionError,
    GLFSError,
    InvalidInputError,
    InvalidParameterError,
    NumericalError,
    ParseError,
)
from .graph import (
    DataMatrix,
    LaplacianOperator,
    ManifoldKernel,
    SimilarityGraph,
    build_knn_heat_graph,
    laplacian,
    manifold_kernel,
)
from .objective import (
    covariance_trace_oracle,
    gradient_exact,
    gradient_printed,
    objective_exact,
    objective_paper,
    value_and_gradient,
)
from .optimizer import (
    OptimizerConfig,
    PenaltySchedule,
    SolveResult,
    lambda_line_search,
    owd_minimize,
)
from .pipeline import GLFSParams, glfs_select, glfs_weights, rank_order
