"""Memory-budgeted tensor graph compiler."""

from ._core import (
    BudgetExceeded,
    Error,
    Graph,
    PassConfig,
    build_kernel_mvm,
    build_knn,
    build_pairwise_distance,
    evaluate,
    run_pipeline,
)

__all__ = [
    "BudgetExceeded",
    "Error",
    "Graph",
    "PassConfig",
    "build_kernel_mvm",
    "build_knn",
    "build_pairwise_distance",
    "evaluate",
    "run_pipeline",
]
