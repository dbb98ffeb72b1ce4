from .lbfgs import (
    OptimizeResult, STATUS_CONVERGED, STATUS_LINE_SEARCH_FAILED, STATUS_MAX_ITERS, lbfgs_minimize
)

__all__ = [
    "OptimizeResult", "STATUS_CONVERGED", "STATUS_LINE_SEARCH_FAILED", "STATUS_MAX_ITERS",
    "lbfgs_minimize",
]
