"""Solvers and benchmarks for l1-constrained and l1-penalized inverse problems."""

from .homotopy import (
    Breakpoint,
    DegeneratePathError,
    HomotopyPath,
    solve_homotopy,
    tradeoff_curve,
)
from .operators import (
    LinearOperator,
    PowerIterationWarning,
    Problem,
    build_operator,
    compose_operators,
    dense_operator,
    estimate_spectral_norm,
    identity_operator,
    load_dense_matrix,
    max_adjoint_mismatch,
    partial_dft_operator,
    rank_structured_operator,
    rescale_problem,
    scale_operator,
)
from .prox import ProjectionResult, project_l1, soft_threshold, threshold_norm
from .rng import SplitMix64
from .solvers import (
    MinimizerDiagnostics,
    SolverDivergenceError,
    SolverTrace,
    StepPolicy,
    StoppingRule,
    TraceRecord,
    condition_b2_holds,
    minimizer_diagnostics,
    run_pocs,
    run_projected_gradient,
    run_projected_landweber,
    run_relaxed_radius,
    run_thresholded_landweber,
    steepest_descent_beta,
    verify_fixed_point,
)

__version__ = "0.1.0"

__all__ = [
    "Breakpoint",
    "DegeneratePathError",
    "HomotopyPath",
    "LinearOperator",
    "MinimizerDiagnostics",
    "PowerIterationWarning",
    "Problem",
    "ProjectionResult",
    "SolverDivergenceError",
    "SolverTrace",
    "SplitMix64",
    "StepPolicy",
    "StoppingRule",
    "TraceRecord",
    "build_operator",
    "compose_operators",
    "condition_b2_holds",
    "dense_operator",
    "estimate_spectral_norm",
    "identity_operator",
    "load_dense_matrix",
    "max_adjoint_mismatch",
    "minimizer_diagnostics",
    "partial_dft_operator",
    "project_l1",
    "rank_structured_operator",
    "rescale_problem",
    "run_pocs",
    "run_projected_gradient",
    "run_projected_landweber",
    "run_relaxed_radius",
    "run_thresholded_landweber",
    "scale_operator",
    "soft_threshold",
    "solve_homotopy",
    "steepest_descent_beta",
    "threshold_norm",
    "tradeoff_curve",
    "verify_fixed_point",
]
