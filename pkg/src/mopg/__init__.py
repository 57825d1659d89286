"""Proximal gradient methods for convex composite multiobjective optimization.

The library minimizes vector objectives ``F_i = f_i + g_i`` (smooth plus
proxable convex terms) in the Pareto sense.  Each iteration solves a
strongly convex min-max subproblem through its differentiable dual over
the probability simplex; the plain method steps from the current point,
the accelerated one from an extrapolated point with momentum
coefficients that yield the faster rate.  A benchmark harness (CLI
``mopg``) runs seeded batches on four shipped test problems and writes
CSV records, front data and summaries.
"""

from .core import (
    Array,
    DimensionMismatchError,
    MultiObjectiveProblem,
    eval_F,
    moreau_envelope_value,
    project_nonneg,
    soft_threshold,
)
from .subproblem import (
    DualSolverConfig,
    MaxIterationsExceededError,
    NonFiniteValueError,
    SubproblemError,
    SubproblemInput,
    SubproblemSolution,
    dual_gradient,
    dual_value,
    primal_from_dual,
    project_simplex,
    psi_values,
    solve_subproblem,
)
from .solvers import (
    BacktrackDivergedError,
    IterationRecord,
    IterationTrace,
    MomentumSchedule,
    SolverConfig,
    TerminationStatus,
    backtrack_ell,
    momentum_next,
    run_accpgm,
    run_pgm,
)
from .merit import MeritConfig, UnsupportedProblemError, rate_constant, u0_estimate
from .problems import (
    PROBLEM_IDS,
    ParetoSegment,
    UnknownProblemError,
    jos1_pareto_distance,
    jos1_pareto_segment,
    make_fds,
    make_fds_nonneg,
    make_jos1,
    make_jos1_l1,
    make_problem,
    start_box,
)
from .bench import (
    ALGORITHMS,
    BenchmarkRecord,
    RunPlan,
    SummaryRow,
    build_parser,
    format_summary,
    main,
    read_records,
    run_experiment,
    run_experiment_detailed,
    sample_starts,
    summarize,
    summary_csv,
    write_csv,
    write_front,
    write_traces,
)

__version__ = "0.1.0"

__all__ = [
    "Array",
    "MultiObjectiveProblem",
    "DimensionMismatchError",
    "eval_F",
    "soft_threshold",
    "project_nonneg",
    "moreau_envelope_value",
    "DualSolverConfig",
    "SubproblemInput",
    "SubproblemSolution",
    "SubproblemError",
    "NonFiniteValueError",
    "MaxIterationsExceededError",
    "psi_values",
    "primal_from_dual",
    "dual_value",
    "dual_gradient",
    "project_simplex",
    "solve_subproblem",
    "SolverConfig",
    "MomentumSchedule",
    "momentum_next",
    "TerminationStatus",
    "IterationRecord",
    "IterationTrace",
    "BacktrackDivergedError",
    "backtrack_ell",
    "run_pgm",
    "run_accpgm",
    "MeritConfig",
    "UnsupportedProblemError",
    "u0_estimate",
    "rate_constant",
    "PROBLEM_IDS",
    "UnknownProblemError",
    "ParetoSegment",
    "start_box",
    "make_problem",
    "make_jos1",
    "make_jos1_l1",
    "make_fds",
    "make_fds_nonneg",
    "jos1_pareto_segment",
    "jos1_pareto_distance",
    "ALGORITHMS",
    "BenchmarkRecord",
    "RunPlan",
    "sample_starts",
    "run_experiment",
    "run_experiment_detailed",
    "write_csv",
    "read_records",
    "write_front",
    "write_traces",
    "SummaryRow",
    "summarize",
    "format_summary",
    "summary_csv",
    "build_parser",
    "main",
]
