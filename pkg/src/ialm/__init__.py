"""Augmented Lagrangian solvers for equality-constrained strongly convex QP,
with direct, conjugate-gradient, block SOR and randomly shuffled block SOR
inner iterations, and the spectral machinery to analyse them."""

from .errors import (
    BreakdownError,
    DimensionMismatch,
    FeatureIndexError,
    IalmError,
    NoConvergence,
    NotSPD,
    NotSymmetric,
    ParseError,
    RankDeficient,
    Singular,
    SingularBlock,
    TooLarge,
    TooManyBlocks,
)
from .inner import InnerReport, InnerSolverSpec, cg_solve, iterative_solve, rssor_sweep, sor_sweep
from .linalg import (
    Permutation,
    Spectrum,
    apply_permutation,
    cholesky_solve,
    condition_number_2,
    energy_norm,
    general_spectrum,
    symmetric_eigenvalues,
)
from .outer import (
    ForcingSequence,
    OuterConfig,
    SolveTrace,
    TraceAggregate,
    admm_run,
    alm_exact,
    ialm_run,
    monte_carlo,
    radmm_run,
)
from .problems import (
    ProblemSource,
    build_problem1,
    build_problem2,
    parse_libsvm,
    random_problem,
    write_libsvm,
)
from .qp import (
    AugmentedSystem,
    BlockPartition,
    BlockSystem,
    PrimalDualPoint,
    QpProblem,
    ResidualReport,
    build_augmented,
    chi,
    diag_normalize,
    is_eps_accurate,
    reference_solution,
    residuals,
    solve_saddle,
)
from .spectral import (
    IterationMatrix,
    TheoreticalBounds,
    beta_for_rho,
    compute_bounds,
    cyclic_matrix,
    cyclic_parts,
    expected_matrix,
    outer_maps,
    permutation_scan,
    rho_outer,
    shuffled_matrix,
    shuffled_parts,
    sweep_matrix,
)
from .tolerances import TOL, Tolerances

__version__ = "0.1.0"
