"""Central numerical tolerances shared by the library, the CLI and the tests."""

from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    # input validation
    symmetry_rtol: float = 1e-12        # max |B - B^T| relative to max |B|
    entry_match: float = 1e-12          # entrywise assembly identities
    rank_cond_max: float = 1e12         # k2(A A^T) above this -> rank deficient

    # factorizations / eigensolvers
    spd_residual: float = 1e-10         # ||B y - rhs|| <= tol * (1 + ||rhs||)
    eig_max_iter: int = 10_000
    # QL deflation floor, times ||B||_F; machine-eps level so small
    # eigenvalues of gram matrices stay resolvable
    eig_offdiag_rel: float = 2.220446049250313e-16
    eig_clamp: float = 1e-12            # eigenvalues in [-clamp, 0] treated as 0
    singular_ratio: float = 1e-14       # sigma_min below this * sigma_max -> Singular
    gram_rank_rel: float = 64.0 * 2.220446049250313e-16  # per-order numerical-zero cut
    quadform_floor: float = -1e-12      # v^T B v below this -> not SPD

    # outer iteration
    divergence_threshold: float = 1e12  # combined residual beyond this -> diverged

    # combinatorics
    factorial_cap: int = 8              # largest order enumerated exhaustively


TOL = Tolerances()
