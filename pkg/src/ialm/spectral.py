"""Iteration matrices, spectral radii and the theoretical rate machinery.

Every stationary map the solvers realize is assembled explicitly here so its
spectrum can be inspected: the exact outer map and its input map, the
one-sweep cyclic (Gauss-Seidel) map, its randomly shuffled per-permutation
variants, their uniform average, and the plain sweep operators used by the
order-dependence scan.  The bound constants of the convergence analysis are
evaluated numerically from the same objects.
"""

import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import linalg, qp
from .errors import NoConvergence, TooLarge, TooManyBlocks
from .linalg import Permutation, njit
from .tolerances import TOL

# role tags for IterationMatrix
ROLE_OUTER = "outer"                    # exact outer fixed-point map
ROLE_OUTER_INPUT = "outer_input"        # map applied to the constant term
ROLE_CYCLIC = "cyclic"                  # one-sweep cyclic (natural order)
ROLE_SHUFFLED = "cyclic_shuffled"       # one-sweep map for a given block order
ROLE_EXPECTED = "cyclic_expected"       # uniform average over all block orders
ROLE_SWEEP = "sweep"                    # plain (RS)SOR sweep operator on one SPD matrix


@dataclass(frozen=True)
class IterationMatrix:
    matrix: np.ndarray
    role: str
    beta: float
    spectrum: linalg.Spectrum
    permutation: Permutation = None

    @property
    def spectral_radius(self):
        return self.spectrum.spectral_radius


def _tagged(matrix, role, beta, permutation=None):
    return IterationMatrix(
        matrix=matrix,
        role=role,
        beta=beta,
        spectrum=linalg.general_spectrum(matrix),
        permutation=permutation,
    )


# ---------------------------------------------------------------------------
# exact outer map


def _hessian_inverse(sys):
    d = sys.problem.dimension
    inv = np.empty((d, d))
    eye = np.eye(d)
    for j in range(d):
        inv[:, j] = sys.solve_hessian(eye[:, j])
    return inv


def outer_maps(sys):
    """The exact outer fixed-point pair (iteration map, input map).

    input map F = [[Hb^-1, 0], [-beta A Hb^-1, I]]; iteration map
    G = F @ [[0, A^T], [0, I]], so one exact outer step is z -> G z + F rhs.
    """
    A = sys.problem.A
    d, m = sys.problem.dimension, sys.problem.n_constraints
    hinv = _hessian_inverse(sys)
    F = np.zeros((d + m, d + m))
    F[:d, :d] = hinv
    F[d:, :d] = -sys.beta * (A @ hinv)
    F[d:, d:] = np.eye(m)
    right = np.zeros((d + m, d + m))
    right[:d, d:] = A.T
    right[d:, d:] = np.eye(m)
    G = F @ right
    return (
        _tagged(G, ROLE_OUTER, sys.beta),
        _tagged(F, ROLE_OUTER_INPUT, sys.beta),
    )


def rho_outer(sys):
    """Spectral radius of the exact outer map, via its m x m reduced block.

    The outer map is block upper triangular with a zero primal block, so its
    nonzero eigenvalues are those of the symmetric I - beta A Hb^-1 A^T.
    """
    A = sys.problem.A
    m = sys.problem.n_constraints
    AH = np.empty((m, sys.problem.dimension))
    for i in range(m):
        AH[i] = sys.solve_hessian(A[i])
    Y = np.eye(m) - sys.beta * (AH @ A.T)
    Y = 0.5 * (Y + Y.T)
    eigs, _ = linalg.symmetric_eigh(Y, "reduced outer map")
    return float(np.abs(eigs).max())


def beta_for_rho(problem, target, lo=1e-8, hi=1e8, iters=80):
    """Penalty weight whose outer spectral radius is approximately `target`.

    The radius decreases in beta; plain bisection.
    """
    if not 0.0 < target < 1.0:
        raise ValueError("target radius must lie in (0, 1)")
    f = lambda b: rho_outer(qp.build_augmented(problem, b)) - target
    flo, fhi = f(lo), f(hi)
    if flo < 0.0:
        return lo
    if fhi > 0.0:
        return hi
    for _ in range(iters):
        mid = math.sqrt(lo * hi)
        if f(mid) > 0.0:
            lo = mid
        else:
            hi = mid
        if hi / lo < 1.0 + 1e-12:
            break
    return math.sqrt(lo * hi)


# ---------------------------------------------------------------------------
# cyclic (one-sweep) maps


def _solve_block_lower(hessian, slices, factors, rhs_matrix):
    """Solve (block lower triangle of hessian) X = rhs_matrix by block
    forward substitution with the cached diagonal-block factors."""
    X = np.zeros_like(rhs_matrix)
    for i, sl in enumerate(slices):
        local = rhs_matrix[sl] - hessian[sl, : sl.start] @ X[: sl.start]
        for j in range(local.shape[1]):
            X[sl, j] = linalg.cholesky_solve_factored(factors[i], local[:, j])
    return X


def _cyclic_parts(hessian, A, beta, partition, factors, rhs):
    """Affine map (G, c) of one Gauss-Seidel sweep plus the dual step,
    expressed in the coordinates of `hessian` (natural block order)."""
    d = hessian.shape[0]
    m = A.shape[0]
    slices = partition.slices()
    mask = partition.block_lower_mask()
    strict_upper = np.where(~mask, hessian, 0.0)
    # right factor rows for the primal block: [L^T | A^T] with L^T = -strict_upper
    top_rhs = np.hstack([-strict_upper, A.T])
    Y = _solve_block_lower(hessian, slices, factors, top_rhs)
    G = np.zeros((d + m, d + m))
    G[:d] = Y
    G[d:, :] = -beta * (A @ Y)
    G[d:, d:] += np.eye(m)
    # constant term: [[DL,0],[beta A,I]]^{-1} rhs
    c_top = _solve_block_lower(hessian, slices, factors, rhs[:d].reshape(-1, 1))[:, 0]
    c = np.concatenate([c_top, rhs[d:] - beta * (A @ c_top)])
    return G, c


def cyclic_parts(sys):
    """Affine map (G, c) of one one-sweep outer step in natural block order."""
    return _cyclic_parts(
        sys.hessian, sys.problem.A, sys.beta, sys.blocks, sys.block_factors, sys.rhs
    )


def cyclic_matrix(sys):
    """Iteration matrix of the one-sweep cyclic method (natural order)."""
    G, _ = cyclic_parts(sys)
    return _tagged(G, ROLE_CYCLIC, sys.beta)


def shuffled_parts(sys, perm):
    """Affine map (G, c) of one one-sweep step with blocks taken in `perm` order."""
    if perm.order != sys.blocks.n_blocks:
        raise TooManyBlocks(
            f"permutation order {perm.order} does not match {sys.blocks.n_blocks} blocks"
        )
    d = sys.problem.dimension
    m = sys.problem.n_constraints
    s = sys.blocks.scalar_order(perm.image)
    part_p = sys.blocks.permuted(perm.image)
    hess_p = sys.hessian[np.ix_(s, s)]
    A_p = sys.problem.A[:, s]
    factors_p = tuple(sys.block_factors[b] for b in perm.image)
    rhs_p = np.concatenate([sys.rhs[:d][s], sys.rhs[d:]])
    Gp, cp = _cyclic_parts(hess_p, A_p, sys.beta, part_p, factors_p, rhs_p)
    # conjugate back to the original variable order
    E = np.zeros((d + m, d + m))
    E[:d, :d] = np.eye(d)[list(s)]
    E[d:, d:] = np.eye(m)
    G = E.T @ Gp @ E
    c = E.T @ cp
    return G, c


def shuffled_matrix(sys, perm):
    """Iteration matrix of the one-sweep step for one block ordering."""
    G, _ = shuffled_parts(sys, perm)
    return _tagged(G, ROLE_SHUFFLED, sys.beta, permutation=perm)


def expected_matrix(sys):
    """Uniform average of the one-sweep maps over all block orderings."""
    n = sys.blocks.n_blocks
    if n > TOL.factorial_cap:
        raise TooManyBlocks(f"{n} blocks exceed the enumeration cap {TOL.factorial_cap}")
    total = None
    count = 0
    for image in itertools.permutations(range(n)):
        G, _ = shuffled_parts(sys, Permutation(image))
        total = G if total is None else total + G
        count += 1
    return _tagged(total / count, ROLE_EXPECTED, sys.beta)


# ---------------------------------------------------------------------------
# sweep-operator order-dependence scan


def sweep_matrix(B, omega, perm=None):
    """Relaxed-sweep operator I - omega P^T (D_P - omega L_P)^{-1} P B for a
    scalar ordering of the SPD matrix B (identity ordering if perm is None)."""
    B = linalg.require_symmetric(B, "B")
    n = B.shape[0]
    perm = perm or Permutation.identity(n)
    if perm.order != n:
        raise TooLarge("permutation order does not match matrix order")
    s = list(perm.image)
    Bp = B[np.ix_(s, s)]
    T = np.tril(Bp, -1) * omega + np.diag(np.diag(Bp))
    Y = np.empty_like(Bp)
    for j in range(n):
        Y[:, j] = linalg.solve_lower_triangular(T, omega * Bp[:, j])
    Mp = np.eye(n) - Y
    E = np.eye(n)[s]
    return E.T @ Mp @ E


@njit(cache=True)
def _scan_orders(B, orders, omega, max_iter):
    n = B.shape[0]
    count = orders.shape[0]
    out = np.empty(count)
    for t in range(count):
        o = orders[t]
        Bp = np.empty((n, n))
        for i in range(n):
            for j in range(n):
                Bp[i, j] = B[o[i], o[j]]
        M = np.zeros((n, n))
        for c in range(n):
            for i in range(n):
                acc = omega * Bp[i, c]
                for j in range(i):
                    acc -= omega * Bp[i, j] * M[j, c]
                M[i, c] = acc / Bp[i, i]
        for i in range(n):
            for j in range(n):
                M[i, j] = -M[i, j]
            M[i, i] += 1.0
        M = linalg._balance(M)
        M = linalg._hessenberg(M)
        wr, wi, ok = linalg._hqr(M, max_iter)
        if not ok:
            out[t] = np.nan
        else:
            r = 0.0
            for i in range(n):
                v = np.hypot(wr[i], wi[i])
                if v > r:
                    r = v
            out[t] = r
    return out


def permutation_scan(B, omega):
    """Spectral radius of the sweep operator for every scalar ordering of B.

    Returns [(Permutation, radius)] in lexicographic order of the orderings.
    The spectrum of the reordered sweep operator is conjugation-invariant, so
    each radius is computed on the operator in its own ordering.
    """
    B = linalg.require_symmetric(B, "B")
    n = B.shape[0]
    if n > TOL.factorial_cap:
        raise TooLarge(f"order {n} exceeds the scan cap {TOL.factorial_cap}")
    if not 0.0 < omega < 2.0:
        raise ValueError(f"omega must lie in (0, 2), got {omega}")
    if np.any(np.diag(B) <= 0.0):
        raise ValueError("diagonal entries must be positive")
    images = list(itertools.permutations(range(n)))
    orders = np.array(images, dtype=np.int64)
    radii = _scan_orders(B, orders, float(omega), TOL.eig_max_iter)
    if np.isnan(radii).any():
        raise NoConvergence("sweep-operator spectrum failed to converge")
    return [(Permutation(img), float(r)) for img, r in zip(images, radii)]


# ---------------------------------------------------------------------------
# theoretical bound constants


@dataclass(frozen=True)
class TheoreticalBounds:
    """Numerically evaluated constants of the convergence analysis."""

    rho_beta: float        # spectral radius of the exact outer map
    norm_A: float          # spectral norm of the saddle matrix
    norm_Ainv: float       # spectral norm of its inverse
    norm_F: float          # spectral norm of the input map
    C1: float              # 1 + ||A^T||
    C2: float              # geometric-series constant of the residual bound
    C_bar: float           # max(C1*C2, C2/beta)
    L_cor: float           # bound on ||beta (A x^k - b)|| / R^k
    cg_rate: float         # (sqrt(k2)-1)/(sqrt(k2)+1) of the penalized Hessian
    sor_rate: float        # dimension-dependent per-sweep squared-error factor
    rssor_rate: float      # dimension-free expected per-sweep squared-error factor
    j_bar_estimate: int    # a priori bound on inner iterations per outer step


def alm_envelope_constant(bounds, d0_norm, beta):
    """Constant of the exact-run primal envelope: k2(saddle) * ||d0|| / beta."""
    return bounds.norm_A * bounds.norm_Ainv * float(d0_norm) / float(beta)


def sor_rate_factor(lam_max, cond, omega, dimension):
    half_log = 0.5 * math.floor(math.log2(2 * dimension))
    gain = (2.0 - omega) * omega * lam_max / ((1.0 + half_log * omega * lam_max) ** 2 * cond)
    return 1.0 - gain


def rssor_rate_factor(lam_max, cond, omega):
    gain = (2.0 - omega) * omega * lam_max / ((1.0 + omega * lam_max) ** 2 * cond)
    return 1.0 - gain


def compute_bounds(problem, sys, forcing, spec):
    """Evaluate every bound constant for this system, forcing sequence and solver.

    Requires forcing.R above the outer spectral radius (the finiteness
    constant does not exist otherwise).  The starting point is taken as the
    origin, so the initial combined residual is the norm of the saddle rhs.
    """
    G, F = outer_maps(sys)
    rho = G.spectral_radius
    norm_A, sig_min = linalg.extreme_singular_values(sys.kkt)
    norm_Ainv = 1.0 / sig_min
    norm_F = linalg.spectral_norm(F.matrix)
    norm_At = linalg.spectral_norm(problem.A)
    d0 = float(np.linalg.norm(sys.rhs))
    R = forcing.R
    if R <= rho:
        raise ValueError(f"forcing R = {R:g} must exceed the outer radius {rho:g}")

    C1 = 1.0 + norm_At
    ratio = R / rho if rho > 0.0 else np.inf
    if R < rho:
        C2 = max(norm_A * norm_Ainv * d0, ratio * norm_A * norm_F / (1.0 - ratio))
    else:
        C2 = max(norm_A * norm_Ainv * d0, norm_A * norm_F)
    C_bar = max(C1 * C2, C2 / sys.beta)
    L_cor = norm_A * norm_Ainv * d0 + norm_A * norm_F / (1.0 - rho / R)

    h_eigs, _ = linalg.symmetric_eigh(sys.hessian, "penalized Hessian")
    k2_h = h_eigs[0] / h_eigs[-1]
    cg_rate = (math.sqrt(k2_h) - 1.0) / (math.sqrt(k2_h) + 1.0)

    htilde, _ = qp.diag_normalize(sys)
    t_eigs, _ = linalg.symmetric_eigh(htilde, "scaled Hessian")
    lam_max, lam_min = t_eigs[0], t_eigs[-1]
    k2_t = lam_max / lam_min
    d = problem.dimension
    sor_rate = sor_rate_factor(lam_max, k2_t, spec.omega, d)
    rssor_rate = rssor_rate_factor(lam_max, k2_t, spec.omega)

    d_eigs, _ = linalg.symmetric_eigh(sys.block_diag, "block diagonal")
    k2_d = d_eigs[0] / d_eigs[-1]

    if spec.method == "cg":
        arg = R / (2.0 * math.sqrt(k2_h) * (1.0 + norm_At * L_cor))
        base = cg_rate
    elif spec.method in ("sor", "rssor"):
        arg = 2.0 * R / (math.sqrt(k2_t * k2_d) * (1.0 + norm_At * L_cor))
        base = rssor_rate
    else:
        arg, base = 1.0, 0.5
    if arg >= 1.0 or base <= 0.0:
        j_bar = 1
    else:
        j_bar = max(1, math.ceil(math.log(arg) / math.log(base)))

    return TheoreticalBounds(
        rho_beta=rho,
        norm_A=norm_A,
        norm_Ainv=norm_Ainv,
        norm_F=norm_F,
        C1=C1,
        C2=C2,
        C_bar=C_bar,
        L_cor=L_cor,
        cg_rate=cg_rate,
        sor_rate=sor_rate,
        rssor_rate=rssor_rate,
        j_bar_estimate=int(j_bar),
    )
