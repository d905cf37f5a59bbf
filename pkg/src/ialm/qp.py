"""Equality-constrained strongly convex QP and its penalty-augmented objects.

The problem is min 0.5 x^T H x + g^T x  s.t.  A x = b with H SPD and A of
full row rank.  For a penalty weight beta > 0 the derived objects are the
penalized Hessian H + beta A^T A, the (beta-scaled) KKT saddle matrix and
right-hand side, and the block splitting of the penalized Hessian used by
the sweep-based inner solvers.
"""

from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .errors import DimensionMismatch, NotSPD, RankDeficient, Singular, SingularBlock
from .tolerances import TOL


@dataclass(frozen=True)
class BlockPartition:
    """Ordered sizes of the primal variable blocks; sizes sum to the dimension."""

    sizes: tuple

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.sizes)
        if len(sizes) < 1 or any(s < 1 for s in sizes):
            raise ValueError(f"block sizes must be positive, got {sizes}")
        object.__setattr__(self, "sizes", sizes)

    @classmethod
    def units(cls, d):
        return cls((1,) * d)

    @property
    def dimension(self):
        return sum(self.sizes)

    @property
    def n_blocks(self):
        return len(self.sizes)

    @property
    def offsets(self):
        out = [0]
        for s in self.sizes:
            out.append(out[-1] + s)
        return tuple(out)

    def slices(self):
        off = self.offsets
        return [slice(off[i], off[i + 1]) for i in range(self.n_blocks)]

    def scalar_order(self, block_order):
        """Scalar index order that lists the blocks in `block_order`."""
        off = self.offsets
        idx = []
        for b in block_order:
            idx.extend(range(off[b], off[b + 1]))
        return np.array(idx, dtype=int)

    def permuted(self, block_order):
        return BlockPartition(tuple(self.sizes[b] for b in block_order))

    def block_lower_mask(self):
        """Boolean mask of the block lower triangle (diagonal blocks included)."""
        d = self.dimension
        mask = np.zeros((d, d), dtype=bool)
        sls = self.slices()
        for i, si in enumerate(sls):
            for j, sj in enumerate(sls[: i + 1]):
                mask[si, sj] = True
        return mask


@dataclass(frozen=True)
class QpProblem:
    """The quadruple (H, g, A, b) plus the block partition of the primal variables."""

    H: np.ndarray
    g: np.ndarray
    A: np.ndarray
    b: np.ndarray
    blocks: BlockPartition

    def __post_init__(self):
        H = linalg.require_symmetric(self.H, "H")
        g = linalg.as_vector(self.g, "g")
        A = linalg.as_matrix(self.A, "A")
        b = linalg.as_vector(self.b, "b")
        d = H.shape[0]
        m = A.shape[0]
        if A.shape[1] != d or g.size != d or b.size != m:
            raise DimensionMismatch(
                f"inconsistent shapes: H {H.shape}, g {g.shape}, A {A.shape}, b {b.shape}"
            )
        if d < m:
            raise DimensionMismatch(f"need d >= m, got d={d}, m={m}")
        eigs, _ = linalg.symmetric_eigh(H, "H")
        if eigs[-1] <= 0.0:
            raise NotSPD(f"H smallest eigenvalue {eigs[-1]:g} is not positive")
        gram = A @ A.T
        try:
            cond = linalg.condition_number_2(gram)
        except Singular as exc:
            raise RankDeficient(f"A A^T numerically singular: {exc}") from exc
        if cond > TOL.rank_cond_max:
            raise RankDeficient(f"k2(A A^T) = {cond:.3e} exceeds {TOL.rank_cond_max:g}")
        if self.blocks.dimension != d:
            raise DimensionMismatch(
                f"block sizes sum to {self.blocks.dimension}, expected {d}"
            )
        object.__setattr__(self, "H", H)
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)

    @property
    def dimension(self):
        return self.H.shape[0]

    @property
    def n_constraints(self):
        return self.A.shape[0]


@dataclass(frozen=True)
class PrimalDualPoint:
    x: np.ndarray
    mu: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x", linalg.as_vector(self.x, "x"))
        object.__setattr__(self, "mu", linalg.as_vector(self.mu, "mu"))

    @classmethod
    def zero(cls, problem):
        return cls(np.zeros(problem.dimension), np.zeros(problem.n_constraints))

    def stacked(self):
        return np.concatenate([self.x, self.mu])


@dataclass(frozen=True)
class ResidualReport:
    """Norms certifying a primal-dual point.

    primal = ||A x - b||, dual = ||H x + g - A^T mu||, combined is the norm of
    the full (beta-scaled) KKT residual, inner_residual the norm of the
    penalized-Hessian equation residual at this point (the realized inner-solve
    residual when produced by a run).
    """

    primal: float
    dual: float
    combined: float
    inner_residual: float

    def __post_init__(self):
        # non-finite values are legal only as evidence of a diverging run
        for name in ("primal", "dual", "combined", "inner_residual"):
            v = float(getattr(self, name))
            if np.isfinite(v) and v < 0.0:
                raise ValueError(f"{name} must be nonnegative, got {v}")
            object.__setattr__(self, name, v)

    def is_finite(self):
        return all(
            np.isfinite(v) for v in (self.primal, self.dual, self.combined, self.inner_residual)
        )


@dataclass(frozen=True)
class BlockSystem:
    """An SPD matrix with a block partition and its cached diagonal-block
    Cholesky factors; the unit the sweep-based solvers operate on."""

    matrix: np.ndarray
    partition: BlockPartition
    factors: tuple = field(repr=False)

    @classmethod
    def build(cls, matrix, partition):
        matrix = linalg.require_symmetric(matrix, "matrix")
        if partition.dimension != matrix.shape[0]:
            raise DimensionMismatch("partition does not match matrix order")
        factors = []
        for sl in partition.slices():
            try:
                factors.append(linalg.cholesky_factor(matrix[sl, sl], "diagonal block"))
            except NotSPD as exc:
                raise SingularBlock(str(exc)) from exc
        return cls(matrix=matrix, partition=partition, factors=tuple(factors))

    def solve_block(self, i, rhs):
        return linalg.cholesky_solve_factored(self.factors[i], rhs)


@dataclass(frozen=True)
class AugmentedSystem:
    """beta-dependent derived objects of one QpProblem.

    hessian = H + beta A^T A, kkt = [[hessian, -A^T], [beta A, 0]],
    rhs = [beta A^T b - g; beta b].  block_diag and strict_lower split the
    penalized Hessian as hessian = block_diag - strict_lower - strict_lower^T
    with respect to the problem's partition.  Per-block Cholesky factors and
    the full factor of the penalized Hessian are cached at construction; all
    fields are read-only afterwards.
    """

    problem: QpProblem
    beta: float
    hessian: np.ndarray
    kkt: np.ndarray
    rhs: np.ndarray
    block_diag: np.ndarray
    strict_lower: np.ndarray
    sweeper: BlockSystem = field(repr=False)
    hessian_factor: np.ndarray = field(repr=False)
    schur_factor: np.ndarray = field(repr=False)

    @property
    def blocks(self):
        return self.problem.blocks

    @property
    def block_factors(self):
        return self.sweeper.factors

    def solve_hessian(self, rhs):
        """Solve (H + beta A^T A) y = rhs with the cached factor."""
        return linalg.cholesky_solve_factored(self.hessian_factor, rhs)


def build_augmented(problem, beta):
    """Assemble the penalized system for one beta > 0."""
    beta = float(beta)
    if not beta > 0.0:
        raise ValueError(f"beta must be positive, got {beta}")
    H, A, g, b = problem.H, problem.A, problem.g, problem.b
    d, m = problem.dimension, problem.n_constraints
    hessian = H + beta * (A.T @ A)
    hessian = 0.5 * (hessian + hessian.T)
    kkt = np.zeros((d + m, d + m))
    kkt[:d, :d] = hessian
    kkt[:d, d:] = -A.T
    kkt[d:, :d] = beta * A
    rhs = np.concatenate([beta * (A.T @ b) - g, beta * b])

    mask = problem.blocks.block_lower_mask()
    diag_mask = np.zeros_like(mask)
    for sl in problem.blocks.slices():
        diag_mask[sl, sl] = True
    block_diag = np.where(diag_mask, hessian, 0.0)
    strict_lower = np.where(mask & ~diag_mask, -hessian, 0.0)

    sweeper = BlockSystem.build(hessian, problem.blocks)
    hess_factor = linalg.cholesky_factor(hessian, "penalized Hessian")

    # Schur complement beta * A (H + beta A^T A)^{-1} A^T, SPD because A has
    # full row rank; its factor gives the direct saddle solve.
    AH = np.empty((m, d))
    for i in range(m):
        AH[i] = linalg.cholesky_solve_factored(hess_factor, A[i])
    schur = beta * (AH @ A.T)
    schur = 0.5 * (schur + schur.T)
    schur_factor = linalg.cholesky_factor(schur, "dual Schur complement")

    return AugmentedSystem(
        problem=problem,
        beta=beta,
        hessian=hessian,
        kkt=kkt,
        rhs=rhs,
        block_diag=block_diag,
        strict_lower=strict_lower,
        sweeper=sweeper,
        hessian_factor=hess_factor,
        schur_factor=schur_factor,
    )


def chi(sys, mu):
    """Inner-solve right-hand side A^T mu + beta A^T b - g for the given multiplier."""
    mu = linalg.as_vector(mu, "mu")
    A, g, b = sys.problem.A, sys.problem.g, sys.problem.b
    if mu.size != sys.problem.n_constraints:
        raise DimensionMismatch("multiplier length does not match constraint count")
    return A.T @ mu + sys.beta * (A.T @ b) - g


def residuals(problem, sys, z, inner_residual=None):
    """Primal, dual, combined and inner residual norms of one primal-dual point."""
    x, mu = z.x, z.mu
    if x.size != problem.dimension or mu.size != problem.n_constraints:
        raise DimensionMismatch("point does not match problem dimensions")
    Ax_b = problem.A @ x - problem.b
    dual_vec = problem.H @ x + problem.g - problem.A.T @ mu
    top = sys.hessian @ x - problem.A.T @ mu - (sys.beta * (problem.A.T @ problem.b) - problem.g)
    bottom = sys.beta * Ax_b
    combined = float(np.sqrt(top @ top + bottom @ bottom))
    if inner_residual is None:
        inner_residual = float(np.linalg.norm(top))
    return ResidualReport(
        primal=float(np.linalg.norm(Ax_b)),
        dual=float(np.linalg.norm(dual_vec)),
        combined=combined,
        inner_residual=float(inner_residual),
    )


def is_eps_accurate(report, eps):
    """True iff both the primal and the dual residual are at most eps."""
    eps = float(eps)
    if not eps > 0.0:
        raise ValueError("eps must be positive")
    return report.primal <= eps and report.dual <= eps


def solve_saddle(sys, rhs=None):
    """Direct solve of the saddle system via the cached Schur factorization."""
    d = sys.problem.dimension
    if rhs is None:
        rhs = sys.rhs
    rhs = linalg.as_vector(rhs, "rhs")
    if rhs.size != d + sys.problem.n_constraints:
        raise DimensionMismatch("rhs length does not match saddle order")
    w1, w2 = rhs[:d], rhs[d:]
    h_inv_w1 = sys.solve_hessian(w1)
    mu = linalg.cholesky_solve_factored(
        sys.schur_factor, w2 - sys.beta * (sys.problem.A @ h_inv_w1)
    )
    x = sys.solve_hessian(w1 + sys.problem.A.T @ mu)
    return PrimalDualPoint(x=x, mu=mu)


def reference_solution(sys):
    """The unique primal-dual solution of the penalized KKT system."""
    return solve_saddle(sys)


def diag_normalize(sys):
    """Scale the penalized Hessian to unit block diagonal.

    Returns (Htilde, scale) with scale the symmetric inverse square root of
    the block diagonal and Htilde = scale @ hessian @ scale (SPD, and with
    identity diagonal blocks).
    """
    d = sys.problem.dimension
    scale = np.zeros((d, d))
    for sl in sys.problem.blocks.slices():
        scale[sl, sl] = linalg.spd_inv_sqrt(sys.hessian[sl, sl])
    htilde = scale @ sys.hessian @ scale
    htilde = 0.5 * (htilde + htilde.T)
    eigs, _ = linalg.symmetric_eigh(htilde, "scaled Hessian")
    if eigs[-1] <= 0.0:
        raise NotSPD("scaled Hessian lost positive definiteness")
    return htilde, scale
