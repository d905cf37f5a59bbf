"""Inner solvers for the penalized-Hessian system (H + beta A^T A) x = chi.

Four interchangeable methods under one stopping contract: a dense direct
solve, conjugate gradients, block SOR (Gauss-Seidel at omega = 1) and the
randomly shuffled block SOR that redraws a uniform block ordering every
sweep.  Stopping is either a residual target (forcing-sequence mode) or an
exact sweep count.
"""

from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import BreakdownError, DimensionMismatch
from .linalg import Permutation

METHODS = ("direct", "cg", "sor", "rssor")
STOP_MODES = ("residual_target", "fixed_sweeps")
WARM_STARTS = ("previous_outer_iterate", "zero")

# residual recursion drift containment: recompute ||chi - H x|| from scratch
CG_REFRESH = 50


@dataclass(frozen=True)
class InnerSolverSpec:
    """Which inner method runs, how it relaxes, and when it stops."""

    method: str = "direct"
    omega: float = 1.0
    stop: str = "residual_target"
    sweeps: int = 1
    max_iters: int = 100_000
    warm_start: str = "previous_outer_iterate"

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.stop not in STOP_MODES:
            raise ValueError(f"stop must be one of {STOP_MODES}, got {self.stop!r}")
        if self.warm_start not in WARM_STARTS:
            raise ValueError(f"warm_start must be one of {WARM_STARTS}")
        if not 0.0 < float(self.omega) < 2.0:
            raise ValueError(f"omega must lie in (0, 2), got {self.omega}")
        if int(self.sweeps) < 1:
            raise ValueError("sweeps must be at least 1")
        if int(self.max_iters) < 1:
            raise ValueError("max_iters must be at least 1")
        object.__setattr__(self, "omega", float(self.omega))
        object.__setattr__(self, "sweeps", int(self.sweeps))
        object.__setattr__(self, "max_iters", int(self.max_iters))

    @property
    def is_random(self):
        return self.method == "rssor"


@dataclass(frozen=True)
class InnerReport:
    """Result of one inner solve: the iterate, the work count and the residual."""

    solution: np.ndarray
    iterations: int
    final_residual: float
    hit_cap: bool = False
    permutation_log: tuple = None


def _block_system(system):
    """Accept an AugmentedSystem (via its sweeper) or a bare BlockSystem."""
    sweeper = getattr(system, "sweeper", None)
    return sweeper if sweeper is not None else system


def _residual_norm(system, chi_vec, x):
    return float(np.linalg.norm(_block_system(system).matrix @ x - chi_vec))


def _check_dims(system, chi_vec, x):
    d = _block_system(system).matrix.shape[0]
    if chi_vec.size != d or x.size != d:
        raise DimensionMismatch("inner solve vectors do not match the system dimension")


def cg_solve(system, chi_vec, x0, target, cap):
    """Conjugate gradients on the system matrix from x0.

    Stops at the first iterate whose residual norm is at most `target`
    (checked on the recursive residual, refreshed from scratch every
    CG_REFRESH steps) or after `cap` iterations, whichever happens first.
    """
    chi_vec = linalg.as_vector(chi_vec, "chi")
    x = linalg.as_vector(x0, "x0").copy()
    _check_dims(system, chi_vec, x)
    H = _block_system(system).matrix
    r = chi_vec - H @ x
    if np.linalg.norm(r) <= target:
        return InnerReport(x, 0, _residual_norm(system, chi_vec, x))
    p = r.copy()
    rs = float(r @ r)
    for j in range(1, int(cap) + 1):
        Hp = H @ p
        curv = float(p @ Hp)
        if curv <= 0.0:
            raise BreakdownError(f"direction with curvature {curv:g}; matrix not SPD")
        alpha = rs / curv
        x += alpha * p
        if j % CG_REFRESH == 0:
            r = chi_vec - H @ x
        else:
            r -= alpha * Hp
        rs_new = float(r @ r)
        if np.sqrt(rs_new) <= target:
            return InnerReport(x, j, _residual_norm(system, chi_vec, x))
        p = r + (rs_new / rs) * p
        rs = rs_new
    return InnerReport(x, int(cap), _residual_norm(system, chi_vec, x), hit_cap=True)


def _sweep_in_order(bs, chi_vec, x, omega, block_order):
    """One relaxed block sweep over the given block order (in place on x)."""
    H = bs.matrix
    slices = bs.partition.slices()
    for b in block_order:
        sl = slices[b]
        local = chi_vec[sl] - H[sl, :] @ x + H[sl, sl] @ x[sl]
        y = bs.solve_block(b, local)
        x[sl] = (1.0 - omega) * x[sl] + omega * y
    return x


def sor_sweep(system, chi_vec, x, omega):
    """One block SOR sweep in natural block order; omega = 1 is Gauss-Seidel."""
    if not 0.0 < omega < 2.0:
        raise ValueError(f"omega must lie in (0, 2), got {omega}")
    chi_vec = linalg.as_vector(chi_vec, "chi")
    x = linalg.as_vector(x, "x").copy()
    _check_dims(system, chi_vec, x)
    bs = _block_system(system)
    return _sweep_in_order(bs, chi_vec, x, omega, range(bs.partition.n_blocks))


def rssor_sweep(system, chi_vec, x, omega, rng):
    """One block SOR sweep in a freshly drawn uniform block order.

    The ordering is drawn from `rng` only (independent of the iterate);
    returns the updated vector and the drawn block permutation.
    """
    if not 0.0 < omega < 2.0:
        raise ValueError(f"omega must lie in (0, 2), got {omega}")
    chi_vec = linalg.as_vector(chi_vec, "chi")
    x = linalg.as_vector(x, "x").copy()
    _check_dims(system, chi_vec, x)
    bs = _block_system(system)
    perm = Permutation.random(bs.partition.n_blocks, rng)
    x = _sweep_in_order(bs, chi_vec, x, omega, perm.image)
    return x, perm


def _sweep_loop(system, chi_vec, x0, spec, target, rng):
    x = linalg.as_vector(x0, "x0").copy()
    perms = [] if spec.method == "rssor" else None

    def one_sweep(x):
        if spec.method == "rssor":
            x, perm = rssor_sweep(system, chi_vec, x, spec.omega, rng)
            perms.append(perm)
            return x
        return sor_sweep(system, chi_vec, x, spec.omega)

    if spec.stop == "fixed_sweeps":
        for _ in range(spec.sweeps):
            x = one_sweep(x)
        return InnerReport(
            x,
            spec.sweeps,
            _residual_norm(system, chi_vec, x),
            permutation_log=tuple(perms) if perms is not None else None,
        )

    res = _residual_norm(system, chi_vec, x)
    sweeps = 0
    while res > target:
        if sweeps >= spec.max_iters:
            return InnerReport(
                x, sweeps, res, hit_cap=True,
                permutation_log=tuple(perms) if perms is not None else None,
            )
        x = one_sweep(x)
        sweeps += 1
        res = _residual_norm(system, chi_vec, x)
    return InnerReport(
        x, sweeps, res,
        permutation_log=tuple(perms) if perms is not None else None,
    )


def iterative_solve(sys, chi_vec, x0, spec, target=0.0, rng=None):
    # `sys` must be an AugmentedSystem (the direct path needs its full factor)
    """Solve the inner system according to `spec`.

    residual_target mode iterates until ||hessian x - chi|| <= target or the
    safety cap; fixed_sweeps mode performs exactly spec.sweeps sweeps (or CG
    steps) with no residual test.  The direct method ignores both and counts
    as zero iterations.
    """
    chi_vec = linalg.as_vector(chi_vec, "chi")
    if spec.method == "rssor" and rng is None:
        raise ValueError("rssor needs a random stream")

    if spec.method == "direct":
        y = sys.solve_hessian(chi_vec)
        return InnerReport(y, 0, _residual_norm(sys, chi_vec, y))

    if spec.method == "cg":
        if spec.stop == "fixed_sweeps":
            # negative target is unreachable, so exactly `sweeps` steps run
            rep = cg_solve(sys, chi_vec, x0, -1.0, spec.sweeps)
            return InnerReport(rep.solution, rep.iterations, rep.final_residual)
        return cg_solve(sys, chi_vec, x0, target, spec.max_iters)

    return _sweep_loop(sys, chi_vec, x0, spec, target, rng)
