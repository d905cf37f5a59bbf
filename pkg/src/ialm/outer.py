"""Outer iterations: exact and inexact augmented Lagrangian runs.

One engine drives everything.  Each outer step solves the penalized-Hessian
system for the current multiplier (exactly, or inexactly under a forcing
sequence or fixed sweep budget) and then takes the dual ascent step
mu <- mu - beta (A x - b).  The n-block cyclic method is the special case of
one Gauss-Seidel sweep per step; its shuffled variant is one randomly
shuffled sweep.  Full residual traces are recorded for every run.
"""

import time
from dataclasses import dataclass, field, replace

import numpy as np

from . import qp
from .inner import InnerSolverSpec, iterative_solve
from .seeding import TRAJECTORY_STREAM, rng_for
from .tolerances import TOL

STATUS_CONVERGED = "converged"
STATUS_MAX_OUTER = "max_outer_reached"
STATUS_DIVERGED = "diverged"


@dataclass(frozen=True)
class ForcingSequence:
    """Geometric inner-solve targets: target(k) = scale * R^(k+1)."""

    R: float
    scale: float = 1.0

    def __post_init__(self):
        if not 0.0 < float(self.R) < 1.0:
            raise ValueError(f"R must lie in (0, 1), got {self.R}")
        if not float(self.scale) > 0.0:
            raise ValueError(f"scale must be positive, got {self.scale}")
        object.__setattr__(self, "R", float(self.R))
        object.__setattr__(self, "scale", float(self.scale))

    def target(self, k):
        return self.scale * self.R ** (k + 1)


@dataclass(frozen=True)
class OuterConfig:
    beta: float
    max_outer: int = 500
    eps: float = 1e-8
    forcing: ForcingSequence = None
    inner: InnerSolverSpec = field(default_factory=InnerSolverSpec)
    seed: int = 42

    def __post_init__(self):
        if not float(self.beta) > 0.0:
            raise ValueError("beta must be positive")
        if not float(self.eps) > 0.0:
            raise ValueError("eps must be positive")
        if int(self.max_outer) < 1:
            raise ValueError("max_outer must be at least 1")
        if self.inner.stop == "residual_target" and self.inner.method != "direct" \
                and self.forcing is None:
            raise ValueError("residual_target stopping needs a forcing sequence")
        object.__setattr__(self, "beta", float(self.beta))
        object.__setattr__(self, "eps", float(self.eps))
        object.__setattr__(self, "max_outer", int(self.max_outer))
        object.__setattr__(self, "seed", int(self.seed))


@dataclass(frozen=True)
class OuterRecord:
    """One outer iterate: its residuals, the forcing target it had to meet,
    and the inner work spent producing it (zero for the starting point)."""

    k: int
    residuals: qp.ResidualReport
    eta: float
    inner_iterations: int
    elapsed: float
    point: qp.PrimalDualPoint = None
    hit_cap: bool = False
    permutations: tuple = None


@dataclass
class SolveTrace:
    records: list
    status: str
    final_point: qp.PrimalDualPoint
    beta: float

    def series(self, name):
        if name in ("primal", "dual", "combined", "inner_residual"):
            return np.array([getattr(r.residuals, name) for r in self.records])
        if name == "eta":
            return np.array(
                [np.nan if r.eta is None else r.eta for r in self.records]
            )
        if name == "inner_iterations":
            return np.array([r.inner_iterations for r in self.records])
        raise KeyError(name)

    def error_series(self, reference):
        """Distance of each recorded iterate from a reference primal-dual point."""
        target = reference.stacked()
        return np.array(
            [np.linalg.norm(r.point.stacked() - target) for r in self.records]
        )

    @property
    def iterations(self):
        return len(self.records) - 1

    def diverged(self):
        return self.status == STATUS_DIVERGED


def _run(problem, cfg, rng, z0):
    sys = qp.build_augmented(problem, cfg.beta)
    z = qp.PrimalDualPoint.zero(problem) if z0 is None else z0
    x, mu = z.x.copy(), z.mu.copy()

    point = qp.PrimalDualPoint(x, mu)
    rep = qp.residuals(problem, sys, point, inner_residual=0.0)
    records = [OuterRecord(0, rep, None, 0, 0.0, point=point)]
    status = _status_of(rep, cfg.eps)

    A, b, beta = problem.A, problem.b, cfg.beta
    for k in range(cfg.max_outer):
        if status is not None:
            break
        tic = time.perf_counter()
        chi_k = qp.chi(sys, mu)
        if cfg.inner.warm_start == "previous_outer_iterate":
            x0 = x
        else:
            x0 = np.zeros_like(x)
        eta = None
        if cfg.inner.stop == "residual_target" and cfg.inner.method != "direct":
            eta = cfg.forcing.target(k)
        inner = iterative_solve(sys, chi_k, x0, cfg.inner, 0.0 if eta is None else eta, rng)
        x = inner.solution
        mu = mu - beta * (A @ x - b)
        point = qp.PrimalDualPoint(x, mu)
        rep = qp.residuals(problem, sys, point, inner_residual=inner.final_residual)
        records.append(
            OuterRecord(
                k + 1, rep, eta, inner.iterations,
                time.perf_counter() - tic,
                point=point,
                hit_cap=inner.hit_cap,
                permutations=inner.permutation_log,
            )
        )
        status = _status_of(rep, cfg.eps)

    return SolveTrace(
        records=records,
        status=status or STATUS_MAX_OUTER,
        final_point=qp.PrimalDualPoint(x, mu),
        beta=beta,
    )


def _status_of(rep, eps):
    if not np.isfinite(rep.combined) or rep.combined > TOL.divergence_threshold:
        return STATUS_DIVERGED
    if qp.is_eps_accurate(rep, eps):
        return STATUS_CONVERGED
    return None


def alm_exact(problem, cfg, z0=None):
    """Exact method: every outer step solves the penalized system directly."""
    if cfg.inner.method != "direct":
        raise ValueError("alm_exact requires the direct inner method")
    return _run(problem, cfg, None, z0)


def ialm_run(problem, cfg, rng=None, z0=None):
    """Inexact run with whichever inner solver cfg selects.

    With a deterministic inner solver `rng` is ignored; with the shuffled
    solver it defaults to the trajectory-0 stream of cfg.seed.
    """
    if rng is None and cfg.inner.is_random:
        rng = rng_for(cfg.seed, TRAJECTORY_STREAM, 0)
    return _run(problem, cfg, rng, z0)


def admm_run(problem, cfg, rng=None, z0=None):
    """n-block cyclic variant: fixed Gauss-Seidel sweeps per outer step.

    Exactly the inexact run with inner = sor, omega = 1, fixed sweep count
    (cfg.inner.sweeps, default 1).  `rng` is accepted for runner
    interchangeability and ignored (the method is deterministic).
    """
    spec = replace(cfg.inner, method="sor", omega=1.0, stop="fixed_sweeps")
    return ialm_run(problem, replace(cfg, inner=spec), z0=z0)


def radmm_run(problem, cfg, rng=None, z0=None):
    """Shuffled n-block variant: fixed randomly shuffled sweeps per step.

    Exactly the inexact run with inner = rssor, omega = 1, fixed sweep count;
    the drawn block permutations are logged on the trace records.
    """
    spec = replace(cfg.inner, method="rssor", omega=1.0, stop="fixed_sweeps")
    return ialm_run(problem, replace(cfg, inner=spec), rng=rng, z0=z0)


@dataclass
class TraceAggregate:
    """Per-iteration statistics over independent seeded trajectories."""

    traces: list

    @property
    def max_len(self):
        return max(len(t.records) for t in self.traces)

    def stats(self, name):
        """mean/min/max/quartiles of a series across trials, per iteration.

        Iterations are aggregated over the trials that reached them; `count`
        records how many did.
        """
        table = {}
        cols = []
        for t in self.traces:
            cols.append(t.series(name))
        kmax = self.max_len
        keys = ("mean", "min", "q1", "median", "q3", "max", "count")
        out = {key: np.full(kmax, np.nan) for key in keys}
        for k in range(kmax):
            vals = np.array([c[k] for c in cols if len(c) > k], dtype=float)
            out["count"][k] = vals.size
            if vals.size:
                out["mean"][k] = vals.mean()
                out["min"][k] = vals.min()
                out["max"][k] = vals.max()
                out["q1"][k], out["median"][k], out["q3"][k] = np.percentile(
                    vals, [25.0, 50.0, 75.0]
                )
        table.update(out)
        return table


def monte_carlo(problem, cfg, trials, z0=None, runner=None):
    """Run `trials` independent trajectories with split random streams.

    Trial i uses the (cfg.seed, trial-i) sub-stream, so results do not depend
    on execution order.  `runner` defaults to the inexact run; pass e.g.
    radmm_run to aggregate that variant instead.
    """
    if int(trials) < 1:
        raise ValueError("trials must be at least 1")
    run = runner or ialm_run
    traces = []
    for i in range(int(trials)):
        rng = rng_for(cfg.seed, TRAJECTORY_STREAM, i)
        traces.append(run(problem, cfg, rng=rng, z0=z0))
    return TraceAggregate(traces=traces)
