"""Experiment orchestration: the five reproduction paths behind `reproduce`.

Each path writes deterministic CSV files (seed-driven) and, unless disabled,
renders a companion PNG next to them.
"""

import os
from dataclasses import dataclass, replace

import numpy as np

from . import linalg, qp, reports, spectral
from .inner import InnerSolverSpec
from .outer import ForcingSequence, OuterConfig, admm_run, alm_exact, ialm_run, monte_carlo, radmm_run
from .problems import ProblemSource
from .seeding import PROBLEM_STREAM, rng_for

FIGURES = ("fig1", "fig2", "fig3", "fig4", "fig5")
DEFAULT_BETA_GRID = tuple(np.logspace(-2.0, 3.0, 13))


@dataclass(frozen=True)
class ExperimentConfig:
    source: ProblemSource
    outer: OuterConfig
    trials: int = 15
    beta_grid: tuple = DEFAULT_BETA_GRID
    output_dir: str = "."
    render: bool = True

    def path(self, name):
        return os.path.join(self.output_dir, name)


def spectra_rows(problem, betas):
    """One (beta, rho_G, rho_G_admm, cond_saddle, cond_Hbeta) row per beta."""
    rows = []
    for beta in betas:
        sys = qp.build_augmented(problem, beta)
        rows.append((
            float(beta),
            spectral.rho_outer(sys),
            spectral.cyclic_matrix(sys).spectral_radius,
            linalg.condition_number_2(sys.kkt),
            linalg.condition_number_2(sys.hessian),
        ))
    return rows


def _fig1(cfg):
    problem = cfg.source.build()
    betas = cfg.beta_grid or DEFAULT_BETA_GRID
    rows = spectra_rows(problem, betas)
    paths = [reports.write_spectra_csv(cfg.path("spectra.csv"), rows)]
    if cfg.render:
        paths.append(reports.render_spectra_figure(cfg.path("fig1.png"), rows))
    return paths


def _fig2(cfg):
    problem = cfg.source.build()
    exact_beta = spectral.beta_for_rho(problem, 0.05)
    exact_cfg = replace(
        cfg.outer, beta=exact_beta, inner=InnerSolverSpec(method="direct"),
        forcing=None, eps=min(cfg.outer.eps, 1e-12), max_outer=60,
    )
    exact_trace = alm_exact(problem, exact_cfg)
    exact_sys = qp.build_augmented(problem, exact_beta)
    rho_e = spectral.rho_outer(exact_sys)
    bounds_e = spectral.compute_bounds(
        problem, exact_sys, ForcingSequence(R=min(rho_e + 1e-2, 0.999)),
        InnerSolverSpec(method="direct"),
    )
    d0 = exact_trace.records[0].residuals.combined
    env_const = spectral.alm_envelope_constant(bounds_e, d0, exact_beta)
    exact_env = env_const * rho_e ** np.arange(len(exact_trace.records))

    cg_beta = spectral.beta_for_rho(problem, 0.65)
    cg_sys = qp.build_augmented(problem, cg_beta)
    rho_c = spectral.rho_outer(cg_sys)
    forcing = ForcingSequence(R=min(rho_c + 1e-2, 0.999))
    cg_spec = InnerSolverSpec(method="cg", stop="residual_target")
    cg_cfg = replace(
        cfg.outer, beta=cg_beta, inner=cg_spec, forcing=forcing,
        eps=min(cfg.outer.eps, 1e-12), max_outer=60,
    )
    cg_trace = ialm_run(problem, cg_cfg)
    bounds_c = spectral.compute_bounds(problem, cg_sys, forcing, cg_spec)
    ks = np.arange(len(cg_trace.records))
    cg_env = bounds_c.C_bar * forcing.R ** ks * np.maximum(ks, 1)

    paths = [
        reports.write_trace_csv(cfg.path("trace_alm.csv"), [exact_trace]),
        reports.write_trace_csv(cfg.path("trace_cg.csv"), [cg_trace]),
        reports.write_bounds_csv(cfg.path("bounds.csv"), bounds_c),
    ]
    if cfg.render:
        paths.append(reports.render_envelope_figure(
            cfg.path("fig2.png"), exact_trace, exact_env, cg_trace, cg_env,
        ))
    return paths


def scan_matrices(count, seed, order=7):
    """Seeded scan inputs B = R^T R + I with R uniform on [0, 1)."""
    out = []
    for i in range(count):
        rng = rng_for(seed, PROBLEM_STREAM, i)
        R = rng.random((order, order))
        out.append(R.T @ R + np.eye(order))
    return out

def _fig3(cfg, order=7):
    rows = []
    for matrix_id, B in enumerate(scan_matrices(cfg.trials, cfg.outer.seed, order)):
        for perm_index, (_, radius) in enumerate(spectral.permutation_scan(B, omega=1.0)):
            rows.append((matrix_id, perm_index, radius))
    paths = [reports.write_permscan_csv(cfg.path("permscan.csv"), rows)]
    if cfg.render:
        paths.append(reports.render_permscan_figure(cfg.path("fig3.png"), rows))
    return paths


def _fig4(cfg):
    problem = cfg.source.build()
    one = replace(cfg.outer, inner=replace(cfg.outer.inner, sweeps=1), max_outer=2000)
    ten = replace(cfg.outer, inner=replace(cfg.outer.inner, sweeps=10), max_outer=500)
    trace_one = admm_run(problem, one)
    trace_ten = admm_run(problem, ten)
    paths = [
        reports.write_trace_csv(cfg.path("trace_admm.csv"), [trace_one]),
        reports.write_trace_csv(cfg.path("trace_ialm_gs10.csv"), [trace_ten]),
    ]
    if cfg.render:
        paths.append(reports.render_comparison_figure(
            cfg.path("fig4.png"),
            [trace_one], "one Gauss-Seidel sweep per outer step",
            [trace_ten], "ten Gauss-Seidel sweeps per outer step",
        ))
    return paths


def _fig5(cfg):
    problem = cfg.source.build()
    one = replace(cfg.outer, inner=replace(cfg.outer.inner, sweeps=1), max_outer=2000)
    ten = replace(cfg.outer, inner=replace(cfg.outer.inner, sweeps=10), max_outer=500)
    agg_one = monte_carlo(problem, one, cfg.trials, runner=radmm_run)
    agg_ten = monte_carlo(problem, ten, cfg.trials, runner=radmm_run)
    paths = [
        reports.write_trace_csv(cfg.path("trace_radmm.csv"), agg_one.traces),
        reports.write_trace_csv(cfg.path("trace_ialm_rsgs10.csv"), agg_ten.traces),
    ]
    if cfg.render:
        paths.append(reports.render_comparison_figure(
            cfg.path("fig5.png"),
            agg_one.traces, "one shuffled sweep per outer step (mean of trials)",
            agg_ten.traces, "ten shuffled sweeps per outer step (mean of trials)",
        ))
    return paths


def reproduce(fig, cfg, order=7):
    """Write the CSVs (and figure) of one reproduction path; returns the paths."""
    if fig not in FIGURES:
        raise ValueError(f"unknown figure {fig!r}; expected one of {FIGURES}")
    os.makedirs(cfg.output_dir, exist_ok=True)
    if fig == "fig1":
        return _fig1(cfg)
    if fig == "fig2":
        return _fig2(cfg)
    if fig == "fig3":
        return _fig3(cfg, order=order)
    if fig == "fig4":
        return _fig4(cfg)
    return _fig5(cfg)
