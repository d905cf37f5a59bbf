"""CSV emission and figure rendering for the experiment paths.

CSV files are RFC-4180-style: comma separator, '\n' line endings, mandatory
header row, floats serialized with 17 significant digits so values
round-trip exactly.  Figures are optional companions rendered next to the
CSVs; matplotlib is imported lazily so data-only paths never load it.
"""

import os

import numpy as np

TRACE_HEADER = (
    "run_id", "outer_iter", "primal_res", "dual_res", "combined_res", "eta_k", "inner_iters",
)
SPECTRA_HEADER = ("beta", "rho_G", "rho_G_admm", "cond_saddle", "cond_Hbeta")
PERMSCAN_HEADER = ("matrix_id", "perm_index", "spectral_radius")
BOUNDS_HEADER = (
    "rho_beta", "norm_A", "norm_Ainv", "norm_F", "C1", "C2", "C_bar", "L_cor",
    "cg_rate", "sor_rate", "rssor_rate", "j_bar_estimate",
)


def fmt(value):
    if value is None:
        return ""
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{float(value):.17g}"


def write_csv(path, header, rows):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(fmt(v) for v in row) + "\n")
    return path


def trace_rows(trace, run_id=0):
    for rec in trace.records:
        yield (
            run_id,
            rec.k,
            rec.residuals.primal,
            rec.residuals.dual,
            rec.residuals.combined,
            rec.eta,
            rec.inner_iterations,
        )


def write_trace_csv(path, traces):
    """One trace file for one or many runs; run_id numbers the trajectories."""
    def rows():
        for run_id, trace in enumerate(traces):
            yield from trace_rows(trace, run_id)
    return write_csv(path, TRACE_HEADER, rows())


def write_spectra_csv(path, rows):
    return write_csv(path, SPECTRA_HEADER, rows)


def write_permscan_csv(path, rows):
    return write_csv(path, PERMSCAN_HEADER, rows)


def write_bounds_csv(path, bounds):
    row = tuple(getattr(bounds, name) for name in BOUNDS_HEADER)
    return write_csv(path, BOUNDS_HEADER, [row])


# ---------------------------------------------------------------------------
# figure rendering


def _pyplot():
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    return plt


def _residual_panel(ax, trace, title):
    ks = np.arange(len(trace.records))
    ax.semilogy(ks, np.maximum(trace.series("primal"), 1e-300), label="primal")
    ax.semilogy(ks, np.maximum(trace.series("dual"), 1e-300), label="dual")
    ax.semilogy(ks, np.maximum(trace.series("combined"), 1e-300), label="combined")
    ax.set_title(title)
    ax.set_xlabel("outer iteration")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=8)


def render_spectra_figure(path, rows):
    plt = _pyplot()
    data = np.array(rows, dtype=float)
    fig, ax = plt.subplots(figsize=(7, 5))
    ax.loglog(data[:, 0], data[:, 3], "o-", label="cond(saddle)")
    ax.loglog(data[:, 0], data[:, 4], "s-", label="cond(penalized Hessian)")
    ax.loglog(data[:, 0], data[:, 1], "^-", label="outer spectral radius")
    ax.set_xlabel("beta")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def render_envelope_figure(path, exact_trace, exact_env, inexact_trace, inexact_env):
    """Exact run and forcing-driven run side by side, each with its bound curve,
    plus the per-iteration inner work of the forcing-driven run."""
    plt = _pyplot()
    fig, axes = plt.subplots(1, 3, figsize=(13, 4))
    _residual_panel(axes[0], exact_trace, "exact outer method")
    ks = np.arange(len(exact_trace.records))
    axes[0].semilogy(ks, np.maximum(exact_env[: len(ks)], 1e-300), "k--", label="envelope")
    axes[0].legend(fontsize=8)
    _residual_panel(axes[1], inexact_trace, "inexact outer method (CG inner)")
    ks = np.arange(len(inexact_trace.records))
    axes[1].semilogy(ks, np.maximum(inexact_env[: len(ks)], 1e-300), "k--", label="envelope")
    axes[1].legend(fontsize=8)
    axes[2].bar(ks, inexact_trace.series("inner_iterations"))
    axes[2].set_title("inner iterations per outer step")
    axes[2].set_xlabel("outer iteration")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def render_permscan_figure(path, rows):
    plt = _pyplot()
    data = np.array(rows, dtype=float)
    fig, ax = plt.subplots(figsize=(8, 5))
    ax.plot(data[:, 0] + data[:, 1] / (data[:, 1].max() + 1.0), data[:, 2],
            ".", markersize=1, alpha=0.4)
    ax.set_xlabel("matrix id (orderings spread within each unit)")
    ax.set_ylabel("sweep spectral radius")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def render_comparison_figure(path, top_traces, top_title, bottom_traces, bottom_title):
    """Residual decay of two run families (each possibly several trials)."""
    plt = _pyplot()
    fig, axes = plt.subplots(2, 1, figsize=(7, 8))
    for ax, traces, title in (
        (axes[0], top_traces, top_title),
        (axes[1], bottom_traces, bottom_title),
    ):
        for name, style in (("primal", "-"), ("dual", "--"), ("combined", ":")):
            series = [t.series(name) for t in traces]
            kmax = max(len(s) for s in series)
            mean = np.full(kmax, np.nan)
            for k in range(kmax):
                vals = [s[k] for s in series if len(s) > k]
                mean[k] = np.mean(vals)
            ax.semilogy(np.arange(kmax), np.maximum(mean, 1e-300), style, label=name)
        ax.set_title(title)
        ax.set_xlabel("outer iteration")
        ax.grid(True, which="both", alpha=0.3)
        ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
