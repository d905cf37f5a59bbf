"""Command-line front end.

Subcommands: solve, spectra, permscan, reproduce, check-bounds.  Exit codes:
0 success, 1 solver divergence (traces are still written), 2 usage or parse
errors.
"""

import argparse
import os
import sys

import numpy as np

from . import experiments, qp, reports, spectral
from .errors import IalmError
from .inner import InnerSolverSpec
from .outer import STATUS_DIVERGED, ForcingSequence, OuterConfig, monte_carlo
from .problems import HEART_SCALE_URL, ProblemSource

EXIT_OK = 0
EXIT_DIVERGED = 1
EXIT_USAGE = 2

INNER_CHOICES = ("direct", "cg", "gs", "sor", "rsgs", "rssor")


def _problem_source(text, seed, rbf_h, rbf_squared):
    if text == "p2":
        return ProblemSource(kind="problem2", seed=seed)
    if text.startswith("p1:"):
        path = text[3:]
        if not path:
            raise ValueError(
                "p1 needs a LIBSVM file, e.g. --problem p1:heart_scale "
                f"(canonical dataset: {HEART_SCALE_URL})"
            )
        return ProblemSource(
            kind="problem1", path=path, seed=seed, rbf_h=rbf_h, rbf_squared=rbf_squared
        )
    if text.startswith("random:"):
        try:
            d_text, m_text = text[len("random:"):].split(",")
            dims = (int(d_text), int(m_text))
        except ValueError as exc:
            raise ValueError(f"bad random spec {text!r}; expected random:<d>,<m>") from exc
        return ProblemSource(kind="random", dims=dims, seed=seed)
    raise ValueError(f"bad --problem {text!r}; expected p1:<path>, p2 or random:<d>,<m>")


def _inner_spec(args):
    name = args.inner
    omega = args.omega
    if name in ("gs", "rsgs"):
        if omega is not None and omega != 1.0:
            raise ValueError(f"--inner {name} fixes omega = 1; drop --omega or use sor/rssor")
        omega = 1.0
    method = {"gs": "sor", "rsgs": "rssor"}.get(name, name)
    stop = "fixed_sweeps" if args.stop == "fixed" else "residual_target"
    return InnerSolverSpec(
        method=method,
        omega=1.0 if omega is None else omega,
        stop=stop,
        sweeps=args.sweeps,
    )


def _forcing(args, problem):
    if args.stop == "fixed":
        return None
    if args.inner == "direct":
        return None
    R = args.R
    if R is None:
        rho = spectral.rho_outer(qp.build_augmented(problem, args.beta))
        R = min(rho + 1e-2, 0.999)
        print(f"auto forcing rate R = {R:.6g} (outer radius {rho:.6g} + 1e-2)")
    if args.forcing_scale == "auto":
        # match the starting residual scale instead of the literal R^(k+1)
        sys_ = qp.build_augmented(problem, args.beta)
        scale = max(1.0, float(np.linalg.norm(sys_.rhs)))
        print(f"auto forcing scale = {scale:.6g}")
    else:
        scale = float(args.forcing_scale)
    return ForcingSequence(R=R, scale=scale)


def _add_common(parser):
    parser.add_argument(
        "--problem", default="p2",
        help="p1:<libsvm-path>, p2, or random:<d>,<m> (default p2); the "
             f"canonical p1 dataset is not bundled, see {HEART_SCALE_URL}",
    )
    parser.add_argument("--beta", type=float, default=1.0, help="penalty weight (default 1)")
    parser.add_argument("--R", type=float, default=None,
                        help="forcing rate in (0,1); default: outer radius + 1e-2")
    parser.add_argument("--forcing-scale", default="1.0", dest="forcing_scale",
                        help="forcing prefactor: a number, or 'auto' for "
                             "max(1, starting combined residual) (default 1)")
    parser.add_argument("--inner", choices=INNER_CHOICES, default="direct",
                        help="inner solver (gs/rsgs are sor/rssor at omega = 1)")
    parser.add_argument("--omega", type=float, default=None, help="relaxation in (0,2)")
    parser.add_argument("--sweeps", type=int, default=1,
                        help="sweep count for --stop fixed (default 1)")
    parser.add_argument("--stop", choices=("forcing", "fixed"), default="forcing",
                        help="inner stopping rule (default forcing)")
    parser.add_argument("--eps", type=float, default=1e-8,
                        help="target primal/dual accuracy (default 1e-8)")
    parser.add_argument("--max-outer", type=int, default=1000, dest="max_outer")
    parser.add_argument("--trials", type=int, default=1,
                        help="independent seeded trajectories / scan matrices")
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("--out", default=".", help="output directory (default .)")
    parser.add_argument("--rbf-h", type=float, default=0.5, dest="rbf_h",
                        help="kernel width for p1 (default 0.5)")
    parser.add_argument("--rbf-squared", action="store_true", dest="rbf_squared",
                        help="square the kernel distance (standard RBF) for p1")
    parser.add_argument("--no-plot", action="store_true", dest="no_plot",
                        help="skip figure rendering")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="ialm",
        description="Augmented Lagrangian QP solvers with splitting-based inner iterations",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, doc in (
        ("solve", "run one solver configuration and write its trace"),
        ("spectra", "spectral radii and condition numbers at one beta"),
        ("permscan", "sweep-operator spectral radius over all orderings"),
        ("reproduce", "write the CSVs (and figure) of one experiment"),
        ("check-bounds", "evaluate the theoretical bound constants"),
    ):
        p = sub.add_parser(name, help=doc)
        _add_common(p)
        if name == "reproduce":
            p.add_argument("figure", choices=experiments.FIGURES)
    return parser


def _cmd_solve(args):
    source = _problem_source(args.problem, args.seed, args.rbf_h, args.rbf_squared)
    problem = source.build()
    spec = _inner_spec(args)
    forcing = _forcing(args, problem)
    cfg = OuterConfig(
        beta=args.beta, max_outer=args.max_outer, eps=args.eps,
        forcing=forcing, inner=spec, seed=args.seed,
    )
    agg = monte_carlo(problem, cfg, args.trials)
    path = reports.write_trace_csv(os.path.join(args.out, "trace.csv"), agg.traces)
    diverged = False
    for i, trace in enumerate(agg.traces):
        last = trace.records[-1].residuals
        print(
            f"run {i}: status={trace.status} iterations={trace.iterations} "
            f"primal={last.primal:.3e} dual={last.dual:.3e} combined={last.combined:.3e}"
        )
        diverged = diverged or trace.status == STATUS_DIVERGED
    print(f"trace written to {path}")
    return EXIT_DIVERGED if diverged else EXIT_OK


def _cmd_spectra(args):
    source = _problem_source(args.problem, args.seed, args.rbf_h, args.rbf_squared)
    problem = source.build()
    rows = experiments.spectra_rows(problem, [args.beta])
    beta, rho_g, rho_admm, cond_saddle, cond_h = rows[0]
    print(f"beta        = {beta:.17g}")
    print(f"rho_G       = {rho_g:.17g}")
    print(f"rho_G_admm  = {rho_admm:.17g}")
    print(f"cond_saddle = {cond_saddle:.17g}")
    print(f"cond_Hbeta  = {cond_h:.17g}")
    reports.write_spectra_csv(os.path.join(args.out, "spectra.csv"), rows)
    return EXIT_OK


def _cmd_permscan(args):
    count = args.trials if args.trials > 1 else 100
    omega = 1.0 if args.omega is None else args.omega
    rows = []
    spreads = []
    for matrix_id, B in enumerate(experiments.scan_matrices(count, args.seed)):
        radii = [r for _, r in spectral.permutation_scan(B, omega=omega)]
        spreads.append(max(radii) - min(radii))
        rows.extend((matrix_id, i, r) for i, r in enumerate(radii))
    path = reports.write_permscan_csv(os.path.join(args.out, "permscan.csv"), rows)
    print(f"{count} matrices x {len(rows) // max(count, 1)} orderings")
    print(f"spread across orderings: min={min(spreads):.3e} max={max(spreads):.3e}")
    print(f"scan written to {path}")
    return EXIT_OK


def _cmd_check_bounds(args):
    source = _problem_source(args.problem, args.seed, args.rbf_h, args.rbf_squared)
    problem = source.build()
    sys_ = qp.build_augmented(problem, args.beta)
    R = args.R
    if R is None:
        R = min(spectral.rho_outer(sys_) + 1e-2, 0.999)
    spec = _inner_spec(args)
    bounds = spectral.compute_bounds(problem, sys_, ForcingSequence(R=R), spec)
    for name in reports.BOUNDS_HEADER:
        print(f"{name:>14} = {getattr(bounds, name):.17g}")
    reports.write_bounds_csv(os.path.join(args.out, "bounds.csv"), bounds)
    return EXIT_OK


def _cmd_reproduce(args):
    source = _problem_source(args.problem, args.seed, args.rbf_h, args.rbf_squared)
    spec = _inner_spec(args)
    forcing = ForcingSequence(R=args.R) if args.R is not None else None
    cfg = experiments.ExperimentConfig(
        source=source,
        outer=OuterConfig(
            beta=args.beta, max_outer=args.max_outer, eps=args.eps,
            forcing=forcing, inner=spec, seed=args.seed,
        ),
        trials=args.trials if args.trials > 1 else (100 if args.figure == "fig3" else 15),
        output_dir=args.out,
        render=not args.no_plot,
    )
    for path in experiments.reproduce(args.figure, cfg):
        print(f"wrote {path}")
    return EXIT_OK


def run_cli(argv):
    """Parse argv and dispatch; returns the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        if args.command == "solve":
            return _cmd_solve(args)
        if args.command == "spectra":
            return _cmd_spectra(args)
        if args.command == "permscan":
            return _cmd_permscan(args)
        if args.command == "check-bounds":
            return _cmd_check_bounds(args)
        return _cmd_reproduce(args)
    except (IalmError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main():
    sys.exit(run_cli(sys.argv[1:]))


if __name__ == "__main__":
    main()
