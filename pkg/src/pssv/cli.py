"""Command-line front end: ``pssv solve``, ``pssv complete``, ``pssv experiment``.

Exit status is 0 when the solver converged, 2 when it stopped at the
iteration cap and 1 on usage or I/O errors.
"""

import argparse
import os
import sys

import numpy as np

from . import harness
from .io import MatrixFileError, matrix_format, read_matrix, write_matrix
from .metrics import nrmse, psnr
from .solvers import (
    CompletionConfig,
    ObservationMask,
    RpcaConfig,
    kkt_residuals,
    solve_completion,
    solve_rpca,
)
from .synth import PrngStream, gen_mask

EXIT_OK, EXIT_ERROR, EXIT_NOT_CONVERGED = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _floats(text):
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _ints(text):
    try:
        return tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _names(text):
    return tuple(v.strip() for v in text.split(",") if v.strip())


def _or(value, default):
    return default if value is None else value


def _cmd_solve(args):
    if args.method == "pssv":
        if args.rank is None:
            raise UsageError("--rank is required with --method pssv")
        rank = args.rank
    else:
        if args.rank not in (None, 0):
            raise UsageError("--method nuclear implies --rank 0")
        rank = 0
    O = read_matrix(args.input)
    cfg = RpcaConfig(target_rank=rank, lam=args.lam, rho=args.rho,
                     mu0="auto" if args.mu0 is None else args.mu0, tol=args.tol,
                     max_iter=args.max_iter, inner_iters=args.inner_iters)
    sol = solve_rpca(O, cfg)
    if args.out_A:
        write_matrix(args.out_A, sol.A)
    if args.out_E:
        write_matrix(args.out_E, sol.E)
    if args.trace:
        harness.write_csv(args.trace, ("iteration", "feasibility", "objective", "lagrangian", "mu"),
                          sol.trace.rows())
    kkt = kkt_residuals(O, sol.A, sol.E, sol.Z, sol.lam)
    print(f"shape: {O.shape[0]}x{O.shape[1]}")
    print(f"target_rank: {rank}")
    print(f"lambda: {sol.lam:.12g}")
    print(f"iterations: {sol.iterations}")
    print(f"converged: {str(sol.converged).lower()}")
    print(f"residual: {sol.residual:.6e}")
    print(f"objective: {sol.trace.objective[-1]:.12g}")
    print(f"e_stationarity: {kkt['e_stationarity']:.6e}")
    return EXIT_OK if sol.converged else EXIT_NOT_CONVERGED


def _cmd_complete(args):
    is_pgm = matrix_format(args.input) == "pgm"
    O = read_matrix(args.input)
    if args.mask:
        mask_arr = read_matrix(args.mask)
        if mask_arr.shape != O.shape:
            raise UsageError(f"mask shape {mask_arr.shape} does not match input shape {O.shape}")
        mask = ObservationMask.from_array(mask_arr)
    elif args.observe_fraction is not None:
        mask = gen_mask(*O.shape, args.observe_fraction, PrngStream(args.seed))
    else:
        mask = ObservationMask(~np.isnan(O))
    cfg = CompletionConfig(target_rank=args.rank, rho=args.rho, mu0=args.mu0, tol=args.tol,
                           max_iter=args.max_iter)
    sol = solve_completion(O, mask, cfg)
    write_matrix(args.out, sol.A)
    print(f"shape: {O.shape[0]}x{O.shape[1]}")
    print(f"observed: {mask.count}")
    print(f"iterations: {sol.iterations}")
    print(f"converged: {str(sol.converged).lower()}")
    print(f"residual: {sol.residual:.6e}")
    if args.ref:
        ref = read_matrix(args.ref)
        if ref.shape != O.shape:
            raise UsageError(f"reference shape {ref.shape} does not match input shape {O.shape}")
        out = sol.A
        if is_pgm:
            out = np.clip(np.rint(out), 0, 255)
        peak = 255.0 if is_pgm or matrix_format(args.ref) == "pgm" else None
        print(f"psnr: {psnr(ref, out, peak):.6f}")
        print(f"nrmse: {nrmse(ref, out):.6e}")
    return EXIT_OK if sol.converged else EXIT_NOT_CONVERGED


def _cmd_experiment(args):
    os.makedirs(args.out, exist_ok=True)
    path = lambda name: os.path.join(args.out, name)  # noqa: E731
    kind = args.experiment
    threads = args.threads
    if kind in ("phase-diagram", "deficiency-map"):
        spec = harness.PhaseDiagramSpec(
            swept_axis=args.axis, fixed_dim=args.fixed_dim, sweep_values=args.sweep,
            corruption_grid=args.corruption, true_rank=args.rank,
            target_rank=args.target_rank, methods=args.methods, trials=_or(args.trials, 20),
            master_seed=args.seed, max_iter=args.max_iter)
        if kind == "phase-diagram":
            res = harness.run_phase_diagram(spec, threads=threads)
            harness.write_csv(path("phase_diagram.csv"), res.header, res.rows())
        else:
            res = harness.run_rank_deficiency_map(spec, threads=threads)
            harness.write_csv(path("deficiency_map.csv"), res.header, res.rows())
    elif kind == "toy-fig2":
        res = harness.run_toy_fig2()
        harness.write_csv(path("toy_fig2.csv"), res.header, res.rows())
        harness.write_csv(path("toy_fig2_argmin.csv"), res.argmin_header, res.argmins)
    elif kind == "init-sensitivity":
        res = harness.run_init_sensitivity(
            m=args.rows, n=args.cols, rank=args.rank, r=args.corruption[0],
            n_inits=_or(args.trials, 100), master_seed=args.seed, threads=threads)
        harness.write_csv(path("init_sensitivity.csv"), res.header, res.rows())
        counts, edges = res.histogram()
        harness.write_csv(path("init_sensitivity_hist.csv"),
                          ("log10_nrmse_low", "log10_nrmse_high", "count"),
                          zip(edges[:-1], edges[1:], counts))
        print(f"success_fraction: {res.success_fraction:.6f}")
    elif kind == "lambda-sweep":
        res = harness.run_lambda_sweep(
            L_values=args.L, m=args.rows, n=args.cols, rank=args.rank, r=args.corruption[0],
            trials=_or(args.trials, 5), methods=args.methods, master_seed=args.seed,
            threads=threads)
        harness.write_csv(path("lambda_sweep.csv"), res.header, res.rows())
    elif kind == "convergence-trace":
        res = harness.run_convergence_trace(
            m=args.rows, n=args.cols, ranks=args.ranks, r=args.corruption[0],
            trials=_or(args.trials, 5), methods=args.methods, master_seed=args.seed,
            threads=threads)
        harness.write_csv(path("convergence_trace.csv"), res.header, res.rows())
        harness.write_csv(path("convergence_summary.csv"), res.summary_header,
                          res.summary_rows())
    return EXIT_OK


EXPERIMENTS = ("phase-diagram", "deficiency-map", "toy-fig2", "init-sensitivity",
               "lambda-sweep", "convergence-trace")


def build_parser():
    parser = _Parser(prog="pssv", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solve", help="split a matrix into low-rank and sparse parts")
    p.add_argument("input", help="CSV or PGM matrix")
    p.add_argument("--method", choices=("pssv", "nuclear"), default="pssv")
    p.add_argument("--rank", type=int, help="target rank N (required for pssv)")
    p.add_argument("--lambda", dest="lam", type=float, help="default 1/sqrt(max(m,n))")
    p.add_argument("--rho", type=float, default=1.5)
    p.add_argument("--mu0", type=float, help="default 1.25/sigma_1(O)")
    p.add_argument("--tol", type=float, default=1e-7)
    p.add_argument("--max-iter", type=int, default=1000)
    p.add_argument("--inner-iters", type=int, default=1)
    p.add_argument("--out-A", dest="out_A")
    p.add_argument("--out-E", dest="out_E")
    p.add_argument("--trace", help="per-iteration CSV")
    p.add_argument("--seed", type=int, default=0, help="unused; the solve is deterministic")
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("complete", help="fill in missing entries of a matrix or image")
    p.add_argument("input", help="CSV (NaN marks missing) or PGM")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--mask", help="CSV of 0/1 with the input's shape")
    g.add_argument("--observe-fraction", type=float, help="sample a uniform random mask")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--rank", type=int, required=True)
    p.add_argument("--rho", type=float, default=1.05)
    p.add_argument("--mu0", type=float, default=1e-3)
    p.add_argument("--tol", type=float, default=1e-7)
    p.add_argument("--max-iter", type=int, default=2000)
    p.add_argument("--out", required=True)
    p.add_argument("--ref", help="ground truth for PSNR/NRMSE reporting")
    p.set_defaults(func=_cmd_complete)

    p = sub.add_parser("experiment", help="run a synthetic study and write CSV results")
    p.add_argument("experiment", choices=EXPERIMENTS)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, help="trials per cell (init-sensitivity: starts)")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", default="results")
    p.add_argument("--axis", choices=("columns", "rows"), default="columns")
    p.add_argument("--fixed-dim", type=int, default=1000)
    p.add_argument("--sweep", type=_ints, default=(6, 10, 16, 25, 40))
    p.add_argument("--corruption", type=_floats, default=None,
                   help="comma-separated corruption ratios")
    p.add_argument("--rank", type=int, default=3, help="true rank of the planted matrix")
    p.add_argument("--target-rank", type=int, help="rank given to pssv (default: true rank)")
    p.add_argument("--methods", type=_names, default=harness.METHODS)
    p.add_argument("--max-iter", type=int, default=1000)
    p.add_argument("--rows", type=int, default=1000)
    p.add_argument("--cols", type=int, default=None)
    p.add_argument("--ranks", type=_ints, default=(2, 3, 4))
    p.add_argument("--L", type=_floats, default=(0.25, 0.5, 1.0, 2.0, 4.0))
    p.set_defaults(func=_cmd_experiment)
    return parser


_EXPERIMENT_DEFAULTS = {
    "phase-diagram": {"corruption": (0.0, 0.05, 0.1, 0.15, 0.2)},
    "deficiency-map": {"corruption": (0.0, 0.05, 0.1, 0.15, 0.2)},
    "init-sensitivity": {"corruption": (0.05,), "cols": 50},
    "lambda-sweep": {"corruption": (0.05,), "cols": 40},
    "convergence-trace": {"corruption": (0.05,), "cols": 40},
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "experiment":
        for key, value in _EXPERIMENT_DEFAULTS.get(args.experiment, {}).items():
            if getattr(args, key) is None:
                setattr(args, key, value)
    try:
        return args.func(args)
    except (UsageError, MatrixFileError, ValueError, OSError) as exc:
        print(f"pssv {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
