"""Experiment drivers for the synthetic recovery studies.

Every driver is a deterministic function of its arguments and master seed:
trial ``t`` draws its data from ``PrngStream(master_seed, t)``, and trials
run through an order-preserving map, so serial and threaded runs agree.
Results expose ``rows()``/``header`` pairs that :func:`write_csv` turns into
CSV files.
"""

import csv
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .matcore import pssv_norm
from .metrics import DEFICIENCY_THRESHOLD, SUCCESS_THRESHOLD, TrialOutcome, nrmse
from .solvers import RpcaConfig, default_lambda, solve_rpca
from .synth import PrngStream, make_instance

__all__ = [
    "METHODS",
    "PhaseDiagramSpec",
    "ExperimentCell",
    "ExperimentResult",
    "run_phase_diagram",
    "run_rank_deficiency_map",
    "run_toy_fig2",
    "run_init_sensitivity",
    "run_lambda_sweep",
    "run_convergence_trace",
    "write_csv",
    "format_value",
]

METHODS = ("pssv", "nuclear")


def _method_rank(method, target_rank):
    if method == "pssv":
        return target_rank
    if method == "nuclear":
        return 0
    raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")


def _pmap(fn, items, threads):
    if threads is None or threads <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def format_value(v):
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".12g")
    return str(v)


def write_csv(path, header, rows):
    """Write `rows` under `header` with fixed float formatting."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_value(v) for v in row])


@dataclass(frozen=True)
class PhaseDiagramSpec:
    """Grid of (swept size, corruption ratio) cells.

    ``swept_axis="columns"`` varies n with ``m = fixed_dim``; ``"rows"``
    varies m with ``n = fixed_dim``. `target_rank` defaults to `true_rank`
    and may be set differently to study a misspecified rank.
    """

    swept_axis: str = "columns"
    fixed_dim: int = 1000
    sweep_values: tuple = (6, 10, 16, 25, 40)
    corruption_grid: tuple = (0.0, 0.05, 0.1, 0.15, 0.2)
    true_rank: int = 3
    methods: tuple = METHODS
    trials: int = 20
    master_seed: int = 0
    target_rank: Optional[int] = None
    max_iter: int = 1000
    tol: float = 1e-7

    def __post_init__(self):
        if self.swept_axis not in ("columns", "rows"):
            raise ValueError(f"swept_axis must be 'columns' or 'rows', got {self.swept_axis!r}")
        values = list(self.sweep_values)
        if not values or any(b <= a for a, b in zip(values, values[1:])):
            raise ValueError("sweep_values must be non-empty and strictly increasing")
        if any(int(v) != v or v < 1 for v in values) or self.fixed_dim < 1:
            raise ValueError("matrix dimensions must be positive integers")
        grid = list(self.corruption_grid)
        if not grid or any(not 0 <= r <= 0.4 for r in grid):
            raise ValueError("corruption_grid must be non-empty with values in [0, 0.4]")
        if not self.methods or any(m not in METHODS for m in self.methods):
            raise ValueError(f"methods must be a non-empty subset of {METHODS}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        rank = self.rank
        if self.true_rank < 1 or rank < 0:
            raise ValueError("ranks must be positive")
        if max(self.true_rank, rank) > min(self.fixed_dim, values[0]):
            raise ValueError("rank exceeds the smallest matrix dimension in the sweep")

    @property
    def rank(self):
        return self.true_rank if self.target_rank is None else self.target_rank

    def shape(self, param):
        if self.swept_axis == "columns":
            return self.fixed_dim, int(param)
        return int(param), self.fixed_dim


@dataclass
class ExperimentCell:
    param: int
    r: float
    method: str
    trials: int
    successes: int
    mean_nrmse: float
    mean_deficiency_ratio: float
    deficient: int
    mean_iterations: float
    converged: int

    @property
    def success_ratio(self):
        return self.successes / self.trials

    @property
    def deficiency_fraction(self):
        return self.deficient / self.trials


@dataclass
class ExperimentResult:
    spec: PhaseDiagramSpec
    cells: list = field(default_factory=list)

    header = ("param", "r", "method", "trials", "success_ratio", "mean_nrmse",
              "mean_deficiency_ratio", "deficiency_fraction", "mean_iterations",
              "converged_fraction")

    def cell(self, param, r, method):
        for c in self.cells:
            if c.param == param and np.isclose(c.r, r) and c.method == method:
                return c
        raise KeyError((param, r, method))

    def rows(self):
        for c in self.cells:
            yield (c.param, c.r, c.method, c.trials, c.success_ratio, c.mean_nrmse,
                   c.mean_deficiency_ratio, c.deficiency_fraction, c.mean_iterations,
                   c.converged / c.trials)


def _run_trial(spec, param, r, trial):
    m, n = spec.shape(param)
    inst = make_instance(m, n, spec.true_rank, r, PrngStream(spec.master_seed, trial))
    outcomes = {}
    for method in spec.methods:
        cfg = RpcaConfig(target_rank=_method_rank(method, spec.rank), max_iter=spec.max_iter,
                         tol=spec.tol)
        t0 = time.perf_counter()
        sol = solve_rpca(inst.O, cfg)
        elapsed = time.perf_counter() - t0
        outcomes[method] = TrialOutcome.evaluate(inst.A_gt, sol.A, max(spec.true_rank, 1),
                                                 sol.iterations, sol.converged, elapsed)
    return outcomes


def run_phase_diagram(spec, threads=1):
    """Success ratio of each method over the (size, corruption) grid."""
    tasks = [(p, r, t) for p in spec.sweep_values for r in spec.corruption_grid
             for t in range(spec.trials)]
    results = _pmap(lambda task: _run_trial(spec, *task), tasks, threads)
    by_cell = {}
    for (p, r, _), outcome in zip(tasks, results):
        by_cell.setdefault((p, r), []).append(outcome)

    out = ExperimentResult(spec)
    for (p, r), trials in by_cell.items():
        for method in spec.methods:
            oc = [t[method] for t in trials]
            out.cells.append(ExperimentCell(
                param=int(p), r=float(r), method=method, trials=len(oc),
                successes=sum(o.success for o in oc),
                mean_nrmse=float(np.mean([o.nrmse for o in oc])),
                mean_deficiency_ratio=float(np.mean([o.deficiency_ratio for o in oc])),
                deficient=sum(o.deficiency_ratio < DEFICIENCY_THRESHOLD for o in oc),
                mean_iterations=float(np.mean([o.iterations for o in oc])),
                converged=sum(o.converged for o in oc),
            ))
    return out


def run_rank_deficiency_map(spec, threads=1):
    """Same sweep as :func:`run_phase_diagram`; read ``deficiency_fraction`` per cell.

    A trial counts as rank deficient when ``sigma_N / sigma_1 < 0.01`` for
    the recovered low-rank matrix, N being the true rank.
    """
    return run_phase_diagram(spec, threads=threads)


@dataclass
class ToyResult:
    x: np.ndarray
    curves: dict
    argmins: list

    header = ("x", "nuclear_a", "pssv_a", "nuclear_b", "pssv_b")
    argmin_header = ("matrix", "measure", "argmin_x", "value", "sigma1", "sigma2")

    def rows(self):
        cols = [self.curves[k] for k in self.header[1:]]
        for i, x in enumerate(self.x):
            yield (x, *(c[i] for c in cols))


def run_toy_fig2():
    """Nuclear norm and partial sum (p=1) of ``[1 1; 3 x]`` and ``[1 1; 1 x]``.

    `x` runs over 0, 0.01, ..., 4. Matrix "a" is ``[1 1; 3 x]`` and "b" is
    ``[1 1; 1 x]``; `argmins` reports where each curve bottoms out and the
    singular values there.
    """
    xs = np.round(np.arange(401) * 0.01, 2)
    makers = {"a": lambda x: np.array([[1.0, 1.0], [3.0, x]]),
              "b": lambda x: np.array([[1.0, 1.0], [1.0, x]])}
    curves, argmins = {}, []
    for label, make in makers.items():
        for measure, p in (("nuclear", 0), ("pssv", 1)):
            vals = np.array([pssv_norm(make(x), p) for x in xs])
            curves[f"{measure}_{label}"] = vals
            i = int(np.argmin(vals))
            s = np.linalg.svd(make(xs[i]), compute_uv=False)
            argmins.append((label, measure, float(xs[i]), float(vals[i]), float(s[0]),
                            float(s[1])))
    return ToyResult(xs, curves, argmins)


@dataclass
class InitSensitivityResult:
    nrmse: np.ndarray
    iterations: np.ndarray
    converged: np.ndarray

    header = ("init", "nrmse", "iterations", "converged", "success")

    @property
    def success_fraction(self):
        return float(np.mean(self.nrmse < SUCCESS_THRESHOLD))

    def histogram(self, bins=20):
        """Histogram of log10 NRMSE as ``(counts, edges)``."""
        return np.histogram(np.log10(np.maximum(self.nrmse, 1e-16)), bins=bins)

    def rows(self):
        for i, (e, it, c) in enumerate(zip(self.nrmse, self.iterations, self.converged)):
            yield (i, e, it, c, e < SUCCESS_THRESHOLD)


def random_init(O, stream):
    """``(A0, E0, Z0)`` with entries from U[-1, 1] scaled by ``max|O|``."""
    rng = stream.generator(4)
    scale = float(np.abs(O).max())
    return tuple(rng.uniform(-1.0, 1.0, size=O.shape) * scale for _ in range(3))


def run_init_sensitivity(m=1000, n=50, rank=3, r=0.05, n_inits=100, master_seed=0,
                         target_rank=None, threads=1):
    """Solve one planted instance from `n_inits` starting points.

    Start 0 is the default (zero primal, standard multiplier); start ``i >= 1``
    is :func:`random_init` on stream ``(master_seed, i)``.
    """
    if n_inits < 1:
        raise ValueError("n_inits must be >= 1")
    inst = make_instance(m, n, rank, r, PrngStream(master_seed, 0))
    cfg = RpcaConfig(target_rank=rank if target_rank is None else target_rank)

    def one(i):
        init = None if i == 0 else random_init(inst.O, PrngStream(master_seed, i))
        sol = solve_rpca(inst.O, cfg, init=init)
        return nrmse(inst.A_gt, sol.A), sol.iterations, sol.converged

    res = _pmap(one, range(n_inits), threads)
    return InitSensitivityResult(np.array([x[0] for x in res]),
                                 np.array([x[1] for x in res]),
                                 np.array([x[2] for x in res]))


@dataclass
class LambdaSweepResult:
    table: list

    header = ("L", "lambda", "method", "trials", "mean_nrmse", "success_ratio")

    def rows(self):
        return iter(self.table)

    def mean_nrmse(self, L, method):
        for row in self.table:
            if np.isclose(row[0], L) and row[2] == method:
                return row[4]
        raise KeyError((L, method))


def run_lambda_sweep(L_values=(0.25, 0.5, 1.0, 2.0, 4.0), m=1000, n=40, rank=3, r=0.05,
                     trials=5, methods=METHODS, master_seed=0, threads=1):
    """Mean NRMSE per method with ``lam = L / sqrt(max(m, n))``."""
    if not L_values or any(L <= 0 for L in L_values):
        raise ValueError("L values must be non-empty and positive")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    base = default_lambda((m, n))
    tasks = [(L, t) for L in L_values for t in range(trials)]

    def one(task):
        L, t = task
        inst = make_instance(m, n, rank, r, PrngStream(master_seed, t))
        return {meth: nrmse(inst.A_gt, solve_rpca(
            inst.O, RpcaConfig(target_rank=_method_rank(meth, rank), lam=L * base)).A)
            for meth in methods}

    res = _pmap(one, tasks, threads)
    table = []
    for L in L_values:
        errs = [x for (LL, _), x in zip(tasks, res) if LL == L]
        for meth in methods:
            e = np.array([x[meth] for x in errs])
            table.append((float(L), L * base, meth, trials, float(e.mean()),
                          float(np.mean(e < SUCCESS_THRESHOLD))))
    return LambdaSweepResult(table)


@dataclass
class ConvergenceTraceResult:
    table: list
    summary: list

    header = ("rank", "method", "iteration", "mean_combined_error", "mean_feasibility",
              "active_trials")
    summary_header = ("rank", "method", "trials", "mean_iterations", "final_combined_error",
                      "final_feasibility", "converged_fraction")

    def rows(self):
        return iter(self.table)

    def summary_rows(self):
        return iter(self.summary)

    def final(self, rank, method):
        for row in self.summary:
            if row[0] == rank and row[1] == method:
                return dict(zip(self.summary_header, row))
        raise KeyError((rank, method))


def _traced_solve(inst, N):
    combined = []
    norm_A, norm_E = np.linalg.norm(inst.A_gt), np.linalg.norm(inst.E_gt)

    def cb(k, st):
        combined.append(np.linalg.norm(inst.A_gt - st["A"]) / norm_A
                        + np.linalg.norm(inst.E_gt - st["E"]) / norm_E)

    sol = solve_rpca(inst.O, RpcaConfig(target_rank=N), callback=cb)
    return np.array(combined), np.array(sol.trace.feasibility), sol.converged


def run_convergence_trace(m=1000, n=40, ranks=(2, 3, 4), r=0.05, trials=5, methods=METHODS,
                          master_seed=0, threads=1):
    """Per-iteration combined error and feasibility residual, averaged over trials.

    The combined error is ``nrmse(A) + nrmse(E)`` against the ground truth.
    Trials that stop early hold their final values in later iterations;
    ``active_trials`` counts the trials still iterating.
    """
    if r <= 0:
        raise ValueError("r must be positive so that E_gt is non-zero")
    if trials < 1 or not ranks:
        raise ValueError("need trials >= 1 and at least one rank")
    tasks = [(k, t) for k in ranks for t in range(trials)]

    def one(task):
        k, t = task
        inst = make_instance(m, n, k, r, PrngStream(master_seed, t))
        return {meth: _traced_solve(inst, _method_rank(meth, k)) for meth in methods}

    res = _pmap(one, tasks, threads)
    table, summary = [], []
    for k in ranks:
        runs = [x for (kk, _), x in zip(tasks, res) if kk == k]
        for meth in methods:
            traces = [x[meth] for x in runs]
            length = max(len(c) for c, _, _ in traces)
            for it in range(length):
                ce = [c[min(it, len(c) - 1)] for c, _, _ in traces]
                fe = [f[min(it, len(f) - 1)] for _, f, _ in traces]
                active = sum(len(c) > it for c, _, _ in traces)
                table.append((k, meth, it + 1, float(np.mean(ce)), float(np.mean(fe)), active))
            summary.append((k, meth, trials, float(np.mean([len(c) for c, _, _ in traces])),
                            float(np.mean([c[-1] for c, _, _ in traces])),
                            float(np.mean([f[-1] for _, f, _ in traces])),
                            float(np.mean([cv for _, _, cv in traces]))))
    return ConvergenceTraceResult(table, summary)
