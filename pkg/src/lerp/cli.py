"""Experiment harness: single runs, grid search, and report emission.

Subcommands
-----------
``lerp run``
    Evaluate one configuration over several seeded splits.
``lerp grid``
    Validation-accuracy grid search over the hyperparameter space, then
    report test accuracy of the selected point per label rate.
``lerp report``
    Rebuild the human-readable table from a results CSV.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.
Parallel runs are capped by ``--jobs`` and the ``LERP_THREADS``
environment variable; ``--jobs 1`` (the default) is fully serial and
deterministic.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .data import DatasetError, load_dataset, sample_split
from .graph import GraphFormatError
from .solver import SolverConfig, accuracy, run as run_solver, trace_to_csv

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3

DEFAULT_RATES = (1, 2, 4, 8, 16, 20)
TEMPERATURE_GRID = (0.1, 0.5, 1.0, 10.0, 100.0)
ALPHA_GRID = (0.1, 1.0, 10.0, 100.0)
BETA_GRID = (0.1, 0.5, 0.9)
MAX_ITER_GRID = (1, 5, 10)


class UsageError(Exception):
    """Bad command line; mapped to exit code 1."""


@dataclass(frozen=True)
class HyperParams:
    temperature: float
    alpha: float
    beta: float
    max_iter: int


@dataclass
class ExperimentPlan:
    """One harness invocation: where the data is and what to sweep."""

    dataset_dir: str
    rates: tuple[int, ...] = DEFAULT_RATES
    repeats: int = 10
    variant: str = "lerp"
    seed: int = 0
    out_dir: str = "lerp-results"
    grid: tuple[HyperParams, ...] = ()
    jobs: int = 1
    max_round: int = 100
    hops: int = 2
    faithful: bool = False
    clamp_labeled: bool = False
    exact_inner: bool = False
    trace: bool = False
    row_normalize: bool = False

    def __post_init__(self):
        if self.repeats < 1:
            raise UsageError("--repeats must be at least 1")
        if not self.rates:
            raise UsageError("at least one label rate is required")


@dataclass
class RunOutcome:
    """Everything one seeded run produces."""

    rate: int
    seed: int
    params: HyperParams
    val_acc: float
    test_acc: float
    seconds: float
    rounds: int
    trace: list = field(default_factory=list, repr=False)


@dataclass
class ResultCell:
    """Aggregate over repeats for one (dataset, variant, rate)."""

    dataset: str
    variant: str
    labels_per_class: int
    mean_acc: float  # percent
    std_acc: float   # percent, population std over repeats
    params: HyperParams
    repeats: int
    mean_seconds: float


@dataclass
class ResultTable:
    cells: list[ResultCell] = field(default_factory=list)


def default_grid():
    """The full sweep in its canonical order (ties resolve to the
    earliest point)."""
    return tuple(HyperParams(t, a, b, i)
                 for t in TEMPERATURE_GRID
                 for a in ALPHA_GRID
                 for b in BETA_GRID
                 for i in MAX_ITER_GRID)


def _solver_config(plan, params, seed):
    return SolverConfig(
        hops=plan.hops,
        max_round=plan.max_round,
        max_iter=params.max_iter,
        alpha=params.alpha,
        beta=params.beta,
        temperature=params.temperature,
        variant=plan.variant,
        seed=seed,
        early_exit_tol=None if plan.faithful else 1e-6,
        clamp_labeled=plan.clamp_labeled,
        exact_inner=plan.exact_inner,
    )


def run_single(dataset, plan, rate, params, seed):
    """One seeded split and solve; deterministic for a fixed seed."""
    split = sample_split(dataset, rate, seed)
    config = _solver_config(plan, params, seed)
    started = time.perf_counter()
    result = run_solver(config, dataset, split)
    elapsed = time.perf_counter() - started
    return RunOutcome(
        rate=rate,
        seed=seed,
        params=params,
        val_acc=accuracy(result.labels, dataset.labels, split.validation),
        test_acc=accuracy(result.labels, dataset.labels, split.test),
        seconds=elapsed,
        rounds=result.rounds_run,
        trace=result.trace,
    )


_POOL_DATASET = None
_POOL_PLAN = None


def _pool_init(dataset, plan):
    global _POOL_DATASET, _POOL_PLAN
    _POOL_DATASET = dataset
    _POOL_PLAN = plan


def _pool_run(job):
    rate, params, seed = job
    return run_single(_POOL_DATASET, _POOL_PLAN, rate, params, seed)


def _execute(dataset, plan, jobs_list):
    """Run (rate, params, seed) jobs, serially or in a process pool;
    output order always matches the input order."""
    jobs = _effective_jobs(plan.jobs)
    if jobs <= 1 or len(jobs_list) <= 1:
        return [run_single(dataset, plan, *job) for job in jobs_list]
    with ProcessPoolExecutor(max_workers=jobs, initializer=_pool_init,
                             initargs=(dataset, plan)) as pool:
        return list(pool.map(_pool_run, jobs_list))


def _effective_jobs(requested):
    cap = os.environ.get("LERP_THREADS")
    if cap:
        try:
            requested = min(requested, max(1, int(cap)))
        except ValueError:
            raise UsageError(f"LERP_THREADS must be an integer, got {cap!r}")
    return max(1, requested)


def select_best(grid, val_means):
    """Index of the grid point with the highest mean validation
    accuracy; ties keep the earliest point. Test accuracy never enters
    this function."""
    if len(grid) != len(val_means) or not grid:
        raise ValueError("grid and validation means must align and be non-empty")
    return int(np.argmax(val_means))


def grid_search(dataset, plan):
    """Sweep the grid per label rate and keep the validation-best point.

    Returns the result table of the chosen points plus every run for the
    per-run log. The same seeded splits are reused across grid points so
    the comparison is paired.
    """
    grid = plan.grid or default_grid()
    seeds = [plan.seed + i for i in range(plan.repeats)]
    table = ResultTable()
    all_outcomes = []
    for rate in plan.rates:
        jobs = [(rate, params, seed) for params in grid for seed in seeds]
        outcomes = _execute(dataset, plan, jobs)
        all_outcomes.extend(outcomes)
        per_point = [outcomes[i * len(seeds):(i + 1) * len(seeds)]
                     for i in range(len(grid))]
        val_means = [float(np.mean([o.val_acc for o in chunk]))
                     for chunk in per_point]
        best = select_best(grid, val_means)
        table.cells.append(_aggregate(dataset.name, plan.variant, rate,
                                      grid[best], per_point[best]))
    return table, all_outcomes


def _aggregate(name, variant, rate, params, outcomes):
    accs = np.array([o.test_acc for o in outcomes])
    return ResultCell(
        dataset=name,
        variant=variant,
        labels_per_class=rate,
        mean_acc=float(100.0 * accs.mean()),
        std_acc=float(100.0 * accs.std()),
        params=params,
        repeats=len(outcomes),
        mean_seconds=float(np.mean([o.seconds for o in outcomes])),
    )


RESULT_FIELDS = ("dataset", "variant", "labels_per_class", "mean_acc",
                 "std_acc", "temperature", "alpha", "beta", "max_iter",
                 "repeats", "mean_seconds")


def write_results_csv(table, path):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(RESULT_FIELDS)
        for c in table.cells:
            writer.writerow([c.dataset, c.variant, c.labels_per_class,
                             repr(c.mean_acc), repr(c.std_acc),
                             repr(c.params.temperature), repr(c.params.alpha),
                             repr(c.params.beta), c.params.max_iter,
                             c.repeats, repr(c.mean_seconds)])


def read_results_csv(path):
    table = ResultTable()
    with open(path, encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            table.cells.append(ResultCell(
                dataset=row["dataset"],
                variant=row["variant"],
                labels_per_class=int(row["labels_per_class"]),
                mean_acc=float(row["mean_acc"]),
                std_acc=float(row["std_acc"]),
                params=HyperParams(float(row["temperature"]),
                                   float(row["alpha"]), float(row["beta"]),
                                   int(row["max_iter"])),
                repeats=int(row["repeats"]),
                mean_seconds=float(row["mean_seconds"]),
            ))
    return table


def write_results_md(table, path):
    """Markdown table per dataset: one row per variant, one column per
    label rate, best mean per column in bold."""
    lines = []
    datasets = sorted({c.dataset for c in table.cells})
    for ds in datasets:
        cells = [c for c in table.cells if c.dataset == ds]
        rates = sorted({c.labels_per_class for c in cells})
        variants = sorted({c.variant for c in cells})
        best = {r: max(c.mean_acc for c in cells if c.labels_per_class == r)
                for r in rates}
        lines.append(f"## {ds}")
        lines.append("")
        lines.append("| method | " + " | ".join(str(r) for r in rates) + " |")
        lines.append("|---" * (len(rates) + 1) + "|")
        for variant in variants:
            row = [variant]
            for r in rates:
                match = [c for c in cells
                         if c.variant == variant and c.labels_per_class == r]
                if not match:
                    row.append("-")
                    continue
                c = match[0]
                text = f"{c.mean_acc:.2f}±{c.std_acc:.2f}"
                if c.mean_acc == best[r]:
                    text = f"**{text}**"
                row.append(text)
            lines.append("| " + " | ".join(row) + " |")
        lines.append("")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines))


def write_runs_csv(name, variant, outcomes, path):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["dataset", "variant", "labels_per_class", "seed",
                         "temperature", "alpha", "beta", "max_iter",
                         "val_acc", "test_acc", "seconds", "rounds"])
        for o in outcomes:
            writer.writerow([name, variant, o.rate, o.seed,
                             repr(o.params.temperature), repr(o.params.alpha),
                             repr(o.params.beta), o.params.max_iter,
                             repr(o.val_acc), repr(o.test_acc),
                             repr(o.seconds), o.rounds])


def report(table, out_dir):
    """Write ``results.csv`` and ``results.md`` under ``out_dir``."""
    if not table.cells:
        raise ValueError("no results to report")
    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, "results.csv")
    md_path = os.path.join(out_dir, "results.md")
    write_results_csv(table, csv_path)
    write_results_md(table, md_path)
    return csv_path, md_path


def _write_traces(plan, name, outcomes):
    trace_dir = os.path.join(plan.out_dir, "traces")
    os.makedirs(trace_dir, exist_ok=True)
    for o in outcomes:
        trace_to_csv(o.trace, os.path.join(
            trace_dir, f"{name}_k{o.rate}_seed{o.seed}.csv"))


def _load(plan):
    dataset = load_dataset(plan.dataset_dir)
    if plan.row_normalize:
        sums = dataset.features.sum(axis=1, keepdims=True)
        dataset.features = dataset.features / np.where(sums > 0, sums, 1.0)
    return dataset


def cmd_run(args):
    plan = _plan_from_args(args)
    dataset = _load(plan)
    params = HyperParams(args.temperature, args.alpha, args.beta,
                         args.max_iter)
    seeds = [plan.seed + i for i in range(plan.repeats)]
    table = ResultTable()
    all_outcomes = []
    for rate in plan.rates:
        outcomes = _execute(dataset, plan, [(rate, params, s) for s in seeds])
        all_outcomes.extend(outcomes)
        cell = _aggregate(dataset.name, plan.variant, rate, params, outcomes)
        table.cells.append(cell)
        print(f"{dataset.name} k={rate} {plan.variant}: "
              f"{cell.mean_acc:.2f}±{cell.std_acc:.2f}% "
              f"over {cell.repeats} seeds "
              f"({cell.mean_seconds:.1f}s/run)")
    os.makedirs(plan.out_dir, exist_ok=True)
    write_runs_csv(dataset.name, plan.variant, all_outcomes,
                   os.path.join(plan.out_dir, "runs.csv"))
    report(table, plan.out_dir)
    if plan.trace:
        _write_traces(plan, dataset.name, all_outcomes)
    return EXIT_OK


def cmd_grid(args):
    plan = _plan_from_args(args)
    plan.grid = tuple(HyperParams(t, a, b, i)
                      for t in args.grid_temperatures
                      for a in args.grid_alphas
                      for b in args.grid_betas
                      for i in args.grid_iters)
    if not plan.grid:
        raise UsageError("the hyperparameter grid must be non-empty")
    dataset = _load(plan)
    table, outcomes = grid_search(dataset, plan)
    os.makedirs(plan.out_dir, exist_ok=True)
    write_runs_csv(dataset.name, plan.variant, outcomes,
                   os.path.join(plan.out_dir, "runs.csv"))
    report(table, plan.out_dir)
    if plan.trace:
        _write_traces(plan, dataset.name, outcomes)
    for cell in table.cells:
        p = cell.params
        print(f"{dataset.name} k={cell.labels_per_class}: "
              f"{cell.mean_acc:.2f}±{cell.std_acc:.2f}% with "
              f"T={p.temperature} alpha={p.alpha} beta={p.beta} "
              f"max_iter={p.max_iter}")
    return EXIT_OK


def cmd_report(args):
    table = read_results_csv(args.results)
    csv_path, md_path = report(table, args.out)
    print(f"wrote {csv_path} and {md_path}")
    return EXIT_OK


def _plan_from_args(args):
    rates = (tuple(args.rates) if getattr(args, "rates", None)
             else (args.labels_per_class,))
    return ExperimentPlan(
        dataset_dir=args.dataset,
        rates=rates,
        repeats=args.repeats,
        variant=args.variant,
        seed=args.seed,
        out_dir=args.out,
        jobs=args.jobs,
        max_round=args.max_round,
        hops=args.hops,
        faithful=args.faithful,
        clamp_labeled=args.clamp_labeled,
        exact_inner=args.exact_inner,
        trace=args.trace,
        row_normalize=args.row_normalize_features,
    )


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _int_list(text):
    try:
        return [int(tok) for tok in text.split(",") if tok]
    except ValueError:
        raise UsageError(f"expected a comma-separated integer list, got {text!r}")


def _float_list(text):
    try:
        return [float(tok) for tok in text.split(",") if tok]
    except ValueError:
        raise UsageError(f"expected a comma-separated float list, got {text!r}")


def _add_common(p):
    p.add_argument("--dataset", required=True, help="dataset directory")
    p.add_argument("--variant", default="lerp",
                   choices=("lerp", "graphhop", "lerp-v"))
    p.add_argument("--repeats", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-round", type=int, default=100)
    p.add_argument("--hops", type=int, default=2)
    p.add_argument("--jobs", type=int, default=1,
                   help="parallel runs (capped by LERP_THREADS)")
    p.add_argument("--faithful", action="store_true",
                   help="always run max-round rounds (no early exit)")
    p.add_argument("--clamp-labeled", action="store_true",
                   help="reset labeled rows to their one-hot labels "
                        "after every propagation step")
    p.add_argument("--exact-inner", action="store_true",
                   help="use the per-node-weight propagation recursion "
                        "instead of the simplified scalar iteration")
    p.add_argument("--trace", action="store_true",
                   help="write per-round CSV traces")
    p.add_argument("--row-normalize-features", action="store_true")
    p.add_argument("--out", default="lerp-results", help="output directory")


def build_parser():
    parser = _Parser(prog="lerp", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p_run = sub.add_parser("run", help="evaluate one configuration")
    _add_common(p_run)
    p_run.add_argument("--labels-per-class", type=int, default=20)
    p_run.add_argument("--rates", type=_int_list, default=None,
                       help="comma-separated label rates (overrides "
                            "--labels-per-class)")
    p_run.add_argument("--max-iter", type=int, default=10)
    p_run.add_argument("--alpha", type=float, default=1.0)
    p_run.add_argument("--beta", type=float, default=0.5)
    p_run.add_argument("--temperature", type=float, default=1.0)
    p_run.set_defaults(func=cmd_run)

    p_grid = sub.add_parser("grid", help="hyperparameter grid search")
    _add_common(p_grid)
    p_grid.add_argument("--rates", type=_int_list,
                        default=list(DEFAULT_RATES))
    p_grid.add_argument("--grid-temperatures", type=_float_list,
                        default=list(TEMPERATURE_GRID))
    p_grid.add_argument("--grid-alphas", type=_float_list,
                        default=list(ALPHA_GRID))
    p_grid.add_argument("--grid-betas", type=_float_list,
                        default=list(BETA_GRID))
    p_grid.add_argument("--grid-iters", type=_int_list,
                        default=list(MAX_ITER_GRID))
    p_grid.set_defaults(func=cmd_grid, labels_per_class=20)

    p_report = sub.add_parser("report", help="rebuild tables from a CSV")
    p_report.add_argument("--results", required=True,
                          help="path to a results.csv")
    p_report.add_argument("--out", default="lerp-results")
    p_report.set_defaults(func=cmd_report)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "command", None) is None:
            raise UsageError("a subcommand is required (run, grid, report)")
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DatasetError, GraphFormatError, FileNotFoundError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
