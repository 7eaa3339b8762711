"""Command-line front end.

Subcommands: run (batch seeded experiments), report (metric tables and curve
data from record files), truefront (dense-sweep reference fronts),
init-sample (the feasible space-filling sampler), and solve-fixture (the
global solver on a serialized fixture model). Exit codes: 0 success,
1 configuration error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import glob
import json
import sys
from pathlib import Path

import numpy as np


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    from .experiment import ConfigError

    try:
        return args.func(args)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 1
    except KeyError as err:
        print(f"config error: {err.args[0]}", file=sys.stderr)
        return 1
    except Exception as err:  # runtime failure
        print(f"error: {err}", file=sys.stderr)
        return 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="treemoo",
        description="Tree-ensemble multi-objective black-box optimization",
    )
    sub = parser.add_subparsers(required=True)

    p_run = sub.add_parser("run", help="run a batch experiment from a config file")
    p_run.add_argument("config", help="JSON experiment config (schema treemoo.experiment/1)")
    p_run.add_argument("--problem", help="override the config's problem")
    p_run.add_argument("--outdir", help="override the output directory")
    p_run.add_argument("--budget", type=int, help="override total evaluations")
    p_run.add_argument("--n-initial", type=int, dest="n_initial")
    p_run.add_argument("--seeds", help="comma-separated seed list override")
    p_run.add_argument("--optimizers", help="comma-separated optimizer list override")
    p_run.set_defaults(func=cmd_run)

    p_rep = sub.add_parser("report", help="metric tables and curves from run records")
    p_rep.add_argument("records", help="glob of run-record JSONL files")
    p_rep.add_argument("--true-front", help="reference front file for GD/IGD/MPFE/VR")
    p_rep.add_argument("--outdir", default="report", help="output directory")
    p_rep.set_defaults(func=cmd_report)

    p_tf = sub.add_parser("truefront", help="dense-sweep reference front for a synthetic problem")
    p_tf.add_argument("problem")
    p_tf.add_argument("--samples", type=int, default=200_000)
    p_tf.add_argument("--out", required=True)
    p_tf.set_defaults(func=cmd_truefront)

    p_init = sub.add_parser("init-sample", help="feasible space-filling initial design")
    p_init.add_argument("problem")
    p_init.add_argument("--n", type=int, default=10)
    p_init.add_argument("--seed", type=int, default=101)
    p_init.add_argument("--node-limit", type=int, default=400)
    p_init.add_argument("--out", required=True)
    p_init.set_defaults(func=cmd_init_sample)

    p_fix = sub.add_parser("solve-fixture", help="run the global solver on a fixture dump")
    p_fix.add_argument("fixture", help="JSON fixture (schema treemoo.fixture/1)")
    p_fix.add_argument("--rel-gap", type=float, default=1e-4)
    p_fix.add_argument("--node-limit", type=int)
    p_fix.add_argument("--dump-model", action="store_true", help="print the row listing")
    p_fix.set_defaults(func=cmd_solve_fixture)
    return parser


def cmd_run(args) -> int:
    from .experiment import load_config, run_experiment

    overrides = {
        "problem": args.problem,
        "outdir": args.outdir,
        "budget": args.budget,
        "n_initial": args.n_initial,
    }
    if args.seeds:
        overrides["seeds"] = tuple(int(s) for s in args.seeds.split(","))
    if args.optimizers:
        overrides["optimizers"] = tuple(args.optimizers.split(","))
    config = load_config(args.config, overrides)
    outdir = run_experiment(config)
    print(f"wrote records and manifest to {outdir}")
    return 0


def cmd_report(args) -> int:
    from .report import (
        checkpoint_metrics,
        format_summary_table,
        hypervolume_curves,
        write_best_fronts,
        write_curves,
        write_metric_table,
    )
    from .runio import read_front, read_record

    paths = sorted(glob.glob(args.records))
    if not paths:
        raise FileNotFoundError(f"no record files match {args.records!r}")
    records = [read_record(p) for p in paths]
    problems = {r.problem for r in records}
    if len(problems) != 1:
        raise ValueError(f"records mix problems: {sorted(problems)}")
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    curves = hypervolume_curves(records)
    written = write_curves(curves, outdir)
    written += write_best_fronts(records, outdir)
    if args.true_front:
        true_front = read_front(args.true_front)
        rows = checkpoint_metrics(records, true_front)
        table_path = outdir / "metrics.tsv"
        write_metric_table(rows, table_path)
        written.append(table_path)
        summary = format_summary_table(rows)
        (outdir / "summary.txt").write_text(summary + "\n")
        written.append(outdir / "summary.txt")
        print(summary)
    for p in written:
        print(f"wrote {p}")
    return 0


def cmd_truefront(args) -> int:
    from .bench.synthetic import SYNTHETIC_PROBLEMS, true_front
    from .runio import write_front

    if args.problem not in SYNTHETIC_PROBLEMS:
        raise KeyError(
            f"no analytic front for {args.problem!r}; synthetic problems: "
            f"{', '.join(sorted(SYNTHETIC_PROBLEMS))}"
        )
    if args.samples < 1:
        from .experiment import ConfigError

        raise ConfigError("--samples must be positive")
    front = true_front(args.problem, args.samples)
    write_front(front, args.out, comment=f"problem: {args.problem} samples: {args.samples}")
    print(f"wrote {len(front)} front points to {args.out}")
    return 0


def cmd_init_sample(args) -> int:
    from .bench import get_problem
    from .solve import SolveConfig

    problem = get_problem(args.problem)
    rng = np.random.default_rng(args.seed)
    config = SolveConfig(node_limit=args.node_limit, time_limit_secs=float("inf"))
    points = problem.initial_design(args.n, rng, config)
    with Path(args.out).open("w") as fh:
        fh.write(json.dumps({"schema": "treemoo.points/1", "problem": args.problem}) + "\n")
        for p in points:
            fh.write(json.dumps({"x": list(p.values)}) + "\n")
    print(f"wrote {len(points)} points to {args.out}")
    return 0


def cmd_solve_fixture(args) -> int:
    from .encode import load_fixture
    from .solve import SolveConfig, solve

    with Path(args.fixture).open() as fh:
        doc = json.load(fh)
    model = load_fixture(doc)
    if args.dump_model:
        print(model.dump_text())
    config = SolveConfig(
        rel_gap=args.rel_gap,
        node_limit=args.node_limit,
        time_limit_secs=float("inf"),
    )
    result = solve(model, config)
    print(
        f"status={result.status} objective={result.objective:.10g} "
        f"bound={result.bound:.10g} gap={result.gap:.3g} nodes={result.nodes}"
    )
    if result.point is not None:
        print("x =", list(result.point.values))
    return 0


if __name__ == "__main__":
    sys.exit(main())
